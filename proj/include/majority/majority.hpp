#pragma once

#include "majority/analytics.hpp"
#include "majority/diagnostics.hpp"
#include "majority/dynamics.hpp"
#include "majority/graph.hpp"
#include "majority/harness.hpp"
#include "majority/oracle.hpp"
#include "majority/report_io.hpp"
#include "majority/rng.hpp"
