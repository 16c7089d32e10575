#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <variant>
#include <vector>

#include "majority/analytics.hpp"
#include "majority/dynamics.hpp"
#include "majority/graph.hpp"
#include "majority/rng.hpp"

namespace majority {

/// Initial lead: an explicit delta, or a threshold rule evaluated at n.
using DeltaRule = std::variant<std::int64_t, ThresholdRegime>;

/// One Monte Carlo configuration: blocks of n + delta (+1) and n (-1) vertices.
struct ExperimentSpec {
  ModelVariant variant = ModelVariant::Markovian;
  std::size_t n = 0;
  DeltaRule delta_rule = std::int64_t{0};
  double p = 0.5;
  double q = 0.3;
  std::uint64_t replicates = 1000;
  std::uint64_t max_rounds = kDefaultMaxRounds;
  std::uint64_t master_seed = 0;

  std::int64_t resolved_delta() const {
    if (const auto* d = std::get_if<std::int64_t>(&delta_rule)) return *d;
    return threshold_delta(static_cast<std::int64_t>(n), p, q, std::get<ThresholdRegime>(delta_rule));
  }

  std::optional<double> L() const {
    if (const auto* r = std::get_if<ThresholdRegime>(&delta_rule)) return r->parameter;
    return std::nullopt;
  }

  void validate() const {
    if (replicates == 0) throw std::invalid_argument("replicates must be >= 1");
    if (max_rounds == 0) throw std::invalid_argument("max_rounds must be >= 1");
    if (!(p >= 0.0 && p <= 1.0) || !(q >= 0.0 && q <= 1.0)) {
      throw std::invalid_argument("edge probabilities must lie in [0, 1]");
    }
    const std::int64_t delta = resolved_delta();
    if (static_cast<std::int64_t>(n) + delta < 0) {
      throw std::invalid_argument("delta = " + std::to_string(delta) + " leaves a negative + block (n + delta < 0)");
    }
    if (2 * static_cast<std::int64_t>(n) + delta == 0) throw std::invalid_argument("population is empty");
  }
};

/// Outcome counts for a set of replicates. Merging is commutative and exact
/// (integer sums only), so the aggregate does not depend on scheduling.
struct ReplicateTally {
  std::uint64_t plus_wins = 0;
  std::uint64_t minus_wins = 0;
  std::uint64_t halts = 0;
  std::uint64_t timeouts = 0;
  std::uint64_t consensus_day_sum = 0;
  std::uint64_t runs_with_flip_to_minus = 0;
  std::map<std::uint64_t, std::uint64_t> plus_days;
  std::map<std::uint64_t, std::uint64_t> minus_days;
  std::map<std::uint64_t, std::uint64_t> halt_days;

  void add(const RunResult& run) {
    const auto& o = run.outcome;
    switch (o.kind) {
      case OutcomeKind::PlusWins:
        ++plus_wins;
        ++plus_days[o.day];
        consensus_day_sum += o.day;
        break;
      case OutcomeKind::MinusWins:
        ++minus_wins;
        ++minus_days[o.day];
        consensus_day_sum += o.day;
        break;
      case OutcomeKind::Halt:
        ++halts;
        ++halt_days[o.day];
        break;
      case OutcomeKind::Timeout: ++timeouts; break;
    }
    if (run.any_flip_to_minus()) ++runs_with_flip_to_minus;
  }

  void merge(const ReplicateTally& other) {
    plus_wins += other.plus_wins;
    minus_wins += other.minus_wins;
    halts += other.halts;
    timeouts += other.timeouts;
    consensus_day_sum += other.consensus_day_sum;
    runs_with_flip_to_minus += other.runs_with_flip_to_minus;
    for (const auto& [d, c] : other.plus_days) plus_days[d] += c;
    for (const auto& [d, c] : other.minus_days) minus_days[d] += c;
    for (const auto& [d, c] : other.halt_days) halt_days[d] += c;
  }

  std::uint64_t total() const { return plus_wins + minus_wins + halts + timeouts; }
};

struct Interval {
  double low = 0.0;
  double high = 1.0;
};

/// Wilson score interval for `successes` out of `trials` at z (default 95%).
inline Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z = 1.959963984540054) {
  if (trials == 0) return {0.0, 1.0};
  const double nn = static_cast<double>(trials);
  const double phat = static_cast<double>(successes) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double center = (phat + z2 / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(phat * (1.0 - phat) / nn + z2 / (4.0 * nn * nn)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

struct ExperimentReport {
  ModelVariant variant = ModelVariant::Markovian;
  std::size_t n = 0;
  std::int64_t delta = 0;
  double p = 0.0;
  double q = 0.0;
  std::optional<double> L;
  std::uint64_t replicates = 0;
  std::uint64_t max_rounds = 0;
  std::uint64_t master_seed = 0;

  std::uint64_t plus_wins = 0;
  std::uint64_t minus_wins = 0;
  std::uint64_t halts = 0;
  std::uint64_t timeouts = 0;
  /// Mean day of consensus over replicates that reached consensus.
  std::optional<double> avg_last_day;
  /// Most frequent outcome (ties resolved in the order plus, minus, halt, timeout).
  OutcomeKind dominant = OutcomeKind::PlusWins;
  double ci_low = 0.0;
  double ci_high = 1.0;
  std::uint64_t runs_with_flip_to_minus = 0;
  std::map<std::uint64_t, std::uint64_t> plus_days;
  std::map<std::uint64_t, std::uint64_t> minus_days;
  std::map<std::uint64_t, std::uint64_t> halt_days;

  double frequency(OutcomeKind k) const {
    const double r = static_cast<double>(replicates);
    switch (k) {
      case OutcomeKind::PlusWins: return static_cast<double>(plus_wins) / r;
      case OutcomeKind::MinusWins: return static_cast<double>(minus_wins) / r;
      case OutcomeKind::Halt: return static_cast<double>(halts) / r;
      case OutcomeKind::Timeout: return static_cast<double>(timeouts) / r;
    }
    return 0.0;
  }

  std::uint64_t count(OutcomeKind k) const {
    switch (k) {
      case OutcomeKind::PlusWins: return plus_wins;
      case OutcomeKind::MinusWins: return minus_wins;
      case OutcomeKind::Halt: return halts;
      case OutcomeKind::Timeout: return timeouts;
    }
    return 0;
  }
};

inline ExperimentReport make_report(const ExperimentSpec& spec, const ReplicateTally& tally) {
  ExperimentReport r;
  r.variant = spec.variant;
  r.n = spec.n;
  r.delta = spec.resolved_delta();
  r.p = spec.p;
  r.q = spec.q;
  r.L = spec.L();
  r.replicates = spec.replicates;
  r.max_rounds = spec.max_rounds;
  r.master_seed = spec.master_seed;
  r.plus_wins = tally.plus_wins;
  r.minus_wins = tally.minus_wins;
  r.halts = tally.halts;
  r.timeouts = tally.timeouts;
  const std::uint64_t consensus = tally.plus_wins + tally.minus_wins;
  if (consensus > 0) r.avg_last_day = static_cast<double>(tally.consensus_day_sum) / static_cast<double>(consensus);
  r.runs_with_flip_to_minus = tally.runs_with_flip_to_minus;
  r.plus_days = tally.plus_days;
  r.minus_days = tally.minus_days;
  r.halt_days = tally.halt_days;

  r.dominant = OutcomeKind::PlusWins;
  for (auto k : {OutcomeKind::MinusWins, OutcomeKind::Halt, OutcomeKind::Timeout}) {
    if (r.count(k) > r.count(r.dominant)) r.dominant = k;
  }
  const auto ci = wilson_interval(r.count(r.dominant), r.replicates);
  r.ci_low = ci.low;
  r.ci_high = ci.high;
  return r;
}

struct RunConfig {
  /// Worker threads; 0 means std::thread::hardware_concurrency().
  unsigned workers = 0;
};

/// Runs spec.replicates independent replicates. Replicate r uses a
/// Xoshiro256 stream seeded with replicate_seed(master_seed, r).
inline ExperimentReport run_experiment(const ExperimentSpec& spec, RunConfig config = {}) {
  spec.validate();
  const std::int64_t delta = spec.resolved_delta();
  const auto plus = static_cast<std::size_t>(static_cast<std::int64_t>(spec.n) + delta);
  const BlockParams params(spec.p, spec.q);

  unsigned workers = config.workers != 0 ? config.workers : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::uint64_t>(workers, spec.replicates));

  std::atomic<std::uint64_t> next{0};
  std::vector<ReplicateTally> partial(workers);
  auto work = [&](unsigned w) {
    for (std::uint64_t r = next.fetch_add(1); r < spec.replicates; r = next.fetch_add(1)) {
      Xoshiro256 rng(replicate_seed(spec.master_seed, r));
      partial[w].add(run_dynamics(spec.variant, plus, spec.n, params, spec.max_rounds, rng));
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
  }
  ReplicateTally total;
  for (const auto& t : partial) total.merge(t);
  return make_report(spec, total);
}

enum class TableId { T1, T2, T3, T4, T5, T6 };

inline TableId parse_table_id(std::string_view s) {
  if (s == "T1") return TableId::T1;
  if (s == "T2") return TableId::T2;
  if (s == "T3") return TableId::T3;
  if (s == "T4") return TableId::T4;
  if (s == "T5") return TableId::T5;
  if (s == "T6") return TableId::T6;
  throw std::invalid_argument("unknown table id '" + std::string(s) + "' (expected T1..T6)");
}

inline constexpr std::size_t kMarkovianTableGrid[] = {50, 100, 125, 150, 175, 200, 225, 250};
inline constexpr double kUnitPGrid[] = {0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 2.7, 2.788, 2.8, 3.0, 3.5, 4.0};
inline constexpr double kHalfPGrid[] = {0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 2.582, 2.6, 3.0, 4.0};

/// Configurations behind a table preset, in row order.
///   T1  Markovian, delta = 1,            p = .5, q = .3, n over the Markovian grid
///   T2  Markovian, delta = ceil(ln n),   same grid
///   T3  Markovian, delta = ceil(n / 10), same grid
///   T4  non-Markovian, n = 500, p = 1,  q = .3, experiment-grid delta over L
///   T5  non-Markovian, n = 500, p = .5, q = .3, experiment-grid delta over L
///   T6  same configurations as T5
inline std::vector<ExperimentSpec> table_specs(TableId id, std::uint64_t replicates, std::uint64_t master_seed,
                                               std::uint64_t max_rounds = kDefaultMaxRounds) {
  std::vector<ExperimentSpec> out;
  auto base = [&] {
    ExperimentSpec s;
    s.replicates = replicates;
    s.master_seed = master_seed;
    s.max_rounds = max_rounds;
    return s;
  };
  switch (id) {
    case TableId::T1:
    case TableId::T2:
    case TableId::T3:
      for (std::size_t n : kMarkovianTableGrid) {
        auto s = base();
        s.variant = ModelVariant::Markovian;
        s.n = n;
        s.p = 0.5;
        s.q = 0.3;
        const double dn = static_cast<double>(n);
        if (id == TableId::T1) {
          s.delta_rule = std::int64_t{1};
        } else if (id == TableId::T2) {
          s.delta_rule = static_cast<std::int64_t>(std::ceil(std::log(dn)));
        } else {
          s.delta_rule = static_cast<std::int64_t>((n + 9) / 10);
        }
        out.push_back(s);
      }
      break;
    case TableId::T4:
      for (double L : kUnitPGrid) {
        auto s = base();
        s.variant = ModelVariant::NonMarkovian;
        s.n = 500;
        s.p = 1.0;
        s.q = 0.3;
        s.delta_rule = ThresholdRegime::experiment(L);
        out.push_back(s);
      }
      break;
    case TableId::T5:
    case TableId::T6:
      for (double L : kHalfPGrid) {
        auto s = base();
        s.variant = ModelVariant::NonMarkovian;
        s.n = 500;
        s.p = 0.5;
        s.q = 0.3;
        s.delta_rule = ThresholdRegime::experiment(L);
        out.push_back(s);
      }
      break;
  }
  return out;
}

inline std::vector<ExperimentReport> reproduce_table(TableId id, std::uint64_t replicates, std::uint64_t master_seed,
                                                     RunConfig config = {},
                                                     std::uint64_t max_rounds = kDefaultMaxRounds) {
  if (replicates == 0) throw std::invalid_argument("replicates must be >= 1");
  std::vector<ExperimentReport> out;
  for (const auto& spec : table_specs(id, replicates, master_seed, max_rounds)) {
    out.push_back(run_experiment(spec, config));
  }
  return out;
}

struct ScanPoint {
  double L = 0.0;
  std::int64_t delta = 0;
  ExperimentReport report;
};

struct PhaseScan {
  std::vector<ScanPoint> points;
  /// Adjacent grid points [L_lo, L_hi] between which the + win frequency
  /// crosses 1/2; absent if it never does.
  std::optional<std::pair<double, double>> crossing;
};

/// First adjacent pair whose + win frequencies lie on opposite sides of 1/2
/// (at or above vs. below).
inline std::optional<std::pair<double, double>> find_crossing(const std::vector<ScanPoint>& points) {
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    const bool a = points[i].report.frequency(OutcomeKind::PlusWins) >= 0.5;
    const bool b = points[i + 1].report.frequency(OutcomeKind::PlusWins) >= 0.5;
    if (a != b) return std::make_pair(points[i].L, points[i + 1].L);
  }
  return std::nullopt;
}

struct ScanSettings {
  ModelVariant variant = ModelVariant::NonMarkovian;
  std::size_t n = 500;
  double p = 1.0;
  double q = 0.3;
  std::vector<double> L_grid;
  std::uint64_t replicates = 1000;
  std::uint64_t max_rounds = kDefaultMaxRounds;
  std::uint64_t master_seed = 0;
};

/// One experiment per L (ascending), with delta = ceil((p-q)n/q - L sqrt(n ln n)).
inline PhaseScan scan_phase(const ScanSettings& settings, RunConfig config = {}) {
  if (settings.L_grid.empty()) throw std::invalid_argument("L grid is empty");
  auto grid = settings.L_grid;
  std::sort(grid.begin(), grid.end());
  PhaseScan scan;
  for (double L : grid) {
    ExperimentSpec s;
    s.variant = settings.variant;
    s.n = settings.n;
    s.p = settings.p;
    s.q = settings.q;
    s.delta_rule = ThresholdRegime::experiment(L);
    s.replicates = settings.replicates;
    s.max_rounds = settings.max_rounds;
    s.master_seed = settings.master_seed;
    auto report = run_experiment(s, config);
    scan.points.push_back({L, report.delta, std::move(report)});
  }
  scan.crossing = find_crossing(scan.points);
  return scan;
}

}  // namespace majority
