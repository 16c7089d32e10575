#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "majority/graph.hpp"

namespace majority {

/// How the graph evolves between days.
///   Markovian     every pair is redrawn from the SBM law of the current opinions.
///   NonMarkovian  only pairs with an endpoint that just changed opinion are redrawn.
enum class ModelVariant { Markovian, NonMarkovian };

inline std::string_view to_string(ModelVariant v) {
  return v == ModelVariant::Markovian ? "markovian" : "non-markovian";
}

inline ModelVariant parse_variant(std::string_view s) {
  if (s == "markovian") return ModelVariant::Markovian;
  if (s == "non-markovian" || s == "nonmarkovian") return ModelVariant::NonMarkovian;
  throw std::invalid_argument("unknown model variant '" + std::string(s) + "'");
}

enum class OutcomeKind { PlusWins, MinusWins, Halt, Timeout };

inline std::string_view to_string(OutcomeKind k) {
  switch (k) {
    case OutcomeKind::PlusWins: return "plus_wins";
    case OutcomeKind::MinusWins: return "minus_wins";
    case OutcomeKind::Halt: return "halt";
    case OutcomeKind::Timeout: return "timeout";
  }
  return "?";
}

/// Terminal classification of a run. For Timeout, `day` holds max_rounds.
struct Outcome {
  OutcomeKind kind = OutcomeKind::Timeout;
  std::uint64_t day = 0;

  static Outcome plus_wins(std::uint64_t day) { return {OutcomeKind::PlusWins, day}; }
  static Outcome minus_wins(std::uint64_t day) { return {OutcomeKind::MinusWins, day}; }
  static Outcome halt(std::uint64_t day) { return {OutcomeKind::Halt, day}; }
  static Outcome timeout(std::uint64_t max_rounds) { return {OutcomeKind::Timeout, max_rounds}; }

  bool consensus() const noexcept { return kind == OutcomeKind::PlusWins || kind == OutcomeKind::MinusWins; }

  friend bool operator==(const Outcome&, const Outcome&) = default;
};

/// One day of a run. Day 0 is the initial configuration and has no flips.
struct DayRecord {
  std::size_t plus_count = 0;
  std::size_t flips_to_plus = 0;
  std::size_t flips_to_minus = 0;
  friend bool operator==(const DayRecord&, const DayRecord&) = default;
};

using Trajectory = std::vector<DayRecord>;

struct StepCounts {
  std::size_t to_plus = 0;
  std::size_t to_minus = 0;
  std::size_t total() const noexcept { return to_plus + to_minus; }
};

/// Synchronous majority update written into `next`: each vertex takes the sign
/// of (plus neighbours - minus neighbours) and keeps its opinion on a zero sum,
/// isolated vertices included.
inline StepCounts majority_step_into(const GraphState& graph, const OpinionVector& current, OpinionVector& next) {
  const std::size_t n = graph.vertex_count();
  if (current.size() != n) throw std::invalid_argument("graph and opinion sizes differ");
  if (next.size() != n) next = current;
  const auto mask = current.plus_mask();
  StepCounts counts;
  for (std::size_t v = 0; v < n; ++v) {
    const auto t = neighbor_tally(graph, mask, v);
    Opinion o = current[v];
    if (t.plus > t.minus) {
      o = Opinion::Plus;
    } else if (t.minus > t.plus) {
      o = Opinion::Minus;
    }
    if (o != current[v]) {
      if (o == Opinion::Plus) {
        ++counts.to_plus;
      } else {
        ++counts.to_minus;
      }
    }
    next.set(v, o);
  }
  return counts;
}

inline OpinionVector majority_step(const GraphState& graph, const OpinionVector& opinions) {
  OpinionVector next = opinions;
  majority_step_into(graph, opinions, next);
  return next;
}

/// Outcome reached at `day`, if any: unanimity wins for both variants; a
/// non-unanimous day without flips halts the non-Markovian model (its graph
/// can no longer change). A Markovian no-flip day continues.
inline std::optional<Outcome> classify_state(const OpinionVector& opinions, std::size_t flips_this_day,
                                             ModelVariant variant, std::uint64_t day) {
  if (!opinions.empty() && opinions.plus_count() == opinions.size()) return Outcome::plus_wins(day);
  if (!opinions.empty() && opinions.plus_count() == 0) return Outcome::minus_wins(day);
  if (variant == ModelVariant::NonMarkovian && flips_this_day == 0 && day > 0) return Outcome::halt(day);
  return std::nullopt;
}

struct RunResult {
  Outcome outcome;
  Trajectory trajectory;

  /// True if any day moved a vertex from +1 to -1.
  bool any_flip_to_minus() const {
    for (const auto& d : trajectory) {
      if (d.flips_to_minus > 0) return true;
    }
    return false;
  }
};

inline constexpr std::uint64_t kDefaultMaxRounds = 100000;

/// Runs the coupled (graph, opinions) process from SBM(m, n, p, q) with
/// vertices 0..m-1 holding +1. Day t+1 opinions are the majority step on the
/// day-t graph; the graph is then redrawn according to `variant`.
template <class URBG>
RunResult run_dynamics(ModelVariant variant, std::size_t m, std::size_t n, const BlockParams& params,
                       std::uint64_t max_rounds, URBG& rng) {
  if (m + n == 0) throw std::invalid_argument("run needs at least one vertex");
  if (max_rounds == 0) throw std::invalid_argument("max_rounds must be positive");

  auto [graph, current] = sample_sbm(m, n, params, rng);
  OpinionVector next = current;
  RunResult result;
  result.trajectory.push_back({current.plus_count(), 0, 0});
  if (auto o = classify_state(current, 0, variant, 0)) {
    result.outcome = *o;
    return result;
  }

  for (std::uint64_t day = 1; day <= max_rounds; ++day) {
    const auto counts = majority_step_into(graph, current, next);
    result.trajectory.push_back({next.plus_count(), counts.to_plus, counts.to_minus});
    if (auto o = classify_state(next, counts.total(), variant, day)) {
      result.outcome = *o;
      return result;
    }
    if (variant == ModelVariant::Markovian) {
      resample_full_into(graph, next, params, rng);
    } else {
      resample_touched_in_place(graph, current, next, params, rng);
    }
    std::swap(current, next);
  }
  result.outcome = Outcome::timeout(max_rounds);
  return result;
}

}  // namespace majority
