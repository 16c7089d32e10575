#pragma once

// Exact ground truth for tiny populations (N <= 7) by enumerating every
// labelled graph on N vertices.

#include <Eigen/Dense>

#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace majority {

inline constexpr std::size_t kMaxOracleVertices = 7;

/// One-day law of the Markovian update from a fresh SBM with `plus_count`
/// vertices at +1 out of `vertex_count`.
struct DayLaw {
  std::size_t vertex_count = 0;
  std::size_t plus_count = 0;
  /// joint[a][b] = P[a vertices go -1 -> +1 and b vertices go +1 -> -1].
  std::vector<std::vector<double>> joint;

  /// Distribution of the next + count, indexed 0..vertex_count.
  std::vector<double> next_count() const {
    std::vector<double> out(vertex_count + 1, 0.0);
    for (std::size_t a = 0; a < joint.size(); ++a) {
      for (std::size_t b = 0; b < joint[a].size(); ++b) out[plus_count + a - b] += joint[a][b];
    }
    return out;
  }

  double no_flip() const { return joint.at(0).at(0); }
};

/// Enumerates all 2^(N(N-1)/2) graphs on N vertices (0..j-1 at +1), weighting
/// each by its SBM probability and applying the majority rule.
inline DayLaw enumerate_day_law(std::size_t plus_count, std::size_t vertex_count, double p, double q) {
  if (vertex_count == 0) throw std::invalid_argument("need at least one vertex");
  if (vertex_count > kMaxOracleVertices) {
    throw std::invalid_argument("exhaustive enumeration is limited to " + std::to_string(kMaxOracleVertices) +
                                " vertices, got " + std::to_string(vertex_count));
  }
  if (plus_count > vertex_count) throw std::invalid_argument("plus_count exceeds vertex_count");
  if (!(p >= 0.0 && p <= 1.0) || !(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("p, q must lie in [0, 1]");

  const std::size_t n = vertex_count;
  auto is_plus = [&](std::size_t v) { return v < plus_count; };

  // Pair index e enumerates (i, k), i < k, row-major.
  std::uint32_t intra_mask = 0;
  std::vector<std::uint32_t> plus_edges(n, 0), minus_edges(n, 0);
  std::size_t edges = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = i + 1; k < n; ++k, ++edges) {
      const std::uint32_t bit = std::uint32_t{1} << edges;
      if (is_plus(i) == is_plus(k)) intra_mask |= bit;
      (is_plus(k) ? plus_edges[i] : minus_edges[i]) |= bit;
      (is_plus(i) ? plus_edges[k] : minus_edges[k]) |= bit;
    }
  }
  const int intra_total = std::popcount(intra_mask);
  const int cross_total = static_cast<int>(edges) - intra_total;

  DayLaw law;
  law.vertex_count = n;
  law.plus_count = plus_count;
  law.joint.assign(n - plus_count + 1, std::vector<double>(plus_count + 1, 0.0));
  if (plus_count == 0 || plus_count == n) {
    // Unanimity is a fixed point whatever the graph.
    law.joint[0][0] = 1.0;
    return law;
  }

  // Graphs are tallied by (flips up, flips down, intra edges, cross edges) as
  // exact integers; weights are applied once at the end.
  const std::size_t na = static_cast<std::size_t>(intra_total) + 1;
  const std::size_t nc = static_cast<std::size_t>(cross_total) + 1;
  const std::size_t nb = plus_count + 1;
  std::vector<std::uint64_t> tally((n - plus_count + 1) * nb * na * nc, 0);
  const std::uint64_t graphs = std::uint64_t{1} << edges;
  for (std::uint64_t g = 0; g < graphs; ++g) {
    const auto mask = static_cast<std::uint32_t>(g);
    const auto a = static_cast<std::size_t>(std::popcount(mask & intra_mask));
    const auto c = static_cast<std::size_t>(std::popcount(mask)) - a;
    std::size_t to_plus = 0;
    std::size_t to_minus = 0;
    for (std::size_t v = 0; v < n; ++v) {
      const int plus_nb = std::popcount(mask & plus_edges[v]);
      const int minus_nb = std::popcount(mask & minus_edges[v]);
      if (is_plus(v) && minus_nb > plus_nb) ++to_minus;
      if (!is_plus(v) && plus_nb > minus_nb) ++to_plus;
    }
    ++tally[((to_plus * nb + to_minus) * na + a) * nc + c];
  }

  std::vector<double> intra_w(na), cross_w(nc);
  for (std::size_t a = 0; a < na; ++a) {
    intra_w[a] = std::pow(p, static_cast<double>(a)) * std::pow(1.0 - p, static_cast<double>(na - 1 - a));
  }
  for (std::size_t c = 0; c < nc; ++c) {
    cross_w[c] = std::pow(q, static_cast<double>(c)) * std::pow(1.0 - q, static_cast<double>(nc - 1 - c));
  }
  for (std::size_t up = 0; up < law.joint.size(); ++up) {
    for (std::size_t down = 0; down < nb; ++down) {
      double sum = 0.0;
      for (std::size_t a = 0; a < na; ++a) {
        for (std::size_t c = 0; c < nc; ++c) {
          const auto count = tally[((up * nb + down) * na + a) * nc + c];
          if (count != 0) sum += static_cast<double>(count) * intra_w[a] * cross_w[c];
        }
      }
      law.joint[up][down] = sum;
    }
  }
  return law;
}

/// Distribution of the next + count from `plus_count` out of `vertex_count`.
inline std::vector<double> enumerate_day_kernel_row(std::size_t plus_count, std::size_t vertex_count, double p,
                                                    double q) {
  return enumerate_day_law(plus_count, vertex_count, p, q).next_count();
}

/// Transition matrix of the Markovian + count chain on {0, ..., N}.
struct TransitionKernel {
  std::size_t vertex_count = 0;
  std::vector<std::vector<double>> rows;

  double operator()(std::size_t from, std::size_t to) const { return rows.at(from).at(to); }
};

inline TransitionKernel build_kernel(std::size_t vertex_count, double p, double q) {
  TransitionKernel k;
  k.vertex_count = vertex_count;
  for (std::size_t j = 0; j <= vertex_count; ++j) k.rows.push_back(enumerate_day_kernel_row(j, vertex_count, p, q));
  return k;
}

struct AbsorptionResult {
  /// P[+ eventually wins]; NaN when the start cannot reach unanimity.
  double prob_plus_wins = std::numeric_limits<double>::quiet_NaN();
  bool absorbing_reachable = false;
};

/// States that reach any state in `targets` under `kernel` (targets included).
inline std::vector<bool> reaches(const TransitionKernel& kernel, std::vector<bool> targets) {
  const std::size_t n = kernel.vertex_count;
  bool grown = true;
  while (grown) {
    grown = false;
    for (std::size_t j = 0; j <= n; ++j) {
      if (targets[j]) continue;
      for (std::size_t k = 0; k <= n; ++k) {
        if (targets[k] && kernel(j, k) > 0.0) {
          targets[j] = true;
          grown = true;
          break;
        }
      }
    }
  }
  return targets;
}

/// Absorption probabilities h(j) = P[hit N before 0 | start j] of `kernel`.
/// States that cannot reach N get h = 0; the rest solve
/// h(j) = K(j, N) + sum over transient j' of K(j, j') h(j').
inline std::vector<double> absorption_vector(const TransitionKernel& kernel) {
  const std::size_t n = kernel.vertex_count;
  std::vector<bool> top(n + 1, false);
  top[n] = true;
  const auto can_win = reaches(kernel, top);

  std::vector<std::size_t> unknown;
  for (std::size_t j = 1; j < n; ++j) {
    if (can_win[j]) unknown.push_back(j);
  }
  std::vector<double> h(n + 1, 0.0);
  h[n] = 1.0;
  if (unknown.empty()) return h;

  const auto m = static_cast<Eigen::Index>(unknown.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(m, m);
  Eigen::VectorXd rhs(m);
  for (Eigen::Index r = 0; r < m; ++r) {
    const std::size_t j = unknown[static_cast<std::size_t>(r)];
    rhs(r) = kernel(j, n);
    for (Eigen::Index c = 0; c < m; ++c) a(r, c) -= kernel(j, unknown[static_cast<std::size_t>(c)]);
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  if (!lu.isInvertible()) throw std::logic_error("absorption system is singular");
  const Eigen::VectorXd x = lu.solve(rhs);
  for (Eigen::Index r = 0; r < m; ++r) h[unknown[static_cast<std::size_t>(r)]] = x(r);
  return h;
}

/// Exact P[+ wins] for the Markovian model from n + delta vs n (2n + delta <= 7).
inline AbsorptionResult exact_absorption(std::size_t n, std::size_t delta, double p, double q) {
  const std::size_t total = 2 * n + delta;
  if (total == 0) throw std::invalid_argument("need at least one vertex");
  if (total > kMaxOracleVertices) throw std::invalid_argument("exact_absorption needs 2n + delta <= 7");
  const std::size_t start = n + delta;
  AbsorptionResult r;
  if (start == total || start == 0) {
    r.absorbing_reachable = true;
    r.prob_plus_wins = start == total ? 1.0 : 0.0;
    return r;
  }
  const auto kernel = build_kernel(total, p, q);
  std::vector<bool> ends(total + 1, false);
  ends[0] = ends[total] = true;
  r.absorbing_reachable = reaches(kernel, ends)[start];
  if (!r.absorbing_reachable) return r;
  r.prob_plus_wins = absorption_vector(kernel)[start];
  return r;
}

/// Exact probability that day 1 changes no opinion, from n + delta vs n.
/// Both variants share it since day 1 always sees a fresh SBM.
inline double exact_halt_day1(std::size_t n, std::size_t delta, double p, double q) {
  if (n == 0) throw std::invalid_argument("exact_halt_day1 needs a non-unanimous start (n > 0)");
  const std::size_t total = 2 * n + delta;
  if (total > kMaxOracleVertices) throw std::invalid_argument("exact_halt_day1 needs 2n + delta <= 7");
  return enumerate_day_law(n + delta, total, p, q).no_flip();
}

struct Agreement {
  double z_score = 0.0;
  bool pass = false;
};

/// Normal-approximation z of an empirical frequency against an exact
/// probability; passes iff |z| <= 4.
inline Agreement mc_agreement(double empirical, std::uint64_t replicates, double exact) {
  if (replicates < 100) throw std::invalid_argument("mc_agreement needs at least 100 replicates");
  const double var = exact * (1.0 - exact) / static_cast<double>(replicates);
  Agreement a;
  if (var <= 0.0) {
    a.z_score = empirical == exact ? 0.0 : std::numeric_limits<double>::infinity();
  } else {
    a.z_score = (empirical - exact) / std::sqrt(var);
  }
  a.pass = std::abs(a.z_score) <= 4.0;
  return a;
}

}  // namespace majority
