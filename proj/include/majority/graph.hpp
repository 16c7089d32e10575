#pragma once

// Stochastic block model sampling and the two graph-evolution disciplines.
//
// Vertices are 0-based. A GraphState keeps the full symmetric adjacency as a
// dense bit matrix (one bit row per vertex), which makes per-day resampling a
// word-parallel operation and neighbour tallies a handful of popcounts.
//
// Random draws are consumed in a fixed order so runs replay bit-exactly from a
// seed:
//   resample_full     rows i = 0..N-1 ascending; in row i the lanes j > i are
//                     produced word by word (ascending); each word draws its
//                     same-opinion lanes (Bernoulli(p)) and then its
//                     cross-opinion lanes (Bernoulli(q)), skipping a class
//                     that has no lane in that word.
//   resample_touched  flipped vertices f ascending; row f is redrawn over every
//                     lane j != f except flipped j < f (already redrawn from
//                     row j), with the same per-word order as above.

#include <algorithm>
#include <array>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "majority/diagnostics.hpp"
#include "majority/rng.hpp"

namespace majority {

enum class Opinion : std::int8_t { Minus = -1, Plus = 1 };

constexpr Opinion opposite(Opinion o) noexcept { return o == Opinion::Plus ? Opinion::Minus : Opinion::Plus; }
constexpr int sign(Opinion o) noexcept { return static_cast<int>(o); }

/// Edge probabilities of a two-block SBM: p inside a block, q across blocks.
class BlockParams {
 public:
  BlockParams(double p, double q) : p_(p), q_(q) {
    if (!(p >= 0.0 && p <= 1.0) || !(q >= 0.0 && q <= 1.0)) {
      std::ostringstream os;
      os << "edge probabilities must lie in [0, 1], got p=" << p << " q=" << q;
      throw std::invalid_argument(os.str());
    }
    if (q >= p) {
      std::ostringstream os;
      os << "q >= p (p=" << p << ", q=" << q << "): outside the assortative regime q < p";
      warn(os.str());
    }
  }

  double p() const noexcept { return p_; }
  double q() const noexcept { return q_; }
  bool assortative() const noexcept { return q_ < p_; }

  friend bool operator==(const BlockParams&, const BlockParams&) = default;

 private:
  double p_;
  double q_;
};

constexpr std::size_t kLaneBits = 64;

constexpr std::size_t words_for(std::size_t bits) noexcept { return (bits + kLaneBits - 1) / kLaneBits; }

/// Per-vertex opinions with a maintained count of +1 entries.
class OpinionVector {
 public:
  OpinionVector() = default;

  explicit OpinionVector(std::vector<Opinion> values) : values_(std::move(values)) {
    plus_ = static_cast<std::size_t>(std::count(values_.begin(), values_.end(), Opinion::Plus));
  }

  /// `plus` vertices holding +1 followed by `minus` vertices holding -1.
  static OpinionVector blocks(std::size_t plus, std::size_t minus) {
    std::vector<Opinion> v(plus, Opinion::Plus);
    v.resize(plus + minus, Opinion::Minus);
    return OpinionVector(std::move(v));
  }

  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }
  Opinion operator[](std::size_t i) const { return values_[i]; }
  std::span<const Opinion> values() const noexcept { return values_; }

  void set(std::size_t i, Opinion o) {
    if (values_.at(i) == o) return;
    if (o == Opinion::Plus) {
      ++plus_;
    } else {
      --plus_;
    }
    values_[i] = o;
  }

  std::size_t plus_count() const noexcept { return plus_; }
  std::size_t minus_count() const noexcept { return values_.size() - plus_; }
  bool unanimous() const noexcept { return plus_ == 0 || plus_ == values_.size(); }

  OpinionVector negated() const {
    std::vector<Opinion> v(values_.size());
    std::transform(values_.begin(), values_.end(), v.begin(), opposite);
    return OpinionVector(std::move(v));
  }

  /// Bit i of word i/64 is set iff vertex i holds +1.
  std::vector<std::uint64_t> plus_mask() const {
    std::vector<std::uint64_t> mask(words_for(values_.size()), 0);
    for (std::size_t i = 0; i < values_.size(); ++i) {
      if (values_[i] == Opinion::Plus) mask[i / kLaneBits] |= std::uint64_t{1} << (i % kLaneBits);
    }
    return mask;
  }

  friend bool operator==(const OpinionVector& a, const OpinionVector& b) { return a.values_ == b.values_; }

 private:
  std::vector<Opinion> values_;
  std::size_t plus_ = 0;
};

class GraphState;

namespace detail {
struct GraphAccess;
}

/// Undirected simple graph on a fixed vertex set, stored as a symmetric bit
/// matrix. The diagonal is always clear.
class GraphState {
 public:
  explicit GraphState(std::size_t vertex_count)
      : n_(vertex_count), wpr_(words_for(vertex_count)), bits_(n_ * wpr_, 0) {
    if (vertex_count == 0) throw std::invalid_argument("graph needs at least one vertex");
  }

  std::size_t vertex_count() const noexcept { return n_; }
  std::size_t words_per_row() const noexcept { return wpr_; }

  bool has_edge(std::size_t i, std::size_t j) const {
    check_vertex(i);
    check_vertex(j);
    return (bits_[i * wpr_ + j / kLaneBits] >> (j % kLaneBits)) & 1u;
  }

  void set_edge(std::size_t i, std::size_t j, bool present) {
    check_vertex(i);
    check_vertex(j);
    if (i == j) throw std::invalid_argument("self-loops are not allowed");
    assign_bit(i, j, present);
    assign_bit(j, i, present);
  }

  /// Adjacency row of vertex i as 64-bit words; bit j of word j/64 is edge (i, j).
  std::span<const std::uint64_t> row(std::size_t i) const {
    check_vertex(i);
    return {bits_.data() + i * wpr_, wpr_};
  }

  std::size_t degree(std::size_t i) const {
    std::size_t d = 0;
    for (auto w : row(i)) d += static_cast<std::size_t>(std::popcount(w));
    return d;
  }

  std::size_t edge_count() const {
    std::size_t total = 0;
    for (auto w : bits_) total += static_cast<std::size_t>(std::popcount(w));
    return total / 2;
  }

  /// All edges as (i, j) with i < j, in row-major order.
  std::vector<std::pair<std::size_t, std::size_t>> edges() const {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = i + 1; j < n_; ++j) {
        if (has_edge(i, j)) out.emplace_back(i, j);
      }
    }
    return out;
  }

  friend bool operator==(const GraphState&, const GraphState&) = default;

 private:
  friend struct detail::GraphAccess;

  void check_vertex(std::size_t v) const {
    if (v >= n_) {
      throw std::out_of_range("vertex " + std::to_string(v) + " out of range for graph on " + std::to_string(n_) +
                              " vertices");
    }
  }

  void assign_bit(std::size_t i, std::size_t j, bool present) {
    auto& w = bits_[i * wpr_ + j / kLaneBits];
    const std::uint64_t bit = std::uint64_t{1} << (j % kLaneBits);
    w = present ? (w | bit) : (w & ~bit);
  }

  std::size_t n_;
  std::size_t wpr_;
  std::vector<std::uint64_t> bits_;
};

namespace detail {

struct GraphAccess {
  static std::uint64_t* row(GraphState& g, std::size_t i) { return g.bits_.data() + i * g.wpr_; }
};

/// In-place transpose of a 64x64 bit block: bit c of a[r] <-> bit r of a[c].
inline void transpose64(std::array<std::uint64_t, 64>& a) noexcept {
  std::uint64_t m = 0x00000000FFFFFFFFull;
  for (unsigned j = 32; j != 0; j >>= 1, m ^= (m << j)) {
    for (unsigned k = 0; k < 64; k = ((k | j) + 1) & ~j) {
      const std::uint64_t t = ((a[k] >> j) ^ a[k | j]) & m;
      a[k | j] ^= t;
      a[k] ^= t << j;
    }
  }
}

/// Lanes j with j > i inside word w.
constexpr std::uint64_t above_lanes(std::size_t i, std::size_t w) noexcept {
  const std::size_t wi = i / kLaneBits;
  if (w > wi) return ~std::uint64_t{0};
  if (w < wi) return 0;
  const std::size_t b = i % kLaneBits;
  return b == 63 ? 0 : ~((std::uint64_t{2} << b) - 1);
}

/// Lanes j with j < i inside word w.
constexpr std::uint64_t below_lanes(std::size_t i, std::size_t w) noexcept {
  const std::size_t wi = i / kLaneBits;
  if (w < wi) return ~std::uint64_t{0};
  if (w > wi) return 0;
  return (std::uint64_t{1} << (i % kLaneBits)) - 1;
}

/// Lanes j < n inside word w.
constexpr std::uint64_t valid_lanes(std::size_t n, std::size_t w) noexcept {
  const std::size_t lo = w * kLaneBits;
  if (lo + kLaneBits <= n) return ~std::uint64_t{0};
  if (lo >= n) return 0;
  return (std::uint64_t{1} << (n - lo)) - 1;
}

/// Draws the lanes in `lanes`: Bernoulli(p) where `same` is set, Bernoulli(q) elsewhere.
template <class URBG>
std::uint64_t draw_lanes(URBG& rng, std::uint64_t lanes, std::uint64_t same, const LaneProbability& p,
                         const LaneProbability& q) {
  std::uint64_t out = 0;
  const std::uint64_t same_lanes = lanes & same;
  const std::uint64_t cross_lanes = lanes & ~same;
  if (same_lanes) out |= bernoulli_lanes(rng, p) & same_lanes;
  if (cross_lanes) out |= bernoulli_lanes(rng, q) & cross_lanes;
  return out;
}

/// Mirrors the strict upper triangle into the lower triangle.
inline void mirror_upper(GraphState& g) {
  const std::size_t n = g.vertex_count();
  const std::size_t blocks = g.words_per_row();
  std::array<std::uint64_t, 64> a{};
  for (std::size_t bi = 0; bi < blocks; ++bi) {
    const std::size_t rows_i = std::min(kLaneBits, n - bi * kLaneBits);
    for (std::size_t bj = bi; bj < blocks; ++bj) {
      const std::size_t rows_j = std::min(kLaneBits, n - bj * kLaneBits);
      a.fill(0);
      for (std::size_t r = 0; r < rows_i; ++r) a[r] = GraphAccess::row(g, bi * kLaneBits + r)[bj];
      transpose64(a);
      for (std::size_t c = 0; c < rows_j; ++c) {
        auto& dst = GraphAccess::row(g, bj * kLaneBits + c)[bi];
        dst = (bi == bj) ? (dst | a[c]) : a[c];
      }
    }
  }
}

}  // namespace detail

/// Redraws every pair of `graph` from SBM(|V+|, |V-|, p, q) under `opinions`.
/// The previous edge set is discarded. `graph` must have opinions.size() vertices.
template <class URBG>
void resample_full_into(GraphState& graph, const OpinionVector& opinions, const BlockParams& params, URBG& rng) {
  const std::size_t n = opinions.size();
  if (n == 0) throw std::invalid_argument("opinion vector is empty");
  if (graph.vertex_count() != n) throw std::invalid_argument("graph and opinion sizes differ");
  const LaneProbability lp(params.p());
  const LaneProbability lq(params.q());
  const auto plus = opinions.plus_mask();
  const std::size_t wpr = graph.words_per_row();
  for (std::size_t i = 0; i < n; ++i) {
    std::uint64_t* row = detail::GraphAccess::row(graph, i);
    const bool is_plus = opinions[i] == Opinion::Plus;
    for (std::size_t w = 0; w < wpr; ++w) {
      const std::uint64_t lanes = detail::above_lanes(i, w) & detail::valid_lanes(n, w);
      row[w] = lanes ? detail::draw_lanes(rng, lanes, is_plus ? plus[w] : ~plus[w], lp, lq) : 0;
    }
  }
  detail::mirror_upper(graph);
}

template <class URBG>
GraphState resample_full(const OpinionVector& opinions, const BlockParams& params, URBG& rng) {
  if (opinions.empty()) throw std::invalid_argument("opinion vector is empty");
  GraphState g(opinions.size());
  resample_full_into(g, opinions, params, rng);
  return g;
}

/// Samples SBM(m, n, p, q): vertices 0..m-1 hold +1, vertices m..m+n-1 hold -1.
template <class URBG>
std::pair<GraphState, OpinionVector> sample_sbm(std::size_t m, std::size_t n, const BlockParams& params, URBG& rng) {
  if (m + n == 0) throw std::invalid_argument("SBM needs at least one vertex");
  auto opinions = OpinionVector::blocks(m, n);
  auto graph = resample_full(opinions, params, rng);
  return {std::move(graph), std::move(opinions)};
}

/// Touched-pair update: a pair keeps its edge state iff neither endpoint
/// changed opinion between `old_opinions` and `new_opinions`; every other pair
/// is redrawn with Bernoulli(p) if the endpoints now agree and Bernoulli(q)
/// otherwise. Modifies `graph` in place.
template <class URBG>
void resample_touched_in_place(GraphState& graph, const OpinionVector& old_opinions,
                               const OpinionVector& new_opinions, const BlockParams& params, URBG& rng) {
  const std::size_t n = graph.vertex_count();
  if (old_opinions.size() != n || new_opinions.size() != n) {
    throw std::invalid_argument("opinion vectors must match the graph's vertex count");
  }
  std::vector<std::uint64_t> flipped(graph.words_per_row(), 0);
  bool any = false;
  for (std::size_t i = 0; i < n; ++i) {
    if (old_opinions[i] != new_opinions[i]) {
      flipped[i / kLaneBits] |= std::uint64_t{1} << (i % kLaneBits);
      any = true;
    }
  }
  if (!any) return;

  const LaneProbability lp(params.p());
  const LaneProbability lq(params.q());
  const auto plus = new_opinions.plus_mask();
  const std::size_t wpr = graph.words_per_row();
  for (std::size_t wf = 0; wf < wpr; ++wf) {
    for (std::uint64_t pending = flipped[wf]; pending != 0; pending &= pending - 1) {
      const std::size_t f = wf * kLaneBits + static_cast<std::size_t>(std::countr_zero(pending));
      std::uint64_t* row = detail::GraphAccess::row(graph, f);
      const bool is_plus = new_opinions[f] == Opinion::Plus;
      for (std::size_t w = 0; w < wpr; ++w) {
        // Flipped j < f were redrawn from row j; j == f is the diagonal.
        std::uint64_t lanes = detail::valid_lanes(n, w) & ~(flipped[w] & detail::below_lanes(f, w));
        if (w == wf) lanes &= ~(std::uint64_t{1} << (f % kLaneBits));
        if (!lanes) continue;
        const std::uint64_t fresh = detail::draw_lanes(rng, lanes, is_plus ? plus[w] : ~plus[w], lp, lq);
        const std::uint64_t changed = (row[w] ^ fresh) & lanes;
        row[w] ^= changed;
        for (std::uint64_t c = changed; c != 0; c &= c - 1) {
          const std::size_t j = w * kLaneBits + static_cast<std::size_t>(std::countr_zero(c));
          detail::GraphAccess::row(graph, j)[wf] ^= std::uint64_t{1} << (f % kLaneBits);
        }
      }
    }
  }
}

template <class URBG>
GraphState resample_touched(const GraphState& graph, const OpinionVector& old_opinions,
                            const OpinionVector& new_opinions, const BlockParams& params, URBG& rng) {
  GraphState next = graph;
  resample_touched_in_place(next, old_opinions, new_opinions, params, rng);
  return next;
}

struct NeighborTally {
  std::size_t plus = 0;
  std::size_t minus = 0;
  friend bool operator==(const NeighborTally&, const NeighborTally&) = default;
};

/// Neighbours of v split by opinion, using a precomputed plus mask.
inline NeighborTally neighbor_tally(const GraphState& graph, std::span<const std::uint64_t> plus_mask,
                                    std::size_t v) {
  const auto row = graph.row(v);
  NeighborTally t;
  for (std::size_t w = 0; w < row.size(); ++w) {
    const auto deg = static_cast<std::size_t>(std::popcount(row[w]));
    const auto pos = static_cast<std::size_t>(std::popcount(row[w] & plus_mask[w]));
    t.plus += pos;
    t.minus += deg - pos;
  }
  return t;
}

inline NeighborTally neighbor_tally(const GraphState& graph, const OpinionVector& opinions, std::size_t v) {
  if (opinions.size() != graph.vertex_count()) throw std::invalid_argument("graph and opinion sizes differ");
  if (v >= graph.vertex_count()) {
    throw std::out_of_range("vertex " + std::to_string(v) + " out of range");
  }
  const auto mask = opinions.plus_mask();
  return neighbor_tally(graph, mask, v);
}

}  // namespace majority
