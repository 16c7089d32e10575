#pragma once

// Exact binomial numerics and closed-form quantities for two-block majority
// dynamics. Probabilities that may underflow have log-space counterparts
// (log_*); the plain versions return exp() of those.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace majority {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

namespace detail {

inline void check_probability(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) {
    std::ostringstream os;
    os << what << " must lie in [0, 1], got " << p;
    throw std::invalid_argument(os.str());
  }
}

inline double log_add(double a, double b) noexcept {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(-std::abs(a - b)));
}

/// log(1 - exp(x)) for x <= 0.
inline double log1m_exp(double x) noexcept {
  if (x == kNegInf) return 0.0;
  if (x > -std::numbers::ln2) return std::log(-std::expm1(x));
  return std::log1p(-std::exp(x));
}

/// Error of Stirling's approximation: log(k!) - log(sqrt(2 pi k) (k/e)^k).
inline double stirlerr(std::int64_t k) {
  constexpr double s0 = 1.0 / 12.0;
  constexpr double s1 = 1.0 / 360.0;
  constexpr double s2 = 1.0 / 1260.0;
  constexpr double s3 = 1.0 / 1680.0;
  constexpr double s4 = 1.0 / 1188.0;
  if (k < 16) {
    const double x = static_cast<double>(k);
    return std::lgamma(x + 1.0) - (x + 0.5) * std::log(x) + x - 0.5 * std::log(2.0 * std::numbers::pi);
  }
  const double n1 = 1.0 / static_cast<double>(k);
  const double n2 = n1 * n1;
  if (k > 500) return (s0 - s1 * n2) * n1;
  if (k > 80) return (s0 - (s1 - s2 * n2) * n2) * n1;
  if (k > 35) return (s0 - (s1 - (s2 - s3 * n2) * n2) * n2) * n1;
  return (s0 - (s1 - (s2 - (s3 - s4 * n2) * n2) * n2) * n2) * n1;
}

/// Deviance term x log(x / np) + np - x, evaluated without cancellation.
inline double bd0(double x, double np) {
  if (std::abs(x - np) < 0.1 * (x + np)) {
    const double v = (x - np) / (x + np);
    double s = (x - np) * v;
    double ej = 2.0 * x * v;
    for (int j = 1; j < 1000; ++j) {
      ej *= v * v;
      const double s1 = s + ej / (2 * j + 1);
      if (s1 == s) return s1;
      s = s1;
    }
    return s;
  }
  return x * std::log(x / np) + np - x;
}

}  // namespace detail

/// log P[Bin(n, p) = k], via the saddle-point expansion (Loader 2000) that
/// keeps full relative accuracy far into the tails.
inline double binom_log_pmf(std::int64_t n, double p, std::int64_t k) {
  detail::check_probability(p, "p");
  if (n < 0 || k < 0 || k > n) {
    throw std::out_of_range("binomial outcome k=" + std::to_string(k) + " outside [0, " + std::to_string(n) + "]");
  }
  if (p == 0.0) return k == 0 ? 0.0 : kNegInf;
  if (p == 1.0) return k == n ? 0.0 : kNegInf;
  const double dn = static_cast<double>(n);
  if (k == 0) return dn * std::log1p(-p);
  if (k == n) return dn * std::log(p);
  const double dk = static_cast<double>(k);
  const double lc = detail::stirlerr(n) - detail::stirlerr(k) - detail::stirlerr(n - k) - detail::bd0(dk, dn * p) -
                    detail::bd0(dn - dk, dn * (1.0 - p));
  return lc - 0.5 * std::log(2.0 * std::numbers::pi * dk * (dn - dk) / dn);
}

/// All log P[Bin(n, p) = k] for k = 0..n.
inline std::vector<double> binom_log_pmf_table(std::int64_t n, double p) {
  if (n < 0) throw std::invalid_argument("binomial trials must be non-negative");
  std::vector<double> out(static_cast<std::size_t>(n) + 1);
  for (std::int64_t k = 0; k <= n; ++k) out[static_cast<std::size_t>(k)] = binom_log_pmf(n, p, k);
  return out;
}

/// log P[Bin(n, p) <= k]. Sums whichever tail is lighter, so both the near-0
/// and near-1 regimes keep their relative accuracy.
inline double binom_log_cdf(std::int64_t n, double p, std::int64_t k) {
  detail::check_probability(p, "p");
  if (n < 0 || k < 0 || k > n) {
    throw std::out_of_range("binomial outcome k=" + std::to_string(k) + " outside [0, " + std::to_string(n) + "]");
  }
  if (k == n) return 0.0;
  const double mean = static_cast<double>(n) * p;
  double acc = kNegInf;
  if (static_cast<double>(k) <= mean) {
    for (std::int64_t i = k; i >= 0; --i) {
      const double t = binom_log_pmf(n, p, i);
      acc = detail::log_add(acc, t);
      if (t < acc - 40.0 && static_cast<double>(i) < mean) break;
    }
    return acc;
  }
  for (std::int64_t i = k + 1; i <= n; ++i) {
    const double t = binom_log_pmf(n, p, i);
    acc = detail::log_add(acc, t);
    if (t < acc - 40.0 && static_cast<double>(i) > mean) break;
  }
  return detail::log1m_exp(acc);
}

/// log P[Bin(n, p) > k]; k may be -1 (certain) or n (impossible).
inline double binom_log_sf(std::int64_t n, double p, std::int64_t k) {
  detail::check_probability(p, "p");
  if (k < 0) return 0.0;
  if (k >= n) return kNegInf;
  const double mean = static_cast<double>(n) * p;
  double acc = kNegInf;
  if (static_cast<double>(k) >= mean) {
    for (std::int64_t i = k + 1; i <= n; ++i) {
      const double t = binom_log_pmf(n, p, i);
      acc = detail::log_add(acc, t);
      if (t < acc - 40.0 && static_cast<double>(i) > mean) break;
    }
    return acc;
  }
  return detail::log1m_exp(binom_log_cdf(n, p, k));
}

inline double binom_cdf(std::int64_t n, double p, std::int64_t k) { return std::exp(binom_log_cdf(n, p, k)); }

/// log P[lo <= Bin(n, p) <= hi], bounds clamped to [0, n].
inline double binom_log_window(std::int64_t n, double p, std::int64_t lo, std::int64_t hi) {
  lo = std::max<std::int64_t>(lo, 0);
  hi = std::min(hi, n);
  double acc = kNegInf;
  for (std::int64_t k = lo; k <= hi; ++k) acc = detail::log_add(acc, binom_log_pmf(n, p, k));
  return acc;
}

/// log P[Bin(a_trials, a_p) > Bin(b_trials, b_p)] for independent binomials,
/// as the sum over b-outcomes j of P[B = j] P[A > j].
inline double log_prob_exceeds(std::int64_t a_trials, double a_p, std::int64_t b_trials, double b_p) {
  if (a_trials < 0 || b_trials < 0) throw std::invalid_argument("binomial trials must be non-negative");
  const auto a_pmf = binom_log_pmf_table(a_trials, a_p);
  // a_sf[j] = log P[A > j]
  std::vector<double> a_sf(static_cast<std::size_t>(a_trials) + 1, kNegInf);
  double acc = kNegInf;
  for (std::int64_t j = a_trials - 1; j >= 0; --j) {
    acc = detail::log_add(acc, a_pmf[static_cast<std::size_t>(j) + 1]);
    a_sf[static_cast<std::size_t>(j)] = acc;
  }
  double total = kNegInf;
  const std::int64_t top = std::min(b_trials, a_trials - 1);
  for (std::int64_t j = 0; j <= top; ++j) {
    total = detail::log_add(total, binom_log_pmf(b_trials, b_p, j) + a_sf[static_cast<std::size_t>(j)]);
  }
  return total;
}

/// log of the probability that a given -1 vertex turns +1 on the first day:
/// P[Bin(n + delta, q) > Bin(n - 1, p)].
inline double log_flip_prob_minus_to_plus(std::int64_t n, std::int64_t delta, double p, double q) {
  if (n < 1) throw std::invalid_argument("n must be at least 1");
  if (n + delta < 0) throw std::invalid_argument("n + delta must be non-negative");
  detail::check_probability(p, "p");
  detail::check_probability(q, "q");
  return log_prob_exceeds(n + delta, q, n - 1, p);
}

/// log P[Bin(n, q) > Bin(n + delta - 1, p)]: a given +1 vertex turns -1 on day one.
inline double log_flip_prob_plus_to_minus(std::int64_t n, std::int64_t delta, double p, double q) {
  if (n < 1) throw std::invalid_argument("n must be at least 1");
  if (n + delta - 1 < 0) throw std::invalid_argument("n + delta - 1 must be non-negative");
  detail::check_probability(p, "p");
  detail::check_probability(q, "q");
  return log_prob_exceeds(n, q, n + delta - 1, p);
}

inline double flip_prob_minus_to_plus(std::int64_t n, std::int64_t delta, double p, double q) {
  return std::exp(log_flip_prob_minus_to_plus(n, delta, p, q));
}

inline double flip_prob_plus_to_minus(std::int64_t n, std::int64_t delta, double p, double q) {
  return std::exp(log_flip_prob_plus_to_minus(n, delta, p, q));
}

/// P[X <= Y <= X + a] with X ~ Bin(n + delta, q), Y ~ Bin(n - 1, p) independent:
/// the chance a -1 vertex sees a plus surplus of at most `a` over its minus
/// neighbours without strictly exceeding them. Returned in log space.
inline double log_interval_prob(std::int64_t n, std::int64_t delta, double p, double q, std::int64_t a) {
  if (n < 1) throw std::invalid_argument("n must be at least 1");
  if (n + delta < 0) throw std::invalid_argument("n + delta must be non-negative");
  if (a < 0) throw std::invalid_argument("interval width must be non-negative");
  const std::int64_t x_trials = n + delta;
  const auto x_pmf = binom_log_pmf_table(x_trials, q);
  double total = kNegInf;
  for (std::int64_t y = 0; y <= n - 1; ++y) {
    double window = kNegInf;
    for (std::int64_t x = std::max<std::int64_t>(0, y - a); x <= std::min(y, x_trials); ++x) {
      window = detail::log_add(window, x_pmf[static_cast<std::size_t>(x)]);
    }
    if (window == kNegInf) continue;
    total = detail::log_add(total, binom_log_pmf(n - 1, p, y) + window);
  }
  return total;
}

inline double interval_prob(std::int64_t n, std::int64_t delta, double p, double q, std::int64_t a) {
  return std::exp(log_interval_prob(n, delta, p, q, a));
}

/// Kullback-Leibler divergence D(a || p) between Bernoulli laws, with 0 log 0 = 0.
inline double kl_divergence(double a, double p) {
  detail::check_probability(a, "a");
  detail::check_probability(p, "p");
  auto term = [](double x, double y) {
    if (x == 0.0) return 0.0;
    if (y == 0.0) return std::numeric_limits<double>::infinity();
    return x * std::log(x / y);
  };
  return term(a, p) + term(1.0 - a, 1.0 - p);
}

/// H = sqrt(p(2-p-q))/q is the critical coefficient of sqrt(n log n);
/// C governs single-binomial tails and C' the flip probability p_{-+}.
/// H^2 C' = 1/2 identically.
struct ModelConstants {
  double H = 0.0;
  double C = 0.0;
  double C_prime = 0.0;
};

inline ModelConstants constants(double p, double q) {
  detail::check_probability(p, "p");
  detail::check_probability(q, "q");
  if (q == 0.0) throw std::domain_error("constants are undefined at q = 0 (division by zero)");
  ModelConstants c;
  c.H = std::sqrt(p * (2.0 - p - q)) / q;
  c.C = q * q * q / (2.0 * (1.0 - q) * p * p);
  c.C_prime = q * q / (2.0 * p * (2.0 - p - q));
  return c;
}

/// Distance (p-q)n/q - delta below the heuristic dominance threshold.
inline double delta_prime(std::int64_t n, std::int64_t delta, double p, double q) {
  if (!(q > 0.0)) throw std::domain_error("delta_prime needs q > 0");
  return (p - q) * static_cast<double>(n) / q - static_cast<double>(delta);
}

/// Threshold families for the initial lead delta(n), all with natural logs.
/// Each is (p-q)n/q plus or minus a sqrt(n log n)-scale correction.
enum class RegimeKind {
  HaltSufficient,    // lead small enough that the non-Markovian dynamics halts; parameter d_n
  FirstDayWin,       // + wins on day 1; parameter L
  SecondDayWin,      // + wins on day 2; parameter delta
  ThirdDayWin,       // + wins on day 3; parameter L
  UnitHalt,          // p = 1: sharp halting side; parameter L
  UnitSecondDayWin,  // p = 1: day-2 win; parameter delta
  UnitThirdDayWin,   // p = 1: day-3 win; parameter L
  ConjecturedHalt,   // conjectured sharp halting side for p < 1; parameter L
  ExperimentGrid,    // ceil((p-q)n/q - L sqrt(n ln n)), the simulation grid; parameter L >= 0
};

struct ThresholdRegime {
  RegimeKind kind = RegimeKind::ExperimentGrid;
  /// L, delta or d_n depending on `kind`. Absent d_n defaults to ln ln n.
  std::optional<double> parameter;

  static ThresholdRegime experiment(double L) { return {RegimeKind::ExperimentGrid, L}; }
};

inline std::string_view to_string(RegimeKind k) {
  switch (k) {
    case RegimeKind::HaltSufficient: return "halt";
    case RegimeKind::FirstDayWin: return "first-day";
    case RegimeKind::SecondDayWin: return "second-day";
    case RegimeKind::ThirdDayWin: return "third-day";
    case RegimeKind::UnitHalt: return "unit-p-halt";
    case RegimeKind::UnitSecondDayWin: return "unit-p-second-day";
    case RegimeKind::UnitThirdDayWin: return "unit-p-third-day";
    case RegimeKind::ConjecturedHalt: return "conjectured-halt";
    case RegimeKind::ExperimentGrid: return "experiment";
  }
  return "?";
}

inline RegimeKind parse_regime(std::string_view s) {
  for (auto k : {RegimeKind::HaltSufficient, RegimeKind::FirstDayWin, RegimeKind::SecondDayWin,
                 RegimeKind::ThirdDayWin, RegimeKind::UnitHalt, RegimeKind::UnitSecondDayWin,
                 RegimeKind::UnitThirdDayWin, RegimeKind::ConjecturedHalt, RegimeKind::ExperimentGrid}) {
    if (to_string(k) == s) return k;
  }
  throw std::invalid_argument("unknown threshold regime '" + std::string(s) + "'");
}

/// Real-valued threshold before rounding.
inline double threshold_value(std::int64_t n, double p, double q, const ThresholdRegime& regime) {
  if (n < 2) throw std::invalid_argument("threshold needs n >= 2");
  detail::check_probability(p, "p");
  detail::check_probability(q, "q");
  if (!(q > 0.0)) throw std::domain_error("threshold needs q > 0");

  const double dn = static_cast<double>(n);
  const double ln = std::log(dn);
  const double lnln = std::log(ln);
  const double lead = (p - q) * dn / q;
  const double root = std::sqrt(dn * ln);
  const double H = std::sqrt(p * (2.0 - p - q)) / q;
  const double window = std::sqrt(dn * lnln * lnln / ln);

  auto need = [&](const char* name, bool allow_zero) {
    if (!regime.parameter) throw std::invalid_argument(std::string("regime requires parameter ") + name);
    const double v = *regime.parameter;
    if (!(allow_zero ? v >= 0.0 : v > 0.0)) {
      throw std::invalid_argument(std::string("parameter ") + name + (allow_zero ? " must be >= 0" : " must be > 0"));
    }
    return v;
  };
  auto need_unit_p = [&] {
    if (p != 1.0) throw std::invalid_argument("unit-p regimes require p = 1");
  };

  switch (regime.kind) {
    case RegimeKind::HaltSufficient: {
      const double dseq = regime.parameter.value_or(lnln);
      if (!(dseq >= 0.0)) throw std::invalid_argument("d_n must be >= 0 (default ln ln n needs n >= 3)");
      return lead - H * (std::sqrt(1.5 * dn * ln) + std::sqrt(25.0 * dn * lnln * lnln / (24.0 * ln)) +
                         std::sqrt(dn * dseq / ln));
    }
    case RegimeKind::FirstDayWin: return lead + need("L", false) * root;
    case RegimeKind::SecondDayWin: return lead - (H - need("delta", false)) * root;
    case RegimeKind::ThirdDayWin: {
      const double L = need("L", false);
      return lead - H * (root - 1.5 * window - std::sqrt(L * dn / ln));
    }
    case RegimeKind::UnitHalt: {
      need_unit_p();
      return lead - H * root - need("L", false) * window;
    }
    case RegimeKind::UnitSecondDayWin: {
      need_unit_p();
      return lead - (H - need("delta", false)) * root;
    }
    case RegimeKind::UnitThirdDayWin: {
      need_unit_p();
      const double L = need("L", false);
      return lead - H * (root - window - std::sqrt(L * dn / ln));
    }
    case RegimeKind::ConjecturedHalt: return lead - H * root - need("L", false) * window;
    case RegimeKind::ExperimentGrid: return lead - need("L", true) * root;
  }
  throw std::invalid_argument("unknown regime");
}

/// Ceiling of threshold_value. Values within 1e-9 (relative) above an integer
/// round down to it, so representation noise such as 200.00000000000003 does
/// not bump the result.
inline std::int64_t threshold_delta(std::int64_t n, double p, double q, const ThresholdRegime& regime) {
  const double v = threshold_value(n, p, q, regime);
  const double slack = 1e-9 * std::max(1.0, std::abs(v));
  return static_cast<std::int64_t>(std::ceil(v - slack));
}

/// exp(-2n(p - k/n)^2), the Hoeffding bound on P[Bin(n, p) <= k] for k <= np.
inline double hoeffding_upper(std::int64_t n, double p, std::int64_t k) {
  detail::check_probability(p, "p");
  if (n <= 0) throw std::invalid_argument("n must be positive");
  const double dn = static_cast<double>(n);
  const double frac = static_cast<double>(k) / dn;
  if (frac > p + 1e-12) throw std::invalid_argument("hoeffding_upper needs k <= n p");
  const double gap = p - frac;
  return std::exp(-2.0 * dn * gap * gap);
}

/// Probability that a lazy nearest-neighbour walk from s hits b before a,
/// stepping right w.p. p_right and left w.p. p_left (holding otherwise).
inline double gamblers_ruin(double p_right, double p_left, std::int64_t s, std::int64_t a, std::int64_t b) {
  if (!(p_right >= 0.0) || !(p_left >= 0.0) || p_right + p_left > 1.0 + 1e-12) {
    throw std::invalid_argument("step probabilities must be non-negative with sum <= 1");
  }
  if (!(a <= s && s <= b)) throw std::invalid_argument("start must lie in [a, b]");
  if (s == b) return 1.0;
  if (s == a) return 0.0;
  if (p_right == 0.0 && p_left == 0.0) {
    throw std::invalid_argument("walk never moves from an interior start (p_right = p_left = 0)");
  }
  if (p_right == 0.0) return 0.0;
  if (p_left == 0.0) return 1.0;
  const double log_r = std::log(p_left) - std::log(p_right);
  const double x = static_cast<double>(s - a);
  const double y = static_cast<double>(b - a);
  if (log_r == 0.0) return x / y;
  // (1 - r^x) / (1 - r^y), stable for r near 1 and for large exponents.
  if (log_r > 0.0) {
    // r > 1: divide through by r^y to avoid overflow.
    return std::exp(log_r * (x - y)) * std::expm1(-log_r * x) / std::expm1(-log_r * y);
  }
  return std::expm1(log_r * x) / std::expm1(log_r * y);
}

/// Single-binomial tail rate at lead delta: -log P[Bin(n+delta, q) >= np]
/// divided by its exponential core C delta'^2 (n+delta)/n^2.
inline double binomial_tail_rate_ratio(std::int64_t n, std::int64_t delta, double p, double q) {
  const auto c = constants(p, q);
  const double dp = delta_prime(n, delta, p, q);
  const double dn = static_cast<double>(n);
  const auto k = static_cast<std::int64_t>(std::ceil(dn * p - 1e-12));
  const double log_tail = binom_log_sf(n + delta, q, k - 1);
  return -log_tail / (c.C * dp * dp * static_cast<double>(n + delta) / (dn * dn));
}

/// Flip rate at lead delta: -log p_{-+} divided by C' delta'^2 / n.
inline double flip_rate_ratio(std::int64_t n, std::int64_t delta, double p, double q) {
  const auto c = constants(p, q);
  const double dp = delta_prime(n, delta, p, q);
  return -log_flip_prob_minus_to_plus(n, delta, p, q) / (c.C_prime * dp * dp / static_cast<double>(n));
}

}  // namespace majority
