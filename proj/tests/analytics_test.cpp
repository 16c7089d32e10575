#include <gtest/gtest.h>

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "majority/analytics.hpp"

namespace mj = majority;

namespace {

// Direct product C(n, k) p^k (1-p)^(n-k) in long double.
long double direct_pmf(int n, long double p, int k) {
  long double c = 1;
  for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return c * std::pow(p, static_cast<long double>(k)) * std::pow(1 - p, static_cast<long double>(n - k));
}

long double direct_cdf(int n, long double p, int k) {
  long double s = 0;
  for (int i = 0; i <= k; ++i) s += direct_pmf(n, p, i);
  return s;
}

// P[Bin(a, pa) > Bin(b, pb)] summed over every (x, y) pair.
long double brute_exceeds(int a, long double pa, int b, long double pb) {
  long double s = 0;
  for (int x = 0; x <= a; ++x) {
    for (int y = 0; y < x && y <= b; ++y) s += direct_pmf(a, pa, x) * direct_pmf(b, pb, y);
  }
  return s;
}

// Hitting probability of b before a by value iteration on the walk itself.
double iterate_ruin(double pr, double pl, int s, int a, int b) {
  std::vector<double> h(static_cast<std::size_t>(b - a + 1), 0.0);
  h.back() = 1.0;
  for (int it = 0; it < 200000; ++it) {
    double change = 0;
    for (int x = 1; x < b - a; ++x) {
      const double v = pr * h[x + 1] + pl * h[x - 1] + (1 - pr - pl) * h[x];
      change = std::max(change, std::abs(v - h[x]));
      h[x] = v;
    }
    if (change < 1e-15) break;
  }
  return h[static_cast<std::size_t>(s - a)];
}

}  // namespace

TEST(BinomPmf, SmallCases) {
  EXPECT_NEAR(mj::binom_log_pmf(1, 0.3, 1), std::log(0.3), 1e-15);
  EXPECT_NEAR(mj::binom_log_pmf(2, 0.5, 1), std::log(0.5), 1e-15);
  const double exact = 120.0 * std::pow(0.3, 3) * std::pow(0.7, 7);
  EXPECT_NEAR(std::exp(mj::binom_log_pmf(10, 0.3, 3)), exact, 1e-12 * exact);
  EXPECT_THROW(mj::binom_log_pmf(5, 0.3, 6), std::out_of_range);
  EXPECT_THROW(mj::binom_log_pmf(5, 0.3, -1), std::out_of_range);
  EXPECT_EQ(mj::binom_log_pmf(4, 0.0, 0), 0.0);
  EXPECT_EQ(mj::binom_log_pmf(4, 1.0, 3), mj::kNegInf);
}

TEST(BinomPmf, RelativeAccuracyAgainstDirectProduct) {
  for (int n : {1, 7, 30, 120, 400}) {
    for (double p : {0.01, 0.3, 0.5, 0.93}) {
      for (int k = 0; k <= n; ++k) {
        const long double ref = direct_pmf(n, p, k);
        if (ref < 1e-280L) continue;
        const double got = mj::binom_log_pmf(n, p, k);
        EXPECT_NEAR(got, static_cast<double>(std::log(ref)), 1e-10 * std::max(1.0, std::abs(got)))
            << n << " " << p << " " << k;
      }
    }
  }
}

TEST(BinomPmf, LargeNSumsToOne) {
  const auto table = mj::binom_log_pmf_table(1000000, 0.3);
  double acc = mj::kNegInf;
  for (double v : table) acc = mj::detail::log_add(acc, v);
  EXPECT_NEAR(acc, 0.0, 1e-10);
}

TEST(BinomCdf, Examples) {
  EXPECT_EQ(mj::binom_cdf(7, 0.4, 7), 1.0);
  EXPECT_NEAR(mj::binom_cdf(2, 0.5, 0), 0.25, 1e-15);
  EXPECT_NEAR(mj::binom_cdf(20, 0.3, 6), static_cast<double>(direct_cdf(20, 0.3L, 6)), 1e-12);
  EXPECT_THROW(mj::binom_cdf(20, 0.3, 21), std::out_of_range);
}

TEST(BinomCdf, MatchesDirectSummationBothTails) {
  for (int n : {5, 40, 200}) {
    for (double p : {0.1, 0.5, 0.8}) {
      for (int k = 0; k <= n; ++k) {
        const long double ref = direct_cdf(n, p, k);
        EXPECT_NEAR(mj::binom_cdf(n, p, k), static_cast<double>(ref), 1e-12);
        if (ref > 1e-300L) {
          EXPECT_NEAR(mj::binom_log_cdf(n, p, k), static_cast<double>(std::log(ref)), 1e-9);
        }
        long double sf = 0;
        for (int i = k + 1; i <= n; ++i) sf += direct_pmf(n, p, i);
        if (sf > 1e-300L) {
          EXPECT_NEAR(mj::binom_log_sf(n, p, k), static_cast<double>(std::log(sf)), 1e-9) << n << p << k;
        }
      }
    }
  }
  EXPECT_EQ(mj::binom_log_sf(10, 0.3, -1), 0.0);
  EXPECT_EQ(mj::binom_log_sf(10, 0.3, 10), mj::kNegInf);
}

TEST(BinomCdf, DeepTailStaysFinite) {
  const double v = mj::binom_log_cdf(100000, 0.5, 10000);
  EXPECT_TRUE(std::isfinite(v));
  EXPECT_LT(v, -700.0);
}

TEST(BinomWindow, SumsPmf) {
  EXPECT_NEAR(std::exp(mj::binom_log_window(20, 0.3, 4, 8)),
              static_cast<double>(direct_cdf(20, 0.3L, 8) - direct_cdf(20, 0.3L, 3)), 1e-12);
  EXPECT_NEAR(mj::binom_log_window(20, 0.3, -5, 40), 0.0, 1e-12);
}

TEST(FlipProb, Examples) {
  EXPECT_EQ(mj::flip_prob_minus_to_plus(5, 2, 0.5, 0.0), 0.0);
  EXPECT_EQ(mj::flip_prob_plus_to_minus(5, 2, 0.5, 0.0), 0.0);
  EXPECT_NEAR(mj::flip_prob_minus_to_plus(1, 0, 0.5, 0.3), 0.3, 1e-15);
  EXPECT_NEAR(mj::flip_prob_plus_to_minus(1, 0, 0.5, 0.5), 0.5, 1e-15);
  EXPECT_NEAR(mj::flip_prob_minus_to_plus(2, 1, 0.5, 0.5), 0.6875, 1e-12);
  EXPECT_NEAR(mj::flip_prob_plus_to_minus(2, 1, 0.5, 0.5), 5.0 / 16.0, 1e-12);
  EXPECT_THROW(mj::flip_prob_minus_to_plus(0, 1, 0.5, 0.3), std::invalid_argument);
}

TEST(FlipProb, MatchesBruteForceDoubleSum) {
  for (int n = 1; n <= 30; n += 1) {
    for (int delta : {0, 1, 3, 10}) {
      for (auto [p, q] : {std::pair{0.5, 0.3}, std::pair{1.0, 0.3}, std::pair{0.8, 0.5}, std::pair{0.3, 0.3}}) {
        const auto mp = brute_exceeds(n + delta, q, n - 1, p);
        const auto pm = brute_exceeds(n, q, n + delta - 1, p);
        ASSERT_NEAR(mj::flip_prob_minus_to_plus(n, delta, p, q), static_cast<double>(mp), 1e-12)
            << n << " " << delta << " " << p << " " << q;
        ASSERT_NEAR(mj::flip_prob_plus_to_minus(n, delta, p, q), static_cast<double>(pm), 1e-12)
            << n << " " << delta << " " << p << " " << q;
      }
    }
  }
}

TEST(FlipProb, IidTieSymmetry) {
  for (int n : {3, 17, 250}) {
    for (double q : {0.2, 0.5}) {
      double tie = 0;
      for (int k = 0; k <= n; ++k) tie += std::exp(2.0 * mj::binom_log_pmf(n, q, k));
      EXPECT_NEAR(std::exp(mj::log_prob_exceeds(n, q, n, q)), (1.0 - tie) / 2.0, 1e-12);
    }
  }
}

TEST(FlipProb, LogSpaceSurvivesUnderflow) {
  const double v = mj::log_flip_prob_minus_to_plus(20000, 0, 0.9, 0.05);
  EXPECT_TRUE(std::isfinite(v));
  EXPECT_LT(v, -745.0);
}

TEST(IntervalProb, MatchesBruteForce) {
  for (int n : {1, 4, 12}) {
    for (int delta : {0, 2}) {
      for (int a : {0, 1, 3}) {
        const double p = 0.6, q = 0.35;
        long double ref = 0;
        for (int x = 0; x <= n + delta; ++x) {
          for (int y = x; y <= std::min(n - 1, x + a); ++y) ref += direct_pmf(n + delta, q, x) * direct_pmf(n - 1, p, y);
        }
        EXPECT_NEAR(mj::interval_prob(n, delta, p, q, a), static_cast<double>(ref), 1e-13) << n << delta << a;
      }
    }
  }
  EXPECT_THROW(mj::interval_prob(3, 0, 0.5, 0.3, -1), std::invalid_argument);
}

TEST(KlDivergence, Examples) {
  EXPECT_EQ(mj::kl_divergence(0.3, 0.3), 0.0);
  EXPECT_NEAR(mj::kl_divergence(0.5, 0.25), 0.5 * std::log(2.0) + 0.5 * std::log(2.0 / 3.0), 1e-15);
  EXPECT_NEAR(mj::kl_divergence(0.5, 0.25), 0.143841, 1e-6);
  EXPECT_NEAR(mj::kl_divergence(1.0, 0.5), std::log(2.0), 1e-15);
  EXPECT_EQ(mj::kl_divergence(0.5, 0.0), std::numeric_limits<double>::infinity());
}

TEST(Constants, PaperCriticalValues) {
  EXPECT_NEAR(mj::constants(1.0, 0.3).H, 2.7889, 1e-4);
  EXPECT_NEAR(mj::constants(0.5, 0.3).H, 2.5820, 1e-4);
  EXPECT_EQ(mj::constants(1.0, 1.0).H, 0.0);
  EXPECT_THROW(mj::constants(0.5, 0.0), std::domain_error);
}

TEST(Constants, HSquaredCPrimeIsHalf) {
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    double p = u(gen), q = u(gen);
    if (q > p) std::swap(p, q);
    if (q <= 0.0 || p >= 1.0 || q == p) continue;
    const auto c = mj::constants(p, q);
    EXPECT_NEAR(c.H * c.H * c.C_prime, 0.5, 1e-12);
  }
}

TEST(DeltaPrime, Examples) {
  EXPECT_NEAR(mj::delta_prime(500, 1167, 1.0, 0.3), 1166.6666666666667 - 1167, 1e-9);
  EXPECT_NEAR(mj::delta_prime(500, 334, 0.5, 0.3), 333.33333333333337 - 334, 1e-9);
  EXPECT_NEAR(mj::delta_prime(300, 700, 1.0, 0.3), 0.0, 1e-9);
}

TEST(ThresholdDelta, ExperimentGridUnitP) {
  // ceil(7n/3 - L sqrt(n ln n)) at n = 500, evaluated independently.
  const double Ls[] = {0, 0.5, 1, 1.5, 2, 2.5, 2.7, 2.788, 2.8, 3, 3.5, 4};
  const std::int64_t expect[] = {1167, 1139, 1111, 1084, 1056, 1028, 1017, 1012, 1011, 1000, 972, 944};
  for (std::size_t i = 0; i < std::size(Ls); ++i) {
    EXPECT_EQ(mj::threshold_delta(500, 1.0, 0.3, mj::ThresholdRegime::experiment(Ls[i])), expect[i]) << Ls[i];
  }
}

TEST(ThresholdDelta, ExperimentGridHalfP) {
  const double Ls[] = {0, 0.5, 1, 1.5, 2, 2.5, 2.582, 2.6, 3, 4};
  const std::int64_t expect[] = {334, 306, 278, 250, 222, 194, 190, 189, 167, 111};
  for (std::size_t i = 0; i < std::size(Ls); ++i) {
    EXPECT_EQ(mj::threshold_delta(500, 0.5, 0.3, mj::ThresholdRegime::experiment(Ls[i])), expect[i]) << Ls[i];
  }
}

TEST(ThresholdDelta, RegimeFormulas) {
  const std::int64_t n = 10000;
  const double p = 0.5, q = 0.3;
  const double dn = n, ln = std::log(dn), lnln = std::log(ln);
  const double lead = (p - q) * dn / q, root = std::sqrt(dn * ln), H = std::sqrt(p * (2 - p - q)) / q;
  using K = mj::RegimeKind;
  auto val = [&](K k, std::optional<double> par) { return mj::threshold_value(n, p, q, {k, par}); };
  EXPECT_NEAR(val(K::FirstDayWin, 0.7), lead + 0.7 * root, 1e-9);
  EXPECT_NEAR(val(K::SecondDayWin, 0.2), lead - (H - 0.2) * root, 1e-9);
  EXPECT_NEAR(val(K::ConjecturedHalt, 2.0), lead - H * root - 2.0 * std::sqrt(dn * lnln * lnln / ln), 1e-9);
  const double halt = lead - H * (std::sqrt(1.5 * dn * ln) + std::sqrt(25 * dn * lnln * lnln / (24 * ln)) +
                                  std::sqrt(dn * lnln / ln));
  EXPECT_NEAR(val(K::HaltSufficient, std::nullopt), halt, 1e-9);
  EXPECT_NEAR(val(K::ThirdDayWin, 1.0),
              lead - H * (root - 1.5 * std::sqrt(dn * lnln * lnln / ln) - std::sqrt(dn / ln)), 1e-9);
  // Orderings implied by the regimes: halting leads sit below winning ones.
  EXPECT_LT(val(K::HaltSufficient, std::nullopt), val(K::SecondDayWin, 0.1));
  EXPECT_LT(val(K::SecondDayWin, 0.1), lead);
  EXPECT_LT(lead, val(K::FirstDayWin, 0.1));
}

TEST(ThresholdDelta, ParameterValidation) {
  using K = mj::RegimeKind;
  EXPECT_THROW(mj::threshold_delta(500, 0.5, 0.3, {K::FirstDayWin, 0.0}), std::invalid_argument);
  EXPECT_THROW(mj::threshold_delta(500, 0.5, 0.3, {K::SecondDayWin, std::nullopt}), std::invalid_argument);
  EXPECT_THROW(mj::threshold_delta(500, 0.5, 0.3, {K::UnitHalt, 1.0}), std::invalid_argument);
  EXPECT_THROW(mj::threshold_delta(500, 0.5, 0.3, mj::ThresholdRegime::experiment(-1.0)), std::invalid_argument);
  EXPECT_THROW(mj::threshold_delta(1, 0.5, 0.3, mj::ThresholdRegime::experiment(1.0)), std::invalid_argument);
  EXPECT_NO_THROW(mj::threshold_delta(500, 1.0, 0.3, {K::UnitHalt, 1.0}));
  EXPECT_NO_THROW(mj::threshold_delta(500, 0.5, 0.3, mj::ThresholdRegime::experiment(0.0)));
}

TEST(ThresholdDelta, RegimeNamesRoundTrip) {
  using K = mj::RegimeKind;
  for (auto k : {K::HaltSufficient, K::FirstDayWin, K::SecondDayWin, K::ThirdDayWin, K::UnitHalt,
                 K::UnitSecondDayWin, K::UnitThirdDayWin, K::ConjecturedHalt, K::ExperimentGrid}) {
    EXPECT_EQ(mj::parse_regime(mj::to_string(k)), k);
  }
  EXPECT_THROW(mj::parse_regime("fourth-day"), std::invalid_argument);
}

TEST(Hoeffding, ExamplesAndBound) {
  EXPECT_NEAR(mj::hoeffding_upper(100, 0.5, 50), 1.0, 1e-15);
  EXPECT_NEAR(mj::hoeffding_upper(100, 0.5, 40), std::exp(-2.0), 1e-15);
  EXPECT_THROW(mj::hoeffding_upper(100, 0.5, 51), std::invalid_argument);
  for (int n : {10, 57, 300}) {
    for (double p : {0.2, 0.5, 0.9}) {
      for (int k = 0; k <= static_cast<int>(std::floor(n * p)); ++k) {
        EXPECT_LE(mj::binom_cdf(n, p, k), mj::hoeffding_upper(n, p, k) * (1 + 1e-12)) << n << p << k;
      }
    }
  }
}

TEST(GamblersRuin, Examples) {
  EXPECT_NEAR(mj::gamblers_ruin(0.3, 0.3, 5, 0, 10), 0.5, 1e-15);
  EXPECT_NEAR(mj::gamblers_ruin(0.4, 0.2, 1, 0, 2), 2.0 / 3.0, 1e-15);
  EXPECT_EQ(mj::gamblers_ruin(0.1, 0.5, 7, 0, 7), 1.0);
  EXPECT_EQ(mj::gamblers_ruin(0.1, 0.5, 0, 0, 7), 0.0);
  EXPECT_THROW(mj::gamblers_ruin(0.0, 0.0, 3, 0, 7), std::invalid_argument);
  EXPECT_THROW(mj::gamblers_ruin(0.7, 0.5, 3, 0, 7), std::invalid_argument);
  EXPECT_THROW(mj::gamblers_ruin(0.4, 0.5, 8, 0, 7), std::invalid_argument);
}

TEST(GamblersRuin, MatchesValueIterationAndIgnoresLaziness) {
  for (auto [pr, pl] : {std::pair{0.4, 0.2}, std::pair{0.25, 0.35}, std::pair{0.1, 0.1}, std::pair{0.45, 0.44}}) {
    for (int s = -3; s <= 6; ++s) {
      const double v = mj::gamblers_ruin(pr, pl, s, -3, 6);
      EXPECT_NEAR(v, iterate_ruin(pr, pl, s, -3, 6), 1e-9);
      for (double lambda : {0.5, 0.01, 1.0}) {
        EXPECT_NEAR(mj::gamblers_ruin(lambda * pr, lambda * pl, s, -3, 6), v, 1e-12);
      }
    }
  }
}

TEST(GamblersRuin, ExtremeBiasIsStable) {
  const double v = mj::gamblers_ruin(0.01, 0.9, 500, 0, 1000);
  EXPECT_GE(v, 0.0);
  EXPECT_LT(v, 1e-300);
  EXPECT_NEAR(mj::gamblers_ruin(0.9, 0.01, 1, 0, 1000), 1.0 - 0.01 / 0.9, 1e-12);
}

TEST(TailRates, AgreeWithIndependentEvaluation) {
  // Reference values from an independent scipy evaluation at n = 5000.
  const std::int64_t n = 5000;
  const double p = 0.5, q = 0.3;
  const auto delta = static_cast<std::int64_t>(std::ceil((p - q) * n / q - std::sqrt(n * std::log(double(n)))));
  ASSERT_EQ(delta, 3127);
  EXPECT_NEAR(mj::binomial_tail_rate_ratio(n, delta, p, q), 2.5061728032716104, 1e-8);
  EXPECT_NEAR(mj::flip_rate_ratio(n, delta, p, q), 3.2250795396827567, 1e-8);
  EXPECT_NEAR(mj::log_flip_prob_minus_to_plus(n, delta, p, q), -2.0595411691739773, 1e-9);
}

TEST(TailRates, RatiosShrinkWithN) {
  const double p = 0.5, q = 0.3;
  double prev_c = 1e9, prev_f = 1e9;
  for (std::int64_t n : {500, 5000, 50000}) {
    const auto delta =
        static_cast<std::int64_t>(std::ceil((p - q) * n / q - std::sqrt(n * std::log(static_cast<double>(n)))));
    const double c = mj::binomial_tail_rate_ratio(n, delta, p, q);
    const double f = mj::flip_rate_ratio(n, delta, p, q);
    EXPECT_LT(c, prev_c);
    EXPECT_LT(f, prev_f);
    EXPECT_GT(c, 1.0);
    EXPECT_GT(f, 1.0);
    prev_c = c;
    prev_f = f;
  }
}
