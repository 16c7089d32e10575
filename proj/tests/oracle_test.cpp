#include <gtest/gtest.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "majority/dynamics.hpp"
#include "majority/oracle.hpp"

namespace mj = majority;

TEST(DayKernel, HandCheckedRows) {
  const auto r = mj::enumerate_day_kernel_row(2, 3, 0.5, 0.5);
  ASSERT_EQ(r.size(), 4u);
  EXPECT_NEAR(r[3], 0.375, 1e-15);
  EXPECT_NEAR(r[2], 0.5, 1e-15);
  EXPECT_NEAR(r[1], 0.125, 1e-15);
  EXPECT_NEAR(r[0], 0.0, 1e-15);

  for (double q : {0.0, 0.3, 1.0}) {
    const auto two = mj::enumerate_day_kernel_row(1, 2, 0.7, q);
    EXPECT_NEAR(two[1], 1.0, 1e-15) << q;
  }
  const auto top = mj::enumerate_day_kernel_row(5, 5, 0.4, 0.2);
  EXPECT_EQ(top[5], 1.0);
}

TEST(DayKernel, Guards) {
  EXPECT_THROW(mj::enumerate_day_kernel_row(2, 8, 0.5, 0.3), std::invalid_argument);
  EXPECT_THROW(mj::enumerate_day_kernel_row(4, 3, 0.5, 0.3), std::invalid_argument);
  EXPECT_THROW(mj::enumerate_day_kernel_row(0, 0, 0.5, 0.3), std::invalid_argument);
  EXPECT_THROW(mj::exact_absorption(2, 4, 0.5, 0.3), std::invalid_argument);
}

TEST(DayKernel, RowsSumToOneAndMirror) {
  for (std::size_t n = 1; n <= 7; ++n) {
    for (auto [p, q] : {std::pair{0.5, 0.3}, std::pair{0.8, 0.3}, std::pair{0.3, 0.5}}) {
      const auto k = mj::build_kernel(n, p, q);
      EXPECT_EQ(k(0, 0), 1.0);
      EXPECT_EQ(k(n, n), 1.0);
      for (std::size_t j = 0; j <= n; ++j) {
        double s = 0;
        for (std::size_t t = 0; t <= n; ++t) {
          s += k(j, t);
          EXPECT_NEAR(k(j, t), k(n - j, n - t), 1e-14) << n << " " << j << " " << t;
        }
        EXPECT_NEAR(s, 1.0, 1e-12);
      }
    }
  }
}

TEST(DayLaw, JointFlipsAreConsistentWithCounts) {
  const auto law = mj::enumerate_day_law(3, 6, 0.6, 0.2);
  ASSERT_EQ(law.joint.size(), 4u);     // 0..3 possible -1 -> +1 flips
  ASSERT_EQ(law.joint[0].size(), 4u);  // 0..3 possible +1 -> -1 flips
  double total = 0;
  for (const auto& row : law.joint) {
    for (double v : row) total += v;
  }
  EXPECT_NEAR(total, 1.0, 1e-12);
  // Zero flips is part of, but generally smaller than, "no count change".
  const auto next = law.next_count();
  EXPECT_LE(law.no_flip(), next[3] + 1e-15);
}

// Independent day-1 oracle: explicit graph enumeration with GraphState and
// the library's majority step.
TEST(DayLaw, AgreesWithStepOverAllGraphs) {
  const std::size_t plus = 2, total = 5;
  const double p = 0.7, q = 0.2;
  const auto opinions = mj::OpinionVector::blocks(plus, total - plus);
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < total; ++i) {
    for (std::size_t j = i + 1; j < total; ++j) pairs.emplace_back(i, j);
  }
  std::vector<std::vector<double>> joint(total - plus + 1, std::vector<double>(plus + 1, 0.0));
  for (std::uint32_t mask = 0; mask < (1u << pairs.size()); ++mask) {
    mj::GraphState g(total);
    double w = 1;
    for (std::size_t e = 0; e < pairs.size(); ++e) {
      const bool on = (mask >> e) & 1u;
      const double pr = (opinions[pairs[e].first] == opinions[pairs[e].second]) ? p : q;
      w *= on ? pr : 1 - pr;
      if (on) g.set_edge(pairs[e].first, pairs[e].second, true);
    }
    mj::OpinionVector next;
    const auto c = mj::majority_step_into(g, opinions, next);
    joint[c.to_plus][c.to_minus] += w;
  }
  const auto law = mj::enumerate_day_law(plus, total, p, q);
  for (std::size_t a = 0; a < joint.size(); ++a) {
    for (std::size_t b = 0; b < joint[a].size(); ++b) EXPECT_NEAR(law.joint[a][b], joint[a][b], 1e-14);
  }
}

TEST(ExactAbsorption, Examples) {
  EXPECT_NEAR(mj::exact_absorption(1, 1, 0.5, 0.5).prob_plus_wins, 0.8, 1e-12);
  const auto all_plus = mj::exact_absorption(0, 5, 0.5, 0.3);
  EXPECT_TRUE(all_plus.absorbing_reachable);
  EXPECT_EQ(all_plus.prob_plus_wins, 1.0);
  const auto stuck = mj::exact_absorption(1, 0, 0.5, 0.3);
  EXPECT_FALSE(stuck.absorbing_reachable);
  EXPECT_TRUE(std::isnan(stuck.prob_plus_wins));
}

TEST(ExactAbsorption, SymmetricStartIsHalf) {
  for (auto [p, q] : {std::pair{0.5, 0.3}, std::pair{0.8, 0.5}}) {
    for (std::size_t n : {2, 3}) {
      const auto r = mj::exact_absorption(n, 0, p, q);
      ASSERT_TRUE(r.absorbing_reachable);
      EXPECT_NEAR(r.prob_plus_wins, 0.5, 1e-12);
    }
  }
}

TEST(ExactAbsorption, SatisfiesHarmonicEquation) {
  const auto k = mj::build_kernel(6, 0.5, 0.3);
  const auto h = mj::absorption_vector(k);
  for (std::size_t j = 1; j < 6; ++j) {
    double rhs = 0;
    for (std::size_t t = 0; t <= 6; ++t) rhs += k(j, t) * h[t];
    EXPECT_NEAR(h[j], rhs, 1e-12);
  }
}

TEST(ExactHaltDay1, Examples) {
  EXPECT_NEAR(mj::exact_halt_day1(1, 1, 0.5, 0.0), 1.0, 1e-15);
  EXPECT_NEAR(mj::exact_halt_day1(1, 1, 0.4, 0.5), 0.25, 1e-15);
  EXPECT_NEAR(mj::exact_halt_day1(1, 1, 0.0, 1.0), 0.0, 1e-15);
  EXPECT_THROW(mj::exact_halt_day1(0, 3, 0.5, 0.3), std::invalid_argument);
  EXPECT_THROW(mj::exact_halt_day1(3, 2, 0.5, 0.3), std::invalid_argument);
}

TEST(McAgreement, Examples) {
  EXPECT_TRUE(mj::mc_agreement(0.8, 100000, 0.8).pass);
  EXPECT_NEAR(mj::mc_agreement(0.8, 100000, 0.8).z_score, 0.0, 1e-12);
  EXPECT_FALSE(mj::mc_agreement(0.0, 100000, 0.8).pass);
  const auto a = mj::mc_agreement(0.81, 10000, 0.8);
  EXPECT_NEAR(a.z_score, 2.5, 1e-9);
  EXPECT_TRUE(a.pass);
  EXPECT_THROW(mj::mc_agreement(0.5, 99, 0.5), std::invalid_argument);
  EXPECT_TRUE(mj::mc_agreement(1.0, 1000, 1.0).pass);
  EXPECT_FALSE(mj::mc_agreement(0.999, 1000, 1.0).pass);
}

TEST(ExactAbsorption, MonteCarloSpotCheck) {
  const double p = 0.5, q = 0.3;
  const auto exact = mj::exact_absorption(2, 1, p, q);
  ASSERT_TRUE(exact.absorbing_reachable);
  const int reps = 20000;
  int wins = 0;
  for (int r = 0; r < reps; ++r) {
    mj::Xoshiro256 rng(mj::replicate_seed(3, static_cast<std::uint64_t>(r)));
    auto res = mj::run_dynamics(mj::ModelVariant::Markovian, 3, 2, mj::BlockParams(p, q), 100000, rng);
    wins += res.outcome.kind == mj::OutcomeKind::PlusWins;
  }
  const auto agree = mj::mc_agreement(static_cast<double>(wins) / reps, reps, exact.prob_plus_wins);
  EXPECT_TRUE(agree.pass) << agree.z_score;
}
