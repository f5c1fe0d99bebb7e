#include <gtest/gtest.h>

#include "bilevel/oracle.hpp"
#include "bilevel/registry.hpp"
#include "bilevel/upper_solver.hpp"
#include "support/test_oracles.hpp"

namespace bilevel {
namespace {

Vec v1(double a) { return Vec::Constant(1, a); }
const BoxSet kUnit(Vec::Zero(1), Vec::Ones(1));

TEST(PatternSearch, SmoothUnimodalMaximum) {
  UpperConfig cfg;
  const PatternResult r =
      pattern_search_maximize([](const Vec& y) { return 1.0 + 4.0 * y(0) * (1.0 - y(0)); }, kUnit, cfg, v1(0.1));
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.y(0), 0.5, 1e-5);
  EXPECT_NEAR(r.value, 2.0, 1e-9);
}

TEST(PatternSearch, ConstantFunctionKeepsTheStart) {
  UpperConfig cfg;
  const PatternResult r = pattern_search_maximize([](const Vec&) { return 1.0; }, kUnit, cfg, v1(0.8));
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.y(0), 0.8);
}

TEST(PatternSearch, NonsmoothApex) {
  UpperConfig cfg;
  for (double start : {0.0, 0.5, 0.77, 1.0}) {
    const PatternResult r =
        pattern_search_maximize([](const Vec& y) { return -std::abs(y(0) - 0.3); }, kUnit, cfg, v1(start));
    EXPECT_NEAR(r.y(0), 0.3, cfg.min_step) << start;
  }
}

TEST(PatternSearch, TwoDimensionalBoxAndBudget) {
  const BoxSet K(Vec::Constant(2, -1.0), Vec::Constant(2, 2.0));
  UpperConfig cfg;
  auto fn = [](const Vec& y) { return -(y(0) - 0.25) * (y(0) - 0.25) - 2.0 * (y(1) + 0.5) * (y(1) + 0.5); };
  const PatternResult r = pattern_search_maximize(fn, K, cfg);
  EXPECT_NEAR(r.y(0), 0.25, 1e-5);
  EXPECT_NEAR(r.y(1), -0.5, 1e-5);

  cfg.max_evals = 5;
  const PatternResult capped = pattern_search_maximize(fn, K, cfg);
  EXPECT_LE(capped.evals, 5);
  EXPECT_FALSE(capped.converged);
}

TEST(UpperConfig, Validation) {
  UpperConfig cfg;
  cfg.shrink = 1.0;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = {};
  cfg.n_multistarts = 0;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = {};
  cfg.initial_step = 1e-7;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = {};
  cfg.min_step = 0.0;
  EXPECT_THROW(cfg.validate(), Error);
}

TEST(UpperStarts, CenterFirstThenInsideTheBox) {
  const BoxSet K(Vec::Constant(2, -1.0), Vec::Constant(2, 3.0));
  const auto s = upper_starts(K, 10, 5);
  ASSERT_EQ(s.size(), 10u);
  EXPECT_EQ(s[0], K.center());
  for (const Vec& y : s) EXPECT_TRUE(K.contains(y));
  EXPECT_NE(upper_starts(K, 10, 6)[3], s[3]);
}

TEST(SolvePenalized, QuadBandClosedForm) {
  const BilevelProblem qb = registry_get("QB");
  const UpperConfig cfg;
  PenalizedSolution s = solve_penalized(qb, 0.1, Sign::pessimistic, cfg);
  EXPECT_NEAR(s.y(0), 0.5, 1e-4);
  EXPECT_NEAR(s.value, 4.0 / 1.4, 1e-4);
  EXPECT_TRUE(s.converged);
  s = solve_penalized(qb, 0.01, Sign::pessimistic, cfg);
  EXPECT_NEAR(s.value, 4.0 / 1.04, 1e-4);
}

TEST(SolvePenalized, FlatSegmentSelectionIsExact) {
  const PenalizedSolution s = solve_penalized(registry_get("FS"), 0.05, Sign::pessimistic, UpperConfig{});
  EXPECT_NEAR(s.y(0), 0.5, 1e-6);
  EXPECT_NEAR(s.value, 2.0, 1e-9);
  EXPECT_NEAR(s.selection.x(0), 0.0, 1e-12);
  EXPECT_NEAR(s.selection.x(1), 1.0, 1e-12);
}

TEST(SolvePenalized, OptimisticFlatSegment) {
  const PenalizedSolution s = solve_penalized(registry_get("FS"), 0.01, Sign::optimistic, UpperConfig{});
  EXPECT_NEAR(s.value, 3.0, 1e-3);
}

TEST(SolvePenalized, UpperSearchMatchesGoldenSection) {
  // Independent maximization of the closed-form v_eps(y) over K.
  const BilevelProblem qb = registry_get("QB");
  for (double eps : {0.3, 0.05}) {
    const double ystar = testing::golden_max(
        [eps](double y) { return testing::qb_v(eps, testing::qb_weight(y)); }, 0.0, 1.0);
    const PenalizedSolution s = solve_penalized(qb, eps, Sign::pessimistic, UpperConfig{});
    EXPECT_NEAR(s.value, testing::qb_v(eps, testing::qb_weight(ystar)), 1e-6) << eps;
  }
}

TEST(SolvePenalized, ValuesIncreaseAsEpsilonShrinksAndStayBelowTheLimit) {
  for (const char* name : {"QB", "FS"}) {
    const BilevelProblem p = registry_get(name);
    const OracleSolution o = solve_three_level(p, 1e-2);
    double prev = -std::numeric_limits<double>::infinity();
    for (double eps : {0.2, 0.1, 0.03, 0.01, 1e-3}) {
      const PenalizedSolution s = solve_penalized(p, eps, Sign::pessimistic, UpperConfig{});
      EXPECT_LE(prev, s.value + 2e-4) << name << ' ' << eps;
      EXPECT_LE(s.value, o.beta_star + 2e-4) << name << ' ' << eps;
      // Evaluating the selection at the three-level leader cannot beat the optimum.
      EXPECT_LE(upper_value(p, o.y_star, eps), s.value + 2e-4) << name << ' ' << eps;
      prev = s.value;
    }
  }
}

TEST(SolvePenalized, BitIdenticalForIdenticalSeeds) {
  const BilevelProblem qb = registry_get("QB");
  UpperConfig cfg;
  cfg.seed = 9;
  const PenalizedSolution a = solve_penalized(qb, 0.02, Sign::pessimistic, cfg);
  const PenalizedSolution b = solve_penalized(qb, 0.02, Sign::pessimistic, cfg);
  EXPECT_EQ(a.y, b.y);
  EXPECT_EQ(a.selection.x, b.selection.x);
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.evals, b.evals);
}

TEST(SolvePenalized, Preconditions) {
  EXPECT_THROW(solve_penalized(registry_get("QB"), 0.0, Sign::pessimistic, UpperConfig{}), Error);
  UpperConfig bad;
  bad.shrink = 0.0;
  EXPECT_THROW(solve_penalized(registry_get("QB"), 0.1, Sign::pessimistic, bad), Error);
}

}  // namespace
}  // namespace bilevel
