#include <gtest/gtest.h>

#include "bilevel/diagnostics.hpp"
#include "bilevel/registry.hpp"
#include "support/test_oracles.hpp"

namespace bilevel {
namespace {

Vec v1(double a) { return Vec::Constant(1, a); }
Vec vec(std::initializer_list<double> v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  std::copy(v.begin(), v.end(), out.data());
  return out;
}

OracleSolution qb_oracle() {
  OracleSolution o;
  o.problem = "QB";
  o.y_star = v1(0.5);
  o.x_star = vec({0.5, 0.5, 0.5, 0.5});
  o.beta_star = 4.0;
  o.alpha_star = 0.0;
  return o;
}

std::vector<GapRow> power_law(double c, double s, int n = 8) {
  std::vector<GapRow> rows;
  for (int k = 0; k < n; ++k) {
    const double e = 0.1 * std::pow(0.3, k);
    rows.push_back({e, c * std::pow(e, s)});
  }
  return rows;
}

TEST(Certificate, QuadBandMembership) {
  const BilevelProblem qb = registry_get("QB");
  const Certificate c = build_certificate(qb, qb_oracle());
  EXPECT_DOUBLE_EQ(c.sigma_star, 4.0);
  EXPECT_TRUE(c.membership_test(vec({0.25, 0.75, 0.75, 0.25})));  // sigma = 1, f = 4
  EXPECT_FALSE(c.membership_test(vec({2.0, 0.0, -1.0, 1.0})));   // outside C
  EXPECT_EQ(c.samples_checked, 1001);
}

TEST(Certificate, FlatSegmentMembershipIsOnlyTheSelectedEnd) {
  const BilevelProblem fs = registry_get("FS");
  const OracleSolution o = solve_three_level(fs);
  const Certificate c = build_certificate(fs, o);
  EXPECT_TRUE(c.valid());
  EXPECT_TRUE(c.membership_test(vec({0.0, 1.0})));
  EXPECT_FALSE(c.membership_test(vec({1e-3, 1.0 - 1e-3})));
  EXPECT_FALSE(c.membership_test(vec({1.0, 0.0})));
  EXPECT_FALSE(c.membership_test(vec({0.0, 1.5})));
}

TEST(Certificate, QuadBandDescriptionsDisagreeAwayFromTheBand) {
  // On QB, h + f <= 4 also admits points off the band: at z1 + z2 = 1/2,
  // h = 0.25 and f = 3. The sampler must report them rather than hide them.
  const BilevelProblem qb = registry_get("QB");
  const Certificate c = build_certificate(qb, qb_oracle(), 1e-6, 1000, 0);
  EXPECT_FALSE(c.valid());
  int off_band = 0;
  for (const auto& ce : c.counterexamples) {
    // h + f = sigma^2 + 3 on QB at y = 1/2, so every sample below the band
    // satisfies the summed bound.
    EXPECT_TRUE(ce.sum_form);
    EXPECT_LE(ce.h_value + ce.f_value, 4.0 + 1e-6);
    if (!ce.bounds_form) ++off_band;
  }
  EXPECT_GT(off_band, 100);
}

TEST(Certificate, RejectsMismatchedOracles) {
  OracleSolution o = qb_oracle();
  EXPECT_THROW(build_certificate(registry_get("FS"), o), Error);
  o.problem = "FS";
  EXPECT_THROW(build_certificate(registry_get("FS"), o), Error);
}

TEST(StrongSlope, Examples) {
  const BilevelProblem qb = registry_get("QB");
  const ScalarField lin(1, 2, [](const Vec&, const Vec& x) { return 2.0 * x(0) + x(1); },
                        [](const Vec&, const Vec&) { return vec({2.0, 1.0}); }, Structure::linear_in_x, true);
  const SlopeEstimate s = strong_slope_lower_bound(lin, v1(0.5), registry_get("FS").C());
  EXPECT_EQ(s.validity, SlopeValidity::exact_linear);
  EXPECT_DOUBLE_EQ(s.sigma_lower, std::sqrt(5.0));
  EXPECT_DOUBLE_EQ(s.gamma, 1.0 / std::sqrt(5.0));

  const SlopeEstimate zero = strong_slope_lower_bound(registry_get("FS").h(), v1(0.5), registry_get("FS").C());
  EXPECT_EQ(zero.sigma_lower, 0.0);
  EXPECT_EQ(zero.validity, SlopeValidity::unavailable);

  const SlopeEstimate band = strong_slope_lower_bound(qb.h(), v1(0.5), qb.C());
  EXPECT_EQ(band.validity, SlopeValidity::unavailable);
  EXPECT_NEAR(band.decay_exponent, 0.5, 0.05);  // |grad h| = 2 sqrt(h)
}

TEST(StrongSlope, SharpMinimumKeepsAPositiveBound) {
  // |z1 + z2 - 0.6| has gradient norm sqrt(2) everywhere off its kink, so a
  // sampled bound exists.
  const ScalarField sharp(1, 4, [](const Vec&, const Vec& x) { return std::abs(x(0) + x(1) - 0.6); },
                          [](const Vec&, const Vec& x) -> Vec {
                            const double s = x(0) + x(1) - 0.6 >= 0.0 ? 1.0 : -1.0;
                            return vec({s, s, 0, 0});
                          },
                          Structure::general, true);
  const SlopeEstimate s = strong_slope_lower_bound(sharp, v1(0.5), registry_get("QB").C());
  EXPECT_EQ(s.validity, SlopeValidity::sampled);
  EXPECT_NEAR(s.sigma_lower, std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(s.decay_exponent, 0.0, 1e-9);
}

TEST(StrongSlope, LinearBoundIsTranslationInvariant) {
  const ScalarField lin(1, 2, [](const Vec&, const Vec& x) { return -3.0 * x(0) + 0.5 * x(1); },
                        [](const Vec&, const Vec&) { return vec({-3.0, 0.5}); }, Structure::linear_in_x, true);
  const double base = strong_slope_lower_bound(lin, v1(0.0), registry_get("FS").C()).sigma_lower;
  for (double shift : {0.5, 3.0, 100.0}) {
    Mat A(1, 2);
    A << 1, 1;
    const Polytope moved(A, Vec::Constant(1, 1.0 + shift));
    EXPECT_NEAR(strong_slope_lower_bound(lin, v1(0.0), moved).sigma_lower, base, 1e-15);
  }
  EXPECT_NEAR(base, std::hypot(3.0, 0.5), 1e-15);
}

TEST(FitRate, QuadBandClosedFormGaps) {
  std::vector<GapRow> rows;
  for (int k = 0; k < 10; ++k) {
    const double e = 0.1 * std::pow(10.0, -3.0 * k / 9.0);
    rows.push_back({e, testing::qb_gap(e)});
  }
  const RateFit fit = fit_rate(rows);
  EXPECT_NEAR(fit.slope, 1.0, 0.05);
  EXPECT_TRUE(fit.meets_h1);
  EXPECT_TRUE(fit.meets_h2);
  EXPECT_EQ(fit.classification, RateClass::consistent_H1);
  EXPECT_EQ(fit.n_points, 10);
  // Without a positive slope bound the regime is only the weaker one.
  EXPECT_EQ(assess_regime(fit, SlopeEstimate{}), RateClass::consistent_H2);
  EXPECT_EQ(assess_regime(fit, SlopeEstimate{1.0, 1.0, SlopeValidity::sampled, 0.0}), RateClass::consistent_H1);
}

TEST(FitRate, ExactSelectionAndSquareRoot) {
  std::vector<GapRow> zeros;
  for (double e : {0.1, 0.01, 0.001}) zeros.push_back({e, 0.0});
  EXPECT_EQ(fit_rate(zeros).classification, RateClass::exact_selection);
  EXPECT_EQ(assess_regime(fit_rate(zeros), SlopeEstimate{}), RateClass::exact_selection);

  const RateFit half = fit_rate(power_law(1.0, 0.5));
  EXPECT_NEAR(half.slope, 0.5, 1e-6);
  EXPECT_EQ(half.classification, RateClass::consistent_H2);
  EXPECT_FALSE(half.meets_h1);

  EXPECT_EQ(fit_rate(power_law(1.0, 0.2)).classification, RateClass::inconclusive);
}

TEST(FitRate, RecoversPowerLawExponents) {
  for (double s : {0.5, 1.0, 2.0})
    for (double c : {0.01, 1.0, 30.0}) {
      const RateFit fit = fit_rate(power_law(c, s));
      EXPECT_NEAR(fit.slope, s, 1e-6) << s << ' ' << c;
      EXPECT_NEAR(fit.intercept, std::log(c), 1e-6);
      EXPECT_NEAR(fit.r_squared, 1.0, 1e-12);
    }
}

TEST(FitRate, Preconditions) {
  EXPECT_THROW(fit_rate(power_law(1.0, 1.0, 3)), Error);
  std::vector<GapRow> narrow;
  for (double e : {0.1, 0.08, 0.06, 0.04, 0.02}) narrow.push_back({e, e});
  EXPECT_THROW(fit_rate(narrow), Error);
}

}  // namespace
}  // namespace bilevel
