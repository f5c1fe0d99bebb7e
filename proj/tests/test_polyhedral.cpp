#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "bilevel/polyhedral.hpp"
#include "bilevel/random.hpp"

namespace bilevel {
namespace {

Mat mat(int m, int n, std::initializer_list<double> v) {
  Mat A(m, n);
  auto it = v.begin();
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) A(i, j) = *it++;
  return A;
}

Vec vec(std::initializer_list<double> v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  std::copy(v.begin(), v.end(), out.data());
  return out;
}

TEST(Simplex, TextbookMaximizationInStandardForm) {
  // max 3a + 5b s.t. a <= 4, 2b <= 12, 3a + 2b <= 18 with slacks; optimum (2, 6), value 36.
  const Mat A = mat(3, 5, {1, 0, 1, 0, 0, 0, 2, 0, 1, 0, 3, 2, 0, 0, 1});
  const Vec b = vec({4, 12, 18});
  const Vec c = vec({-3, -5, 0, 0, 0});
  const LpSolution s = simplex_minimize(A, b, c);
  ASSERT_EQ(s.status, LpStatus::optimal);
  EXPECT_NEAR(s.value, -36.0, 1e-12);
  EXPECT_NEAR(s.x(0), 2.0, 1e-12);
  EXPECT_NEAR(s.x(1), 6.0, 1e-12);
  EXPECT_LE((A * s.x - b).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Simplex, DetectsInfeasibility) {
  const LpSolution s = simplex_minimize(mat(2, 2, {1, 1, 1, 1}), vec({1, 2}), vec({0, 0}));
  EXPECT_EQ(s.status, LpStatus::infeasible);
}

TEST(Simplex, DetectsUnboundedness) {
  // x0 - x1 = 0 has the ray (1, 1); minimizing -x0 runs along it.
  const LpSolution s = simplex_minimize(mat(1, 2, {1, -1}), vec({0}), vec({-1, 0}));
  EXPECT_EQ(s.status, LpStatus::unbounded);
}

TEST(Simplex, NegativeRightHandSideIsNormalized) {
  const LpSolution s = simplex_minimize(mat(1, 2, {-1, -1}), vec({-1}), vec({1, 2}));
  ASSERT_EQ(s.status, LpStatus::optimal);
  EXPECT_NEAR(s.value, 1.0, 1e-12);
  EXPECT_NEAR(s.x(0), 1.0, 1e-12);
}

TEST(Simplex, RedundantRowsAreHarmless) {
  const Mat A = mat(3, 3, {1, 1, 1, 2, 2, 2, 1, 0, 0});
  const Vec b = vec({1, 2, 0.25});
  const LpSolution s = simplex_minimize(A, b, vec({0, 1, 2}));
  ASSERT_EQ(s.status, LpStatus::optimal);
  EXPECT_NEAR(s.value, 0.75, 1e-12);
  EXPECT_NEAR(s.x(1), 0.75, 1e-12);
}

TEST(Simplex, BealeCyclingExampleTerminates) {
  // Classic degenerate instance that cycles under Dantzig's rule.
  const Mat A = mat(3, 7, {0.25, -8, -1, 9, 1, 0, 0,  //
                           0.5, -12, -0.5, 3, 0, 1, 0,  //
                           0, 0, 1, 0, 0, 0, 1});
  const Vec b = vec({0, 0, 1});
  const Vec c = vec({-0.75, 20, -0.5, 6, 0, 0, 0});
  const LpSolution s = simplex_minimize(A, b, c);
  ASSERT_EQ(s.status, LpStatus::optimal);
  EXPECT_NEAR(s.value, -1.25, 1e-12);
}

TEST(Simplex, EmptyConstraintSetMeansNonnegativeOrthant) {
  const LpSolution s = simplex_minimize(Mat(0, 2), Vec(0), vec({1, 3}));
  ASSERT_EQ(s.status, LpStatus::optimal);
  EXPECT_DOUBLE_EQ(s.value, 0.0);
}

TEST(Simplex, RowPermutationLeavesTheOptimumUnchanged) {
  Rng rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    const int m = 3, n = 6;
    Mat A(m, n);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) A(i, j) = uniform(rng, 0.1, 1.0);
    const Vec x0 = uniform_in_box(rng, Vec::Zero(n), Vec::Ones(n));
    const Vec b = A * x0;
    const Vec c = uniform_in_box(rng, Vec::Constant(n, -1.0), Vec::Ones(n));
    const LpSolution base = simplex_minimize(A, b, c);
    ASSERT_EQ(base.status, LpStatus::optimal);
    std::vector<int> perm(m);
    std::iota(perm.begin(), perm.end(), 0);
    while (std::next_permutation(perm.begin(), perm.end())) {
      Mat Ap(m, n);
      Vec bp(m);
      for (int i = 0; i < m; ++i) {
        Ap.row(i) = A.row(perm[i]);
        bp(i) = b(perm[i]);
      }
      const LpSolution s = simplex_minimize(Ap, bp, c);
      ASSERT_EQ(s.status, LpStatus::optimal);
      EXPECT_NEAR(s.value, base.value, 1e-10);
    }
  }
}

TEST(BasicSolutions, UnitSimplexHasItsCornersAsVertices) {
  const auto vs = enumerate_basic_feasible(mat(1, 3, {1, 1, 1}), vec({1}));
  ASSERT_EQ(vs.size(), 3u);
  for (const Vec& v : vs) {
    EXPECT_NEAR(v.sum(), 1.0, 1e-12);
    EXPECT_NEAR(v.maxCoeff(), 1.0, 1e-12);
  }
}

TEST(BasicSolutions, DegenerateVerticesAreDeduplicated) {
  // Square [0,1]^2 with slacks plus a redundant diagonal cut through a corner.
  const Mat A = mat(3, 5, {1, 0, 1, 0, 0, 0, 1, 0, 1, 0, 1, 1, 0, 0, 1});
  const auto vs = enumerate_basic_feasible(A, vec({1, 1, 2}));
  EXPECT_EQ(vs.size(), 4u);
}

TEST(BasicSolutions, VertexMinimumMatchesSimplex) {
  Rng rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    Mat A(2, 5);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 5; ++j) A(i, j) = uniform(rng, 0.1, 1.0);
    const Vec b = A * uniform_in_box(rng, Vec::Zero(5), Vec::Ones(5));
    const Vec c = uniform_in_box(rng, Vec::Constant(5, -1.0), Vec::Ones(5));
    const auto vs = enumerate_basic_feasible(A, b);
    double best = std::numeric_limits<double>::infinity();
    for (const Vec& v : vs) best = std::min(best, c.dot(v));
    EXPECT_NEAR(simplex_minimize(A, b, c).value, best, 1e-10);
  }
}

TEST(IndependentRows, DropsDependentRows) {
  const auto rows = independent_rows(mat(3, 3, {1, 1, 1, 2, 2, 2, 1, 0, 0}));
  EXPECT_EQ(rows.size(), 2u);
}

}  // namespace
}  // namespace bilevel
