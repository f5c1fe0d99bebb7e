#include <gtest/gtest.h>

#include "bilevel/expression.hpp"
#include "bilevel/random.hpp"
#include "bilevel/validation.hpp"

namespace bilevel::expr {
namespace {

Vec vec(std::initializer_list<double> v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  std::copy(v.begin(), v.end(), out.data());
  return out;
}

double at(const std::string& text, const Vec& y, const Vec& x) {
  return Expression(text, static_cast<int>(y.size()), static_cast<int>(x.size()))(y, x);
}

TEST(Expression, PrecedenceAndAssociativity) {
  const Vec y = vec({2.0}), x = vec({3.0, -1.0});
  EXPECT_DOUBLE_EQ(at("1 + 2*3", y, x), 7.0);
  EXPECT_DOUBLE_EQ(at("(1 + 2)*3", y, x), 9.0);
  EXPECT_DOUBLE_EQ(at("8 - 3 - 2", y, x), 3.0);
  EXPECT_DOUBLE_EQ(at("8 / 4 / 2", y, x), 1.0);
  EXPECT_DOUBLE_EQ(at("2^3^2", y, x), 512.0);
  EXPECT_DOUBLE_EQ(at("-x[0]^2", y, x), -9.0);
  EXPECT_DOUBLE_EQ(at("2^-1", y, x), 0.5);
  EXPECT_DOUBLE_EQ(at("y[0]*x[0] + x[1]", y, x), 5.0);
  EXPECT_DOUBLE_EQ(at("1.5e1 + .5", y, x), 15.5);
  EXPECT_DOUBLE_EQ(at("  x[ 1 ]  ", y, x), -1.0);
}

TEST(Expression, RejectsMalformedInput) {
  for (const char* bad : {"", "1 +", "(1", "x[2]", "y[1]", "x[]", "x0", "2^x[0]", "1 2", "z[0]", "3 $ 4"}) {
    try {
      Expression(bad, 1, 2);
      ADD_FAILURE() << "accepted '" << bad << "'";
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::parse_error) << bad;
    }
  }
}

TEST(Expression, StructureFromDegree) {
  EXPECT_EQ(Expression("0", 1, 2).structure(), Structure::linear_in_x);
  EXPECT_EQ(Expression("y[0]^3 + 2*x[0]", 1, 2).structure(), Structure::linear_in_x);
  EXPECT_EQ(Expression("(x[0] + x[1] - 1)^2", 1, 2).structure(), Structure::quadratic_in_x);
  EXPECT_EQ(Expression("x[0]*x[1]*y[0]", 1, 2).structure(), Structure::quadratic_in_x);
  EXPECT_EQ(Expression("x[0]^3", 1, 2).structure(), Structure::general);
  EXPECT_EQ(Expression("1/x[0]", 1, 2).structure(), Structure::general);
  EXPECT_EQ(Expression("x[0]/(1 + y[0]^2)", 1, 2).structure(), Structure::linear_in_x);
  EXPECT_EQ(Expression("x[0]^0.5", 1, 2).degree(), kNonPolynomial);
}

TEST(Expression, GradientMatchesFiniteDifferences) {
  const std::vector<std::string> texts{
      "(1 + 4*y[0]*(1 - y[0]))*(1 + x[0] + x[1])", "(x[0] + x[1] - 1)^2", "x[0]^3 - 2*x[0]*x[1] + y[0]*x[1]^2",
      "x[0]/(1 + x[1]^2)", "(x[0] + 2)^0.5 * y[0]", "-(x[1] - y[0])^4 / 3"};
  Rng rng(7);
  for (const auto& text : texts) {
    const ScalarField field = Expression(text, 1, 2).to_field(false);
    for (int k = 0; k < 200; ++k) {
      const Vec y = uniform_in_box(rng, Vec::Zero(1), Vec::Ones(1));
      const Vec x = uniform_in_box(rng, Vec::Zero(2), Vec::Ones(2));
      EXPECT_LE(gradient_relative_error(field, y, x), 1e-6) << text;
    }
  }
}

TEST(Expression, HessianOfQuadratic) {
  const Expression e("(x[0] + x[1] - 1)^2 + 3*x[0]*x[1]", 1, 2);
  const Mat H = e.hessian(vec({0.3}), vec({0.1, 0.7}));
  EXPECT_DOUBLE_EQ(H(0, 0), 2.0);
  EXPECT_DOUBLE_EQ(H(0, 1), 5.0);
  EXPECT_DOUBLE_EQ(H(1, 0), 5.0);
  EXPECT_DOUBLE_EQ(H(1, 1), 2.0);
}

TEST(Expression, FieldKeepsSourceText) {
  const ScalarField f = Expression("x[0] + y[0]", 1, 1).to_field(true);
  EXPECT_EQ(f.expression(), "x[0] + y[0]");
  EXPECT_TRUE(f.convex_in_x());
  EXPECT_EQ(f.structure(), Structure::linear_in_x);
  EXPECT_DOUBLE_EQ(f(vec({1.0}), vec({2.0})), 3.0);
}

}  // namespace
}  // namespace bilevel::expr
