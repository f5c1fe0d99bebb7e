#pragma once

// Arithmetic expressions over y[i] and x[j] with + - * / ^ and parentheses,
// plus symbolic differentiation in x. Exponents must be constant.

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "bilevel/model.hpp"
#include "bilevel/types.hpp"

namespace bilevel::expr {

struct Node;
using NodePtr = std::shared_ptr<const Node>;

enum class Op { constant, var_y, var_x, add, sub, mul, div, neg, pow };

struct Node {
  Op op;
  double value = 0.0;  // constant value, or the exponent for pow
  int index = 0;       // variable index
  NodePtr lhs, rhs;
};

inline NodePtr constant(double v) { return std::make_shared<const Node>(Node{Op::constant, v, 0, nullptr, nullptr}); }
inline NodePtr var_y(int i) { return std::make_shared<const Node>(Node{Op::var_y, 0.0, i, nullptr, nullptr}); }
inline NodePtr var_x(int j) { return std::make_shared<const Node>(Node{Op::var_x, 0.0, j, nullptr, nullptr}); }

inline bool is_const(const NodePtr& n, double v) { return n->op == Op::constant && n->value == v; }
inline bool is_const(const NodePtr& n) { return n->op == Op::constant; }

// Constructors below fold constants and drop 0/1 identities so that
// derivative trees stay small.
inline NodePtr add(NodePtr a, NodePtr b) {
  if (is_const(a) && is_const(b)) return constant(a->value + b->value);
  if (is_const(a, 0.0)) return b;
  if (is_const(b, 0.0)) return a;
  return std::make_shared<const Node>(Node{Op::add, 0.0, 0, std::move(a), std::move(b)});
}
inline NodePtr neg(NodePtr a) {
  if (is_const(a)) return constant(-a->value);
  if (a->op == Op::neg) return a->lhs;
  return std::make_shared<const Node>(Node{Op::neg, 0.0, 0, std::move(a), nullptr});
}
inline NodePtr sub(NodePtr a, NodePtr b) {
  if (is_const(a) && is_const(b)) return constant(a->value - b->value);
  if (is_const(b, 0.0)) return a;
  if (is_const(a, 0.0)) return neg(std::move(b));
  return std::make_shared<const Node>(Node{Op::sub, 0.0, 0, std::move(a), std::move(b)});
}
inline NodePtr mul(NodePtr a, NodePtr b) {
  if (is_const(a) && is_const(b)) return constant(a->value * b->value);
  if (is_const(a, 0.0) || is_const(b, 0.0)) return constant(0.0);
  if (is_const(a, 1.0)) return b;
  if (is_const(b, 1.0)) return a;
  return std::make_shared<const Node>(Node{Op::mul, 0.0, 0, std::move(a), std::move(b)});
}
inline NodePtr div(NodePtr a, NodePtr b) {
  if (is_const(a) && is_const(b)) return constant(a->value / b->value);
  if (is_const(a, 0.0)) return constant(0.0);
  if (is_const(b, 1.0)) return a;
  return std::make_shared<const Node>(Node{Op::div, 0.0, 0, std::move(a), std::move(b)});
}
inline NodePtr pow(NodePtr a, double c) {
  if (c == 0.0) return constant(1.0);
  if (c == 1.0) return a;
  if (is_const(a)) return constant(std::pow(a->value, c));
  return std::make_shared<const Node>(Node{Op::pow, c, 0, std::move(a), nullptr});
}

inline double eval(const Node& n, const Vec& y, const Vec& x) {
  switch (n.op) {
    case Op::constant: return n.value;
    case Op::var_y: return y(n.index);
    case Op::var_x: return x(n.index);
    case Op::add: return eval(*n.lhs, y, x) + eval(*n.rhs, y, x);
    case Op::sub: return eval(*n.lhs, y, x) - eval(*n.rhs, y, x);
    case Op::mul: return eval(*n.lhs, y, x) * eval(*n.rhs, y, x);
    case Op::div: return eval(*n.lhs, y, x) / eval(*n.rhs, y, x);
    case Op::neg: return -eval(*n.lhs, y, x);
    case Op::pow: {
      const double b = eval(*n.lhs, y, x);
      if (n.value == 2.0) return b * b;
      return std::pow(b, n.value);
    }
  }
  return 0.0;
}

/// d/dx_j of n.
inline NodePtr derivative(const NodePtr& n, int j) {
  switch (n->op) {
    case Op::constant:
    case Op::var_y: return constant(0.0);
    case Op::var_x: return constant(n->index == j ? 1.0 : 0.0);
    case Op::add: return add(derivative(n->lhs, j), derivative(n->rhs, j));
    case Op::sub: return sub(derivative(n->lhs, j), derivative(n->rhs, j));
    case Op::neg: return neg(derivative(n->lhs, j));
    case Op::mul:
      return add(mul(derivative(n->lhs, j), n->rhs), mul(n->lhs, derivative(n->rhs, j)));
    case Op::div: {
      const NodePtr num = sub(mul(derivative(n->lhs, j), n->rhs), mul(n->lhs, derivative(n->rhs, j)));
      return div(num, pow(n->rhs, 2.0));
    }
    case Op::pow:
      return mul(mul(constant(n->value), pow(n->lhs, n->value - 1.0)), derivative(n->lhs, j));
  }
  return constant(0.0);
}

inline constexpr int kNonPolynomial = -1;

/// Polynomial degree in x, or kNonPolynomial.
inline int degree_in_x(const Node& n) {
  switch (n.op) {
    case Op::constant:
    case Op::var_y: return 0;
    case Op::var_x: return 1;
    case Op::neg: return degree_in_x(*n.lhs);
    case Op::add:
    case Op::sub: {
      const int a = degree_in_x(*n.lhs), b = degree_in_x(*n.rhs);
      return (a < 0 || b < 0) ? kNonPolynomial : std::max(a, b);
    }
    case Op::mul: {
      const int a = degree_in_x(*n.lhs), b = degree_in_x(*n.rhs);
      return (a < 0 || b < 0) ? kNonPolynomial : a + b;
    }
    case Op::div: {
      const int a = degree_in_x(*n.lhs), b = degree_in_x(*n.rhs);
      return (a < 0 || b != 0) ? kNonPolynomial : a;
    }
    case Op::pow: {
      const int a = degree_in_x(*n.lhs);
      if (a == 0) return 0;
      if (a < 0 || n.value < 0.0 || n.value != std::floor(n.value)) return kNonPolynomial;
      return a * static_cast<int>(n.value);
    }
  }
  return kNonPolynomial;
}

inline bool has_variables(const Node& n) {
  if (n.op == Op::var_x || n.op == Op::var_y) return true;
  if (n.lhs && has_variables(*n.lhs)) return true;
  if (n.rhs && has_variables(*n.rhs)) return true;
  return false;
}

class Parser {
 public:
  Parser(std::string text, int dim_y, int dim_x) : text_(std::move(text)), dim_y_(dim_y), dim_x_(dim_x) {}

  NodePtr parse() {
    NodePtr n = expression();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return n;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw Error(Errc::parse_error, "expression '" + text_ + "' at " + std::to_string(pos_) + ": " + msg);
  }
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  NodePtr expression() {
    NodePtr n = term();
    for (;;) {
      if (accept('+')) {
        n = add(n, term());
      } else if (accept('-')) {
        n = sub(n, term());
      } else {
        return n;
      }
    }
  }
  NodePtr term() {
    NodePtr n = unary();
    for (;;) {
      if (accept('*')) {
        n = mul(n, unary());
      } else if (accept('/')) {
        n = div(n, unary());
      } else {
        return n;
      }
    }
  }
  NodePtr unary() {
    if (accept('-')) return neg(unary());
    if (accept('+')) return unary();
    return power();
  }
  NodePtr power() {
    NodePtr base = primary();
    if (accept('^')) {
      const NodePtr e = unary();
      if (has_variables(*e)) fail("exponent must be a constant");
      return pow(base, eval(*e, Vec(), Vec()));
    }
    return base;
  }
  NodePtr primary() {
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr n = expression();
      expect(')');
      return n;
    }
    if (c == 'x' || c == 'y') {
      ++pos_;
      expect('[');
      skip_ws();
      const std::size_t start = pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      if (start == pos_) fail("expected an index");
      const int idx = std::stoi(text_.substr(start, pos_ - start));
      expect(']');
      const int limit = c == 'x' ? dim_x_ : dim_y_;
      if (idx >= limit) fail(std::string(1, c) + "[" + std::to_string(idx) + "] out of range");
      return c == 'x' ? var_x(idx) : var_y(idx);
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = text_.c_str() + pos_;
      char* end = nullptr;
      const double v = std::strtod(begin, &end);
      if (end == begin) fail("bad number");
      pos_ += static_cast<std::size_t>(end - begin);
      return constant(v);
    }
    fail(std::string("unexpected '") + c + "'");
  }

  std::string text_;
  int dim_y_, dim_x_;
  std::size_t pos_ = 0;
};

/// A parsed expression together with its x-gradient trees.
class Expression {
 public:
  Expression(std::string text, int dim_y, int dim_x)
      : text_(std::move(text)), dim_y_(dim_y), dim_x_(dim_x), root_(Parser(text_, dim_y, dim_x).parse()) {
    for (int j = 0; j < dim_x; ++j) grad_.push_back(derivative(root_, j));
  }

  double operator()(const Vec& y, const Vec& x) const { return eval(*root_, y, x); }

  Vec gradient(const Vec& y, const Vec& x) const {
    Vec g(dim_x_);
    for (int j = 0; j < dim_x_; ++j) g(j) = eval(*grad_[static_cast<std::size_t>(j)], y, x);
    return g;
  }

  /// Second derivatives in x; constant in x for quadratic expressions.
  Mat hessian(const Vec& y, const Vec& x) const {
    Mat H(dim_x_, dim_x_);
    for (int i = 0; i < dim_x_; ++i)
      for (int j = 0; j < dim_x_; ++j) H(i, j) = eval(*derivative(grad_[static_cast<std::size_t>(i)], j), y, x);
    return H;
  }

  int degree() const { return degree_in_x(*root_); }

  Structure structure() const {
    const int d = degree();
    if (d == 0 || d == 1) return Structure::linear_in_x;
    if (d == 2) return Structure::quadratic_in_x;
    return Structure::general;
  }

  const std::string& text() const { return text_; }
  int dim_y() const { return dim_y_; }
  int dim_x() const { return dim_x_; }

  ScalarField to_field(bool convex_in_x) const {
    auto self = std::make_shared<const Expression>(*this);
    return {dim_y_, dim_x_, [self](const Vec& y, const Vec& x) { return (*self)(y, x); },
            [self](const Vec& y, const Vec& x) { return self->gradient(y, x); }, structure(), convex_in_x, text_};
  }

 private:
  std::string text_;
  int dim_y_, dim_x_;
  NodePtr root_;
  std::vector<NodePtr> grad_;
};

}  // namespace bilevel::expr
