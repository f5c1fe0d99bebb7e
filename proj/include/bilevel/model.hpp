#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bilevel/polyhedral.hpp"
#include "bilevel/types.hpp"

namespace bilevel {

enum class Structure { linear_in_x, quadratic_in_x, general };

inline const char* to_string(Structure s) {
  switch (s) {
    case Structure::linear_in_x: return "linear_in_x";
    case Structure::quadratic_in_x: return "quadratic_in_x";
    case Structure::general: return "general";
  }
  return "unknown";
}

/// A smooth function (y, x) -> R with its x-gradient and declared structure.
class ScalarField {
 public:
  using EvalFn = std::function<double(const Vec& y, const Vec& x)>;
  using GradFn = std::function<Vec(const Vec& y, const Vec& x)>;

  ScalarField() = default;
  ScalarField(int dim_y, int dim_x, EvalFn eval, GradFn grad, Structure structure, bool convex_in_x,
              std::string expression = {})
      : dim_y_(dim_y),
        dim_x_(dim_x),
        eval_(std::move(eval)),
        grad_(std::move(grad)),
        structure_(structure),
        convex_in_x_(convex_in_x),
        expression_(std::move(expression)) {
    require(dim_y >= 0 && dim_x > 0, Errc::dimension_mismatch, "ScalarField: bad arity");
    require(static_cast<bool>(eval_) && static_cast<bool>(grad_), Errc::precondition,
            "ScalarField: evaluate and gradient_x are required");
  }

  double operator()(const Vec& y, const Vec& x) const { return eval_(y, x); }
  double evaluate(const Vec& y, const Vec& x) const { return eval_(y, x); }
  Vec gradient_x(const Vec& y, const Vec& x) const { return grad_(y, x); }

  int dim_y() const { return dim_y_; }
  int dim_x() const { return dim_x_; }
  Structure structure() const { return structure_; }
  bool convex_in_x() const { return convex_in_x_; }
  /// Source text in the problem-file expression grammar, empty if the field
  /// was built from code.
  const std::string& expression() const { return expression_; }

 private:
  int dim_y_ = 0;
  int dim_x_ = 0;
  EvalFn eval_;
  GradFn grad_;
  Structure structure_ = Structure::general;
  bool convex_in_x_ = false;
  std::string expression_;
};

/// Leader feasible set: an axis-aligned box.
class BoxSet {
 public:
  BoxSet() = default;
  BoxSet(Vec lower, Vec upper) : lower_(std::move(lower)), upper_(std::move(upper)) {
    require(lower_.size() == upper_.size(), Errc::dimension_mismatch, "BoxSet: bound sizes differ");
    require(lower_.allFinite() && upper_.allFinite(), Errc::invalid_box, "BoxSet: bounds must be finite");
    require((lower_.array() <= upper_.array()).all(), Errc::invalid_box, "BoxSet: lower > upper");
  }

  int dim() const { return static_cast<int>(lower_.size()); }
  const Vec& lower() const { return lower_; }
  const Vec& upper() const { return upper_; }
  Vec center() const { return 0.5 * (lower_ + upper_); }
  Vec width() const { return upper_ - lower_; }

  bool contains(const Vec& y, double tol = 0.0) const {
    return y.size() == lower_.size() && (y.array() >= lower_.array() - tol).all() &&
           (y.array() <= upper_.array() + tol).all();
  }
  Vec clip(const Vec& y) const { return y.cwiseMax(lower_).cwiseMin(upper_); }

 private:
  Vec lower_;
  Vec upper_;
};

/// Follower feasible set {x : Ax = b, x >= 0}, validated nonempty and bounded.
class Polytope {
 public:
  static constexpr int kMaxEnumerationDim = 12;

  Polytope() = default;
  Polytope(Mat A, Vec b) : A_(std::move(A)), b_(std::move(b)) {
    require(A_.rows() == b_.size(), Errc::dimension_mismatch, "Polytope: A rows != b size");
    require(A_.cols() > 0, Errc::dimension_mismatch, "Polytope: zero columns");
    // Since x >= 0, the set is bounded iff sum(x) is bounded above.
    const LpSolution sol = simplex_minimize(A_, b_, -Vec::Ones(A_.cols()));
    require(sol.status != LpStatus::infeasible, Errc::empty_polytope, "Polytope: {Ax=b, x>=0} is empty");
    require(sol.status != LpStatus::unbounded, Errc::unbounded_polytope, "Polytope: feasible set is unbounded");
    if (A_.cols() <= kMaxEnumerationDim)
      vertices_ = std::make_shared<const std::vector<Vec>>(enumerate_basic_feasible(A_, b_));
  }

  int dim() const { return static_cast<int>(A_.cols()); }
  int rows() const { return static_cast<int>(A_.rows()); }
  const Mat& A() const { return A_; }
  const Vec& b() const { return b_; }

  bool has_vertices() const { return static_cast<bool>(vertices_); }
  /// Cached vertex list; empty when the dimension exceeds the enumeration guard.
  const std::vector<Vec>& cached_vertices() const {
    static const std::vector<Vec> none;
    return vertices_ ? *vertices_ : none;
  }

  double violation(const Vec& x) const {
    if (x.size() != A_.cols()) return std::numeric_limits<double>::infinity();
    double v = std::max(0.0, -x.minCoeff());
    if (A_.rows() > 0) v = std::max(v, (A_ * x - b_).cwiseAbs().maxCoeff());
    return v;
  }
  bool contains(const Vec& x, double tol = kFeasTol) const { return violation(x) <= tol; }

 private:
  Mat A_;
  Vec b_;
  std::shared_ptr<const std::vector<Vec>> vertices_;
};

/// max f(y, x) over y in K, x in argmin { h(y, z) : z in C }.
class BilevelProblem {
 public:
  BilevelProblem(std::string name, ScalarField f, ScalarField h, BoxSet K, Polytope C)
      : name_(std::move(name)), f_(std::move(f)), h_(std::move(h)), K_(std::move(K)), C_(std::move(C)) {
    require(f_.dim_y() == h_.dim_y() && f_.dim_y() == K_.dim(), Errc::dimension_mismatch,
            "BilevelProblem: f, h and K disagree on dim_y");
    require(f_.dim_x() == h_.dim_x() && f_.dim_x() == C_.dim(), Errc::dimension_mismatch,
            "BilevelProblem: f, h and C disagree on dim_x");
    require(h_.convex_in_x(), Errc::precondition, "BilevelProblem: h must be declared convex in x");
  }

  const std::string& name() const { return name_; }
  const ScalarField& f() const { return f_; }
  const ScalarField& h() const { return h_; }
  const BoxSet& K() const { return K_; }
  const Polytope& C() const { return C_; }
  int dim_y() const { return K_.dim(); }
  int dim_x() const { return C_.dim(); }

  BilevelProblem with_f(ScalarField f) const { return {name_, std::move(f), h_, K_, C_}; }
  BilevelProblem with_h(ScalarField h) const { return {name_, f_, std::move(h), K_, C_}; }
  BilevelProblem with_K(BoxSet K) const { return {name_, f_, h_, std::move(K), C_}; }

 private:
  std::string name_;
  ScalarField f_;
  ScalarField h_;
  BoxSet K_;
  Polytope C_;
};

/// (max{f - f(y0, x0), 0})^2: nonnegative, zero at the anchor, maximized where
/// f is.
inline ScalarField shift_objective(const ScalarField& f, const Vec& y0, const Vec& x0) {
  require(y0.size() == f.dim_y() && x0.size() == f.dim_x(), Errc::dimension_mismatch,
          "shift_objective: anchor dimension mismatch");
  const double f0 = f(y0, x0);
  auto eval = [f, f0](const Vec& y, const Vec& x) {
    const double d = std::max(f(y, x) - f0, 0.0);
    return d * d;
  };
  auto grad = [f, f0](const Vec& y, const Vec& x) -> Vec {
    const double d = std::max(f(y, x) - f0, 0.0);
    if (d == 0.0) return Vec::Zero(x.size());
    return 2.0 * d * f.gradient_x(y, x);
  };
  return {f.dim_y(), f.dim_x(), eval, grad, Structure::general, f.convex_in_x()};
}

}  // namespace bilevel
