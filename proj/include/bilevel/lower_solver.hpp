#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "bilevel/model.hpp"
#include "bilevel/polyhedral.hpp"
#include "bilevel/random.hpp"

namespace bilevel {

/// Vertex minimizer of <c, x> over C.
inline LpSolution lp_minimize(const Vec& c, const Polytope& C) {
  require(c.size() == C.dim(), Errc::dimension_mismatch, "lp_minimize: cost dimension mismatch");
  LpSolution sol = simplex_minimize(C.A(), C.b(), c);
  require(sol.status != LpStatus::infeasible, Errc::infeasible, "lp_minimize: polytope is infeasible");
  return sol;
}

inline std::vector<Vec> enumerate_vertices(const Polytope& C) {
  require(C.dim() <= Polytope::kMaxEnumerationDim, Errc::guard,
          "enumerate_vertices: dimension " + std::to_string(C.dim()) + " exceeds guard " +
              std::to_string(Polytope::kMaxEnumerationDim));
  if (C.has_vertices()) return C.cached_vertices();
  return enumerate_basic_feasible(C.A(), C.b());
}

/// Nearest point of C in the l1 norm, found with one LP:
///   min sum(u + w)  s.t.  Ax = b,  x - u + w = start,  x, u, w >= 0.
inline Vec project_to_polytope(const Polytope& C, const Vec& start) {
  require(start.size() == C.dim(), Errc::dimension_mismatch, "project_to_polytope: dimension mismatch");
  if (C.contains(start)) return start;
  const Eigen::Index n = C.dim(), m = C.rows();
  Mat A = Mat::Zero(m + n, 3 * n);
  A.topLeftCorner(m, n) = C.A();
  A.block(m, 0, n, n).setIdentity();
  A.block(m, n, n, n) = -Mat::Identity(n, n);
  A.block(m, 2 * n, n, n).setIdentity();
  Vec b(m + n);
  b << C.b(), start;
  Vec c = Vec::Zero(3 * n);
  c.tail(2 * n).setOnes();
  const LpSolution sol = simplex_minimize(A, b, c);
  require(sol.status == LpStatus::optimal, Errc::infeasible, "project_to_polytope: LP failed");
  Vec x = sol.x.head(n);
  detail::clean_small_negatives(x);
  return x;
}

/// Random point of C: a flat-Dirichlet combination of vertices (cached ones,
/// or vertices hit by random linear objectives when none are cached).
inline Vec sample_point(const Polytope& C, Rng& rng) {
  if (C.has_vertices()) {
    const auto& vs = C.cached_vertices();
    const Vec w = dirichlet_weights(rng, static_cast<Eigen::Index>(vs.size()));
    Vec x = Vec::Zero(C.dim());
    for (std::size_t i = 0; i < vs.size(); ++i) x += w(static_cast<Eigen::Index>(i)) * vs[i];
    return x;
  }
  const int k = C.dim() + 1;
  Vec x = Vec::Zero(C.dim());
  const Vec w = dirichlet_weights(rng, k);
  for (int i = 0; i < k; ++i) {
    Vec c(C.dim());
    for (Eigen::Index j = 0; j < c.size(); ++j) c(j) = standard_normal(rng);
    x += w(i) * lp_minimize(c, C).x;
  }
  return x;
}

struct FwSolution {
  Vec x;
  double value = 0.0;
  double fw_gap = std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;  // fw_gap <= tol
};

enum class LineSearch { exact_quadratic, armijo };

namespace detail {

inline double quadratic_step(double q0, double slope0, double q1) {
  const double curv = q1 - q0 - slope0;
  if (curv > 0.0) return std::clamp(-slope0 / (2.0 * curv), 0.0, 1.0);
  return q1 < q0 ? 1.0 : 0.0;
}

template <class Value>
double armijo_step(const Value& value, const Vec& x, const Vec& d, double q0, double slope0) {
  constexpr double c1 = 1e-4;
  double step = 1.0;
  for (int k = 0; k < 60; ++k, step *= 0.5) {
    if (value(x + step * d) <= q0 + c1 * step * slope0) return step;
  }
  return 0.0;
}

}  // namespace detail

/// Frank-Wolfe with away steps. `lmo(grad)` returns a vertex minimizing
/// <grad, v>; the gap <grad, x - v> bounds suboptimality for convex objectives.
/// The iterate is kept as a convex combination of atoms (the start point plus
/// every vertex the LMO returned), which lets the method step away from atoms
/// instead of zigzagging toward an optimal face.
template <class Value, class Gradient, class Lmo>
FwSolution frank_wolfe(const Value& value, const Gradient& gradient, const Lmo& lmo, Vec x,
                       LineSearch search, double tol, int max_iter) {
  require(tol > 0.0, Errc::precondition, "frank_wolfe: tol must be positive");
  struct Atom {
    Vec point;
    double weight;
  };
  std::vector<Atom> active{{x, 1.0}};
  constexpr double kDropWeight = 1e-14;

  FwSolution out;
  double fx = value(x);
  int it = 0;
  double gap = std::numeric_limits<double>::infinity();
  for (;; ++it) {
    const Vec g = gradient(x);
    const Vec s = lmo(g);
    gap = g.dot(x - s);
    if (gap <= tol || it >= max_iter) break;

    std::size_t away = 0;
    double away_score = g.dot(active[0].point);
    for (std::size_t i = 1; i < active.size(); ++i) {
      const double score = g.dot(active[i].point);
      if (score > away_score) {
        away_score = score;
        away = i;
      }
    }
    const double away_gap = away_score - g.dot(x);

    const bool fw_step = gap >= away_gap || active.size() == 1;
    Vec d;
    double max_step;
    if (fw_step) {
      d = s - x;
      max_step = 1.0;
    } else {
      const double a = active[away].weight;
      d = x - active[away].point;
      max_step = a / (1.0 - a);
    }
    const double slope = g.dot(d);
    if (!(slope < 0.0)) break;

    double step;
    const Vec far = x + max_step * d;
    if (search == LineSearch::exact_quadratic) {
      // Rescale to t = step / max_step in [0, 1].
      step = max_step * detail::quadratic_step(fx, slope * max_step, value(far));
    } else {
      step = max_step * detail::armijo_step(value, x, Vec(max_step * d), fx, slope * max_step);
    }
    if (step <= 0.0) break;  // no representable decrease left

    Vec next = step == max_step ? far : Vec(x + step * d);
    const double fnext = value(next);
    if (fnext > fx) break;

    if (fw_step) {
      for (auto& atom : active) atom.weight *= (1.0 - step);
      auto hit = std::find_if(active.begin(), active.end(), [&](const Atom& a) { return a.point == s; });
      if (hit != active.end()) {
        hit->weight += step;
      } else {
        active.push_back({s, step});
      }
    } else {
      for (auto& atom : active) atom.weight *= (1.0 + step);
      active[away].weight -= step;
      if (step == max_step) active[away].weight = 0.0;
    }
    std::erase_if(active, [](const Atom& a) { return a.weight <= kDropWeight; });
    if (active.empty()) active.push_back({next, 1.0});
    x = std::move(next);
    fx = fnext;
  }
  out.x = std::move(x);
  out.value = fx;
  out.fw_gap = std::max(gap, 0.0);
  out.iterations = it;
  out.converged = gap <= tol;
  return out;
}

/// LMO over C: scans the cached vertex list when available, else solves the LP.
inline auto polytope_lmo(const Polytope& C) {
  return [&C](const Vec& g) -> Vec {
    if (!C.has_vertices()) return lp_minimize(g, C).x;
    const auto& vs = C.cached_vertices();
    std::size_t best = 0;
    double best_val = g.dot(vs[0]);
    for (std::size_t i = 1; i < vs.size(); ++i) {
      const double val = g.dot(vs[i]);
      if (val < best_val) {
        best_val = val;
        best = i;
      }
    }
    return vs[best];
  };
}

inline LineSearch line_search_for(Structure s) {
  return s == Structure::general ? LineSearch::armijo : LineSearch::exact_quadratic;
}

/// Minimizes g(y, .) over C. Starts are projected onto C when infeasible.
inline FwSolution frank_wolfe_minimize(const ScalarField& g, const Vec& y, const Polytope& C, double tol,
                                       int max_iter, const std::optional<Vec>& start = std::nullopt) {
  require(g.dim_x() == C.dim() && y.size() == g.dim_y(), Errc::dimension_mismatch,
          "frank_wolfe_minimize: dimension mismatch");
  Vec x0 = start ? project_to_polytope(C, *start) : lp_minimize(Vec::Zero(C.dim()), C).x;
  auto value = [&](const Vec& x) { return g(y, x); };
  auto gradient = [&](const Vec& x) { return g.gradient_x(y, x); };
  return frank_wolfe(value, gradient, polytope_lmo(C), std::move(x0), line_search_for(g.structure()), tol,
                     max_iter);
}

}  // namespace bilevel
