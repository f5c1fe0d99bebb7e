#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "bilevel/lower_solver.hpp"
#include "bilevel/model.hpp"
#include "bilevel/random.hpp"

namespace bilevel {

/// h + sign * eps * f^2, the lower-level objective of the penalized problem.
inline ScalarField penalized_field(const BilevelProblem& p, double epsilon, Sign sign) {
  require(epsilon > 0.0, Errc::precondition, "penalized_field: epsilon must be positive");
  const double coef = sign_value(sign) * epsilon;
  const ScalarField f = p.f();
  const ScalarField h = p.h();
  auto eval = [f, h, coef](const Vec& y, const Vec& x) {
    const double fv = f(y, x);
    return h(y, x) + coef * fv * fv;
  };
  auto grad = [f, h, coef](const Vec& y, const Vec& x) -> Vec {
    return h.gradient_x(y, x) + (2.0 * coef * f(y, x)) * f.gradient_x(y, x);
  };
  const bool f_linear = f.structure() == Structure::linear_in_x;
  const bool h_low_order = h.structure() != Structure::general;
  const Structure structure = f_linear && h_low_order ? Structure::quadratic_in_x : Structure::general;
  // f^2 is convex when f is linear, or convex and positive (a standing assumption).
  const bool convex = sign == Sign::pessimistic && h.convex_in_x() && (f_linear || f.convex_in_x());
  return {p.dim_y(), p.dim_x(), eval, grad, structure, convex};
}

struct SelectionConfig {
  Sign sign = Sign::pessimistic;
  double tol = 1e-8;
  int n_starts = 0;  // 0: min(#vertices, 16)
  int max_iter = 10000;
  std::uint64_t seed = 0;
};

inline int default_n_starts(const Polytope& C) {
  return C.has_vertices() ? std::min<int>(static_cast<int>(C.cached_vertices().size()), 16) : 16;
}

struct SelectionResult {
  Vec y;
  double epsilon = 0.0;
  Sign sign = Sign::pessimistic;
  Vec x;
  double f_value = 0.0;  // the constant kappa_y on the selected set
  double h_value = 0.0;
  double penalized_value = 0.0;
  double fw_gap = 0.0;
  int n_starts = 0;
  bool reliable = false;  // fw_gap <= tol at the returned start
};

/// Multistart points: distinct vertices first, then random points of C.
inline std::vector<Vec> selection_starts(const Polytope& C, int n_starts, std::uint64_t seed) {
  std::vector<Vec> starts;
  if (C.has_vertices()) {
    for (const Vec& v : C.cached_vertices()) {
      if (static_cast<int>(starts.size()) >= n_starts) break;
      starts.push_back(v);
    }
  }
  Rng rng(seed);
  while (static_cast<int>(starts.size()) < n_starts) starts.push_back(sample_point(C, rng));
  return starts;
}

namespace detail {

struct StartOutcome {
  FwSolution fw;
  double f_value;
  double h_value;
  double penalized_value;
};

inline std::vector<StartOutcome> solve_all_starts(const BilevelProblem& p, const Vec& y, double epsilon,
                                                  const SelectionConfig& cfg, int n_starts) {
  const ScalarField g = penalized_field(p, epsilon, cfg.sign);
  const double coef = sign_value(cfg.sign) * epsilon;
  std::vector<StartOutcome> out;
  for (const Vec& start : selection_starts(p.C(), n_starts, cfg.seed)) {
    FwSolution fw = frank_wolfe_minimize(g, y, p.C(), cfg.tol, cfg.max_iter, start);
    const double fv = p.f()(y, fw.x);
    const double hv = p.h()(y, fw.x);
    out.push_back({std::move(fw), fv, hv, hv + coef * fv * fv});
  }
  return out;
}

inline int resolve_n_starts(const BilevelProblem& p, const SelectionConfig& cfg) {
  const int n = cfg.n_starts > 0 ? cfg.n_starts : default_n_starts(p.C());
  if (cfg.sign == Sign::optimistic) {
    const int vertices = static_cast<int>(p.C().cached_vertices().size());
    require(n >= 8 || (vertices > 0 && n >= vertices), Errc::precondition,
            "select_response: optimistic selection needs n_starts >= #vertices or >= 8");
  }
  return n;
}

}  // namespace detail

/// One point of the penalized selection map at y: the best of several
/// Frank-Wolfe runs on h + sign * eps * f^2 over C.
inline SelectionResult select_response(const BilevelProblem& p, const Vec& y, double epsilon,
                                       const SelectionConfig& cfg = {}) {
  require(epsilon > 0.0, Errc::precondition, "select_response: epsilon must be positive");
  require(p.K().contains(y, 1e-12), Errc::precondition, "select_response: y outside K");
  const int n = detail::resolve_n_starts(p, cfg);
  const auto outcomes = detail::solve_all_starts(p, y, epsilon, cfg, n);
  std::size_t best = 0;
  for (std::size_t i = 1; i < outcomes.size(); ++i)
    if (outcomes[i].penalized_value < outcomes[best].penalized_value) best = i;
  const auto& o = outcomes[best];
  SelectionResult r;
  r.y = y;
  r.epsilon = epsilon;
  r.sign = cfg.sign;
  r.x = o.fw.x;
  r.f_value = o.f_value;
  r.h_value = o.h_value;
  r.penalized_value = o.penalized_value;
  r.fw_gap = o.fw.fw_gap;
  r.n_starts = n;
  r.reliable = o.fw.converged;
  return r;
}

/// v_eps(y): the upper objective at the selected response.
inline double upper_value(const BilevelProblem& p, const Vec& y, double epsilon, const SelectionConfig& cfg = {}) {
  return select_response(p, y, epsilon, cfg).f_value;
}

struct ConstancyReport {
  double kappa = 0.0;
  double spread = 0.0;
  std::vector<Vec> witnesses;  // near-optimal minimizers from distinct starts
  std::vector<double> f_values;
};

/// Checks that f takes one value on the penalized argmin: collects every start
/// whose penalized value is within `value_tol` of the best.
inline ConstancyReport constancy_check(const BilevelProblem& p, const Vec& y, double epsilon, int n_starts,
                                       double value_tol = 1e-8, std::uint64_t seed = 0) {
  require(n_starts >= 8, Errc::precondition, "constancy_check: need at least 8 starts");
  SelectionConfig cfg;
  cfg.n_starts = n_starts;
  cfg.seed = seed;
  const auto outcomes = detail::solve_all_starts(p, y, epsilon, cfg, n_starts);
  std::size_t best = 0;
  for (std::size_t i = 1; i < outcomes.size(); ++i)
    if (outcomes[i].penalized_value < outcomes[best].penalized_value) best = i;
  const double floor = outcomes[best].penalized_value;
  ConstancyReport rep;
  rep.kappa = outcomes[best].f_value;
  double lo = rep.kappa, hi = rep.kappa;
  for (const auto& o : outcomes) {
    if (o.penalized_value - floor > value_tol) continue;
    lo = std::min(lo, o.f_value);
    hi = std::max(hi, o.f_value);
    rep.witnesses.push_back(o.fw.x);
    rep.f_values.push_back(o.f_value);
  }
  rep.spread = hi - lo;
  return rep;
}

}  // namespace bilevel
