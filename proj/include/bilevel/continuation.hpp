#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bilevel/upper_solver.hpp"

namespace bilevel {

/// eps_k = eps0 * rho^k for k = 0 .. k_max - 1.
struct EpsSchedule {
  double eps0 = 0.1;
  double rho = 0.5;
  int k_max = 12;

  void validate() const {
    require(eps0 > 0.0 && std::isfinite(eps0), Errc::precondition, "EpsSchedule: eps0 must be positive");
    require(rho > 0.0 && rho < 1.0, Errc::precondition, "EpsSchedule: rho must lie in (0,1)");
    require(k_max >= 1, Errc::precondition, "EpsSchedule: k_max must be >= 1");
  }

  std::vector<double> epsilons() const {
    validate();
    std::vector<double> out;
    double e = eps0;
    for (int k = 0; k < k_max; ++k, e *= rho) out.push_back(e);
    return out;
  }
};

struct TraceRow {
  double epsilon = 0.0;
  Vec y;
  Vec x;
  double v = 0.0;  // f(y_eps, x_eps)
  double h_value = 0.0;
  double fw_gap = 0.0;
  int evals = 0;
  bool converged = false;
};

struct ContinuationTrace {
  std::string problem;
  Sign sign = Sign::pessimistic;
  std::uint64_t seed = 0;
  std::vector<TraceRow> rows;
};

/// Solves the penalized problem along a strictly decreasing epsilon sequence.
/// Each row warm-starts the leader search at the previous row's y; x is
/// always re-solved from scratch.
inline ContinuationTrace run_continuation(const BilevelProblem& p, std::span<const double> epsilons, Sign sign,
                                          const UpperConfig& cfg) {
  require(!epsilons.empty(), Errc::precondition, "run_continuation: empty epsilon sequence");
  for (std::size_t k = 0; k < epsilons.size(); ++k) {
    require(epsilons[k] > 0.0, Errc::precondition, "run_continuation: epsilons must be positive");
    require(k == 0 || epsilons[k] < epsilons[k - 1], Errc::precondition,
            "run_continuation: epsilons must be strictly decreasing");
  }
  ContinuationTrace t;
  t.problem = p.name();
  t.sign = sign;
  t.seed = cfg.seed;
  std::optional<Vec> warm;
  for (double eps : epsilons) {
    const PenalizedSolution sol = solve_penalized(p, eps, sign, cfg, warm);
    t.rows.push_back({eps, sol.y, sol.selection.x, sol.value, sol.selection.h_value, sol.selection.fw_gap,
                      sol.evals, sol.converged});
    warm = sol.y;
  }
  return t;
}

inline ContinuationTrace run_continuation(const BilevelProblem& p, const EpsSchedule& s, Sign sign,
                                          const UpperConfig& cfg) {
  const std::vector<double> eps = s.epsilons();
  return run_continuation(p, std::span<const double>(eps), sign, cfg);
}

struct MonotoneReport {
  bool ok = true;
  std::vector<int> violations;  // row indices that break the expected order
};

inline void require_decreasing_epsilons(const ContinuationTrace& t) {
  require(!t.rows.empty(), Errc::precondition, "trace is empty");
  for (std::size_t k = 1; k < t.rows.size(); ++k)
    require(t.rows[k].epsilon < t.rows[k - 1].epsilon, Errc::precondition,
            "trace epsilons are not strictly decreasing");
}

/// As eps decreases, v must not decrease (pessimistic) or increase
/// (optimistic) by more than `slack`.
inline MonotoneReport check_monotone(const ContinuationTrace& t, double slack) {
  require_decreasing_epsilons(t);
  MonotoneReport rep;
  const double dir = sign_value(t.sign);
  for (std::size_t k = 1; k < t.rows.size(); ++k) {
    if (dir * (t.rows[k].v - t.rows[k - 1].v) < -slack) {
      rep.ok = false;
      rep.violations.push_back(static_cast<int>(k));
    }
  }
  return rep;
}

struct LimitEstimate {
  Vec y_limit;
  Vec x_limit;
  double v_limit = 0.0;
  double slope = 0.0;  // a in v ~ v_limit - a * eps
};

/// Least-squares fit of v = v_inf - a * eps over the last three rows.
inline LimitEstimate limit_estimate(const ContinuationTrace& t) {
  require(t.rows.size() >= 3, Errc::precondition, "limit_estimate: need at least 3 rows");
  require_decreasing_epsilons(t);
  const std::size_t n = t.rows.size();
  double me = 0.0, mv = 0.0;
  for (std::size_t k = n - 3; k < n; ++k) {
    me += t.rows[k].epsilon;
    mv += t.rows[k].v;
  }
  me /= 3.0;
  mv /= 3.0;
  double see = 0.0, sev = 0.0;
  for (std::size_t k = n - 3; k < n; ++k) {
    const double de = t.rows[k].epsilon - me;
    see += de * de;
    sev += de * (t.rows[k].v - mv);
  }
  const double b = sev / see;  // dv/deps
  LimitEstimate out;
  out.v_limit = mv - b * me;
  out.slope = -b;
  out.y_limit = t.rows.back().y;
  out.x_limit = t.rows.back().x;
  return out;
}

}  // namespace bilevel
