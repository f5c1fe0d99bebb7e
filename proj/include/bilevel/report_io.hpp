#pragma once

// JSON and CSV records emitted by the command-line tool. Every JSON record
// carries a "schema" tag; the matching JSON Schema documents live in schemas/.

#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "bilevel/continuation.hpp"
#include "bilevel/diagnostics.hpp"
#include "bilevel/oracle.hpp"
#include "bilevel/problem_io.hpp"
#include "bilevel/upper_solver.hpp"

namespace bilevel {

inline std::vector<double> to_array(const Vec& v) { return {v.data(), v.data() + v.size()}; }

// Non-finite numbers become null.
inline json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json config_to_json(const UpperConfig& c) {
  return {{"n_multistarts", c.n_multistarts}, {"initial_step", c.initial_step}, {"shrink", c.shrink},
          {"min_step", c.min_step},           {"max_evals", c.max_evals},       {"seed", c.seed},
          {"lower_tol", c.lower_tol},         {"lower_starts", c.lower_starts}};
}

inline json solution_to_json(const std::string& problem, const PenalizedSolution& s, const UpperConfig& cfg) {
  const SelectionResult& sel = s.selection;
  return {{"schema", "solution-v1"},
          {"problem", problem},
          {"epsilon", sel.epsilon},
          {"sign", to_string(sel.sign)},
          {"seed", cfg.seed},
          {"y", to_array(s.y)},
          {"x", to_array(sel.x)},
          {"value", s.value},
          {"h_value", sel.h_value},
          {"penalized_value", sel.penalized_value},
          {"fw_gap", sel.fw_gap},
          {"evals", s.evals},
          {"converged", s.converged},
          {"config", config_to_json(cfg)}};
}

inline json trace_to_json(const ContinuationTrace& t) {
  json rows = json::array();
  for (const TraceRow& r : t.rows) {
    rows.push_back({{"epsilon", r.epsilon},
                    {"y", to_array(r.y)},
                    {"x", to_array(r.x)},
                    {"v", r.v},
                    {"h_value", r.h_value},
                    {"fw_gap", r.fw_gap},
                    {"evals", r.evals},
                    {"converged", r.converged}});
  }
  return {{"schema", "trace-v1"}, {"problem", t.problem}, {"sign", to_string(t.sign)}, {"seed", t.seed},
          {"rows", rows}};
}

/// Header: epsilon,y0..,x0..,v,h_value,fw_gap,evals
inline void write_trace_csv(std::ostream& os, const ContinuationTrace& t) {
  const Eigen::Index p = t.rows.empty() ? 0 : t.rows.front().y.size();
  const Eigen::Index n = t.rows.empty() ? 0 : t.rows.front().x.size();
  os << "epsilon";
  for (Eigen::Index i = 0; i < p; ++i) os << ",y" << i;
  for (Eigen::Index j = 0; j < n; ++j) os << ",x" << j;
  os << ",v,h_value,fw_gap,evals\n";
  os << std::setprecision(17);
  for (const TraceRow& r : t.rows) {
    os << r.epsilon;
    for (Eigen::Index i = 0; i < r.y.size(); ++i) os << ',' << r.y(i);
    for (Eigen::Index j = 0; j < r.x.size(); ++j) os << ',' << r.x(j);
    os << ',' << r.v << ',' << r.h_value << ',' << r.fw_gap << ',' << r.evals << '\n';
  }
}

inline json oracle_to_json(const OracleSolution& o) {
  return {{"schema", "oracle-v1"},
          {"problem", o.problem},
          {"y_star", to_array(o.y_star)},
          {"x_star", to_array(o.x_star)},
          {"beta_star", o.beta_star},
          {"alpha_star", o.alpha_star},
          {"method", to_string(o.method)},
          {"resolution", o.resolution},
          {"x_resolution", o.x_resolution}};
}

inline void write_gap_csv(std::ostream& os, const std::vector<GapRow>& gaps) {
  os << "epsilon,gap\n" << std::setprecision(17);
  for (const GapRow& g : gaps) os << g.epsilon << ',' << g.gap << '\n';
}

inline json ratefit_to_json(const RateFit& f) {
  const bool exact = f.classification == RateClass::exact_selection;
  return {{"schema", "ratefit-v1"},
          {"slope", exact ? json(nullptr) : json(f.slope)},
          {"intercept", exact ? json(nullptr) : json(f.intercept)},
          {"r_squared", exact ? json(nullptr) : json(f.r_squared)},
          {"tau", f.tau},
          {"n_points", f.n_points},
          {"meets_h1", f.meets_h1},
          {"meets_h2", f.meets_h2},
          {"classification", to_string(f.classification)}};
}

inline json certificate_to_json(const Certificate& c) {
  json bad = json::array();
  for (const auto& ce : c.counterexamples) {
    bad.push_back({{"x", to_array(ce.x)},
                   {"h_value", ce.h_value},
                   {"f_value", ce.f_value},
                   {"bounds_form", ce.bounds_form},
                   {"sum_form", ce.sum_form},
                   {"level_form", ce.level_form}});
  }
  return {{"schema", "certificate-v1"},
          {"alpha_star", c.alpha_star},
          {"beta_star", c.beta_star},
          {"sigma_star", c.sigma_star},
          {"tol", c.tol},
          {"samples_checked", c.samples_checked},
          {"valid", c.valid()},
          {"counterexample_count", c.counterexamples.size()},
          {"counterexamples", bad}};
}

inline json slope_to_json(const SlopeEstimate& s) {
  return {{"sigma_lower", s.sigma_lower},
          {"gamma", number_or_null(s.gamma)},
          {"validity", to_string(s.validity)},
          {"decay_exponent", s.decay_exponent}};
}

}  // namespace bilevel
