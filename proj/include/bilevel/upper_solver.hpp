#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "bilevel/model.hpp"
#include "bilevel/random.hpp"
#include "bilevel/selection.hpp"

namespace bilevel {

struct UpperConfig {
  int n_multistarts = 8;
  double initial_step = 0.0;  // 0: a quarter of each box width
  double shrink = 0.5;
  double min_step = 1e-6;
  int max_evals = 20000;  // per pattern search
  std::uint64_t seed = 0;
  // Passed through to the lower-level selection.
  double lower_tol = 1e-8;
  int lower_starts = 0;

  void validate() const {
    require(n_multistarts >= 1, Errc::precondition, "UpperConfig: n_multistarts must be >= 1");
    require(shrink > 0.0 && shrink < 1.0, Errc::precondition, "UpperConfig: shrink must lie in (0,1)");
    require(min_step > 0.0, Errc::precondition, "UpperConfig: min_step must be positive");
    require(initial_step == 0.0 || min_step < initial_step, Errc::precondition,
            "UpperConfig: min_step must be below initial_step");
    require(max_evals >= 1, Errc::precondition, "UpperConfig: max_evals must be >= 1");
  }
};

struct PatternResult {
  Vec y;
  double value = 0.0;
  int evals = 0;
  bool converged = false;  // step fell below min_step before the budget ran out
};

/// Compass search maximizing `value_fn` over the box K: polls +-step along each
/// coordinate, moves on the first strict improvement, otherwise shrinks.
inline PatternResult pattern_search_maximize(const std::function<double(const Vec&)>& value_fn, const BoxSet& K,
                                             const UpperConfig& cfg, const std::optional<Vec>& start = std::nullopt) {
  cfg.validate();
  Vec y = K.clip(start ? *start : K.center());
  Vec step = cfg.initial_step > 0.0 ? Vec(Vec::Constant(K.dim(), cfg.initial_step)) : Vec(0.25 * K.width());
  PatternResult res;
  double fy = value_fn(y);
  res.evals = 1;
  const auto done = [&] { return step.size() == 0 || step.maxCoeff() < cfg.min_step; };
  while (!done()) {
    if (res.evals >= cfg.max_evals) break;
    bool improved = false;
    for (Eigen::Index i = 0; i < y.size() && !improved && res.evals < cfg.max_evals; ++i) {
      if (step(i) == 0.0) continue;
      for (double dir : {1.0, -1.0}) {
        Vec cand = y;
        cand(i) += dir * step(i);
        cand = K.clip(cand);
        if (cand(i) == y(i)) continue;
        const double fc = value_fn(cand);
        ++res.evals;
        if (fc > fy) {
          y = std::move(cand);
          fy = fc;
          improved = true;
          break;
        }
        if (res.evals >= cfg.max_evals) break;
      }
    }
    if (!improved) step *= cfg.shrink;
  }
  res.y = std::move(y);
  res.value = fy;
  res.converged = done();
  return res;
}

/// Start points for the upper search: box center, then a Halton sequence
/// under a seeded random shift (Cranley-Patterson rotation).
inline std::vector<Vec> upper_starts(const BoxSet& K, int count, std::uint64_t seed) {
  static constexpr unsigned kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
  require(K.dim() <= 12, Errc::guard, "upper_starts: at most 12 leader dimensions");
  std::vector<Vec> out;
  if (count <= 0) return out;
  out.push_back(K.center());
  Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
  Vec shift(K.dim());
  for (Eigen::Index d = 0; d < shift.size(); ++d) shift(d) = uniform01(rng);
  for (int i = 1; i < count; ++i) {
    Vec y(K.dim());
    for (Eigen::Index d = 0; d < y.size(); ++d) {
      double u = radical_inverse(static_cast<std::uint64_t>(i), kPrimes[d]) + shift(d);
      u -= std::floor(u);
      y(d) = K.lower()(d) + u * K.width()(d);
    }
    out.push_back(std::move(y));
  }
  return out;
}

struct PenalizedSolution {
  Vec y;
  SelectionResult selection;
  double value = 0.0;
  int evals = 0;
  bool converged = false;
};

inline SelectionConfig selection_config(const UpperConfig& cfg, Sign sign) {
  SelectionConfig s;
  s.sign = sign;
  s.tol = cfg.lower_tol;
  s.n_starts = cfg.lower_starts;
  s.seed = cfg.seed;
  return s;
}

/// Maximizes v_eps over K by multistart compass search. `warm_start`, when
/// given, is tried before the regular starts.
inline PenalizedSolution solve_penalized(const BilevelProblem& p, double epsilon, Sign sign, const UpperConfig& cfg,
                                         const std::optional<Vec>& warm_start = std::nullopt) {
  require(epsilon > 0.0, Errc::precondition, "solve_penalized: epsilon must be positive");
  cfg.validate();
  const SelectionConfig scfg = selection_config(cfg, sign);
  const auto value_fn = [&](const Vec& y) { return upper_value(p, y, epsilon, scfg); };

  std::vector<Vec> starts;
  if (warm_start) starts.push_back(p.K().clip(*warm_start));
  for (Vec& s : upper_starts(p.K(), cfg.n_multistarts, cfg.seed)) starts.push_back(std::move(s));

  PenalizedSolution out;
  std::optional<PatternResult> best;
  for (const Vec& s : starts) {
    PatternResult r = pattern_search_maximize(value_fn, p.K(), cfg, s);
    out.evals += r.evals;
    if (!best || r.value > best->value) best = std::move(r);
  }
  out.y = best->y;
  out.selection = select_response(p, out.y, epsilon, scfg);
  out.value = out.selection.f_value;
  out.converged = best->converged && out.selection.reliable;
  return out;
}

}  // namespace bilevel
