#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "bilevel/lower_solver.hpp"
#include "bilevel/model.hpp"
#include "bilevel/random.hpp"

namespace bilevel {

struct ValidationCheck {
  std::string name;
  bool passed = true;
  Vec witness_y;  // worst point found
  Vec witness_x;
  double worst_value = 0.0;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;

  bool all_passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const ValidationCheck& c) { return c.passed; });
  }
  const ValidationCheck& check(const std::string& name) const {
    for (const auto& c : checks)
      if (c.name == name) return c;
    throw Error(Errc::precondition, "no validation check named '" + name + "'");
  }
};

/// max_i |g_i - fd_i| / max(1, |g|_inf) with central differences of step 1e-6.
inline double gradient_relative_error(const ScalarField& field, const Vec& y, const Vec& x) {
  const Vec g = field.gradient_x(y, x);
  double worst = 0.0;
  Vec xp = x, xm = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double step = 1e-6 * std::max(1.0, std::abs(x(i)));
    xp(i) = x(i) + step;
    xm(i) = x(i) - step;
    const double fd = (field(y, xp) - field(y, xm)) / (2.0 * step);
    worst = std::max(worst, std::abs(g(i) - fd));
    xp(i) = xm(i) = x(i);
  }
  return worst / std::max(1.0, g.cwiseAbs().maxCoeff());
}

/// Sampled checks of the standing assumptions: f > 0, convexity in x of h
/// (and of f when declared convex), gradient consistency, bounded C.
inline ValidationReport validate_problem(const BilevelProblem& p, int samples, std::uint64_t seed = 0) {
  require(samples >= 100, Errc::precondition, "validate_problem: need at least 100 samples");
  Rng rng(seed);
  const auto& K = p.K();
  const auto& C = p.C();
  ValidationReport rep;

  ValidationCheck positivity{"positivity", true, {}, {}, std::numeric_limits<double>::infinity()};
  ValidationCheck convexity{"convexity", true, {}, {}, 0.0};
  ValidationCheck gradient{"gradient", true, {}, {}, 0.0};

  std::vector<const ScalarField*> convex_fields{&p.h()};
  if (p.f().convex_in_x()) convex_fields.push_back(&p.f());

  for (int s = 0; s < samples; ++s) {
    const Vec y = uniform_in_box(rng, K.lower(), K.upper());
    const Vec a = sample_point(C, rng);
    const Vec b = sample_point(C, rng);

    const double fv = p.f()(y, a);
    if (!(fv > 0.0) || !std::isfinite(fv)) positivity.passed = false;
    if (!(fv >= positivity.worst_value)) {
      positivity.worst_value = fv;
      positivity.witness_y = y;
      positivity.witness_x = a;
    }

    const Vec mid = 0.5 * (a + b);
    for (const ScalarField* field : convex_fields) {
      const double fa = (*field)(y, a), fb = (*field)(y, b), fm = (*field)(y, mid);
      const double excess = fm - 0.5 * (fa + fb);
      if (excess > 1e-9 * (1.0 + std::abs(fm))) convexity.passed = false;
      if (excess > convexity.worst_value) {
        convexity.worst_value = excess;
        convexity.witness_y = y;
        convexity.witness_x = mid;
      }
    }

    for (const ScalarField* field : {&p.f(), &p.h()}) {
      const double err = gradient_relative_error(*field, y, a);
      if (!(err <= 1e-5)) gradient.passed = false;
      if (!(err <= gradient.worst_value)) {
        gradient.worst_value = err;
        gradient.witness_y = y;
        gradient.witness_x = a;
      }
    }
  }

  ValidationCheck bounded{"boundedness", true, {}, {}, 0.0};
  for (int j = 0; j < C.dim(); ++j) {
    Vec e = Vec::Zero(C.dim());
    e(j) = -1.0;
    const LpSolution sol = simplex_minimize(C.A(), C.b(), e);
    if (sol.status != LpStatus::optimal) {
      bounded.passed = false;
      bounded.worst_value = std::numeric_limits<double>::infinity();
      bounded.witness_x = sol.x;
      break;
    }
    if (sol.x(j) >= bounded.worst_value) {
      bounded.worst_value = sol.x(j);
      bounded.witness_x = sol.x;
    }
  }

  rep.checks = {positivity, convexity, gradient, bounded};
  return rep;
}

}  // namespace bilevel
