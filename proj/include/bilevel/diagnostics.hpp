#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "bilevel/lower_solver.hpp"
#include "bilevel/model.hpp"
#include "bilevel/oracle.hpp"
#include "bilevel/random.hpp"

namespace bilevel {

// ---------------------------------------------------------------------------
// Certificate for the optimal set C* at the three-level solution.

struct CertificateCounterexample {
  Vec x;
  double h_value;
  double f_value;
  bool bounds_form;  // h <= a* + tol and f <= b* + tol
  bool sum_form;     // h + f <= sigma* + tol
  bool level_form;   // |h - a*| <= tol and |f - b*| <= tol
};

struct Certificate {
  double alpha_star = 0.0;
  double beta_star = 0.0;
  double sigma_star = 0.0;  // alpha* + beta*
  double tol = 0.0;
  int samples_checked = 0;
  std::function<bool(const Vec&)> membership_test;
  std::vector<CertificateCounterexample> counterexamples;
  bool valid() const { return counterexamples.empty(); }
};

/// Builds sigma* and the membership test x in C, h + f <= sigma* + tol, and
/// samples C to check that the three descriptions of C* (both bounds, the
/// summed bound, both levels attained) agree. Disagreements are recorded.
inline Certificate build_certificate(const BilevelProblem& p, const OracleSolution& o, double tol = 1e-6,
                                     int n_samples = 1000, std::uint64_t seed = 0) {
  require(o.problem == p.name(), Errc::precondition, "build_certificate: oracle is for another problem");
  require(o.y_star.size() == p.dim_y() && o.x_star.size() == p.dim_x(), Errc::dimension_mismatch,
          "build_certificate: oracle dimensions do not match the problem");
  Certificate cert;
  cert.alpha_star = o.alpha_star;
  cert.beta_star = o.beta_star;
  cert.sigma_star = o.alpha_star + o.beta_star;
  cert.tol = tol;
  const ScalarField f = p.f(), h = p.h();
  const Polytope C = p.C();
  const Vec y = o.y_star;
  const double sigma = cert.sigma_star;
  cert.membership_test = [=](const Vec& x) {
    return C.contains(x) && h(y, x) + f(y, x) <= sigma + tol;
  };

  Rng rng(seed);
  std::vector<Vec> points{o.x_star};
  for (int i = 0; i < n_samples; ++i) points.push_back(sample_point(C, rng));
  for (const Vec& x : points) {
    const double hv = h(y, x), fv = f(y, x);
    const bool bounds = hv <= cert.alpha_star + tol && fv <= cert.beta_star + tol;
    const bool sum = hv + fv <= sigma + tol;
    const bool level = std::abs(hv - cert.alpha_star) <= tol && std::abs(fv - cert.beta_star) <= tol;
    if (bounds != sum || sum != level) cert.counterexamples.push_back({x, hv, fv, bounds, sum, level});
  }
  cert.samples_checked = static_cast<int>(points.size());
  return cert;
}

// ---------------------------------------------------------------------------
// Strong-slope lower bound (Hoffman constant candidate).

enum class SlopeValidity { exact_linear, sampled, unavailable };

inline const char* to_string(SlopeValidity v) {
  switch (v) {
    case SlopeValidity::exact_linear: return "exact_linear";
    case SlopeValidity::sampled: return "sampled";
    case SlopeValidity::unavailable: return "unavailable";
  }
  return "unknown";
}

struct SlopeEstimate {
  double sigma_lower = 0.0;
  double gamma = std::numeric_limits<double>::infinity();  // 1 / sigma_lower
  SlopeValidity validity = SlopeValidity::unavailable;
  double decay_exponent = 0.0;  // fitted d log|grad| / d log(excess); sampled case only
};

namespace detail {

inline SlopeEstimate slope_from(double sigma, SlopeValidity validity) {
  SlopeEstimate s;
  if (!(sigma > 0.0)) return s;
  s.sigma_lower = sigma;
  s.gamma = 1.0 / sigma;
  s.validity = validity;
  return s;
}

}  // namespace detail

/// Lower bound on the gradient norm of field(y, .) on C away from its
/// minimizers. Linear fields have a constant gradient norm. Otherwise feasible
/// samples are pulled toward a minimizer along rays, stopping once the value
/// excess drops to 1e-6; if the gradient norm decays like a power of the
/// excess (exponent >= 0.25) the infimum is zero and no bound is reported.
inline SlopeEstimate strong_slope_lower_bound(const ScalarField& field, const Vec& y, const Polytope& C,
                                              int n_samples = 200, std::uint64_t seed = 0) {
  require(field.dim_x() == C.dim() && y.size() == field.dim_y(), Errc::dimension_mismatch,
          "strong_slope_lower_bound: dimension mismatch");
  Rng rng(seed);
  if (field.structure() == Structure::linear_in_x) {
    const Vec x = sample_point(C, rng);
    return detail::slope_from(field.gradient_x(y, x).norm(), SlopeValidity::exact_linear);
  }
  constexpr double kExclude = 1e-6;
  const FwSolution min = frank_wolfe_minimize(field, y, C, 1e-12, 20000);
  const double floor = min.value;
  std::vector<double> log_excess, log_norm;
  double inf_norm = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n_samples; ++i) {
    const Vec x = sample_point(C, rng);
    for (double t = 1.0; t > 1e-12; t *= 0.5) {
      const Vec xt = min.x + t * (x - min.x);
      const double excess = field(y, xt) - floor;
      if (excess <= kExclude) break;
      const double norm = field.gradient_x(y, xt).norm();
      inf_norm = std::min(inf_norm, norm);
      if (norm > 0.0) {
        log_excess.push_back(std::log(excess));
        log_norm.push_back(std::log(norm));
      }
    }
  }
  if (log_norm.size() < 2 || !(inf_norm > 0.0)) return {};
  const auto n = static_cast<double>(log_norm.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < log_norm.size(); ++k) {
    mx += log_excess[k];
    my += log_norm[k];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < log_norm.size(); ++k) {
    sxx += (log_excess[k] - mx) * (log_excess[k] - mx);
    sxy += (log_excess[k] - mx) * (log_norm[k] - my);
  }
  const double exponent = sxx > 0.0 ? sxy / sxx : 0.0;
  SlopeEstimate s = exponent >= 0.25 ? SlopeEstimate{} : detail::slope_from(inf_norm, SlopeValidity::sampled);
  s.decay_exponent = exponent;
  return s;
}

// ---------------------------------------------------------------------------
// Empirical error rates.

enum class RateClass { exact_selection, consistent_H1, consistent_H2, inconclusive };

inline const char* to_string(RateClass c) {
  switch (c) {
    case RateClass::exact_selection: return "exact_selection";
    case RateClass::consistent_H1: return "consistent_H1";
    case RateClass::consistent_H2: return "consistent_H2";
    case RateClass::inconclusive: return "inconclusive";
  }
  return "unknown";
}

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double tau = 0.15;
  int n_points = 0;
  bool meets_h1 = false;  // slope >= 1 - tau
  bool meets_h2 = false;  // slope >= 0.5 - tau
  RateClass classification = RateClass::inconclusive;
};

inline constexpr double kGapFloor = 1e-12;

/// Least-squares slope of log(gap) against log(eps). The classification is the
/// strongest threshold met; gaps that are all below 1e-12 classify as exact
/// selection.
inline RateFit fit_rate(std::span<const GapRow> gaps, double tau = 0.15) {
  RateFit fit;
  fit.tau = tau;
  std::vector<double> lx, ly;
  double emin = std::numeric_limits<double>::infinity(), emax = 0.0;
  for (const GapRow& g : gaps) {
    if (!(g.gap > kGapFloor) || !(g.epsilon > 0.0)) continue;
    lx.push_back(std::log(g.epsilon));
    ly.push_back(std::log(g.gap));
    emin = std::min(emin, g.epsilon);
    emax = std::max(emax, g.epsilon);
  }
  if (lx.empty()) {
    fit.classification = RateClass::exact_selection;
    fit.meets_h1 = fit.meets_h2 = true;
    return fit;
  }
  require(lx.size() >= 4, Errc::precondition, "fit_rate: need at least 4 gaps above 1e-12");
  require(emax / emin >= 100.0 * (1.0 - 1e-12), Errc::precondition, "fit_rate: epsilons must span 2 decades");
  const auto n = static_cast<double>(lx.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < lx.size(); ++k) {
    mx += lx[k];
    my += ly[k];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < lx.size(); ++k) {
    sxx += (lx[k] - mx) * (lx[k] - mx);
    sxy += (lx[k] - mx) * (ly[k] - my);
    syy += (ly[k] - my) * (ly[k] - my);
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  fit.n_points = static_cast<int>(lx.size());
  fit.meets_h1 = fit.slope >= 1.0 - tau;
  fit.meets_h2 = fit.slope >= 0.5 - tau;
  fit.classification = fit.meets_h1   ? RateClass::consistent_H1
                       : fit.meets_h2 ? RateClass::consistent_H2
                                      : RateClass::inconclusive;
  return fit;
}

/// Combines the rate fit with the slope bound: the o(eps) regime needs both a
/// positive slope bound and a rate meeting the H1 threshold.
inline RateClass assess_regime(const RateFit& fit, const SlopeEstimate& slope) {
  if (fit.classification == RateClass::exact_selection) return RateClass::exact_selection;
  if (fit.meets_h1 && slope.validity != SlopeValidity::unavailable) return RateClass::consistent_H1;
  if (fit.meets_h2) return RateClass::consistent_H2;
  return RateClass::inconclusive;
}

}  // namespace bilevel
