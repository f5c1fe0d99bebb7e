#pragma once

// Brute-force ground truth for the follower's optimal set S(y), the
// pessimistic selection inside it, and the limiting three-level problem.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "bilevel/continuation.hpp"
#include "bilevel/lower_solver.hpp"
#include "bilevel/model.hpp"
#include "bilevel/upper_solver.hpp"

namespace bilevel {

enum class LowerSetKind { single_point, vertex_face, grid_cloud };

inline const char* to_string(LowerSetKind k) {
  switch (k) {
    case LowerSetKind::single_point: return "single_point";
    case LowerSetKind::vertex_face: return "vertex_face";
    case LowerSetKind::grid_cloud: return "grid_cloud";
  }
  return "unknown";
}

struct LowerSetDescription {
  LowerSetKind kind = LowerSetKind::single_point;
  std::vector<Vec> points;
  double value = 0.0;   // min of h(y, .) over C (over the grid for grid_cloud)
  bool from_grid = false;
};

struct OracleOptions {
  double tol = 1e-8;          // relative-absolute: members lie within tol * (1 + |min|)
  double x_grid_step = 1e-3;  // intrinsic-coordinate step for the grid fallback
  long long max_grid_points = 10'000'000;
  int max_grid_dim = 4;
};

/// Parameterization of C by its nonbasic coordinates: x_B = base - M x_N.
/// The basis is chosen greedily from the last column backwards, so slack
/// columns are eliminated first.
class IntrinsicGrid {
 public:
  IntrinsicGrid(const Polytope& C, double step, const OracleOptions& opt) : n_(C.dim()) {
    const std::vector<int> rows = independent_rows(C.A());
    const auto r = static_cast<Eigen::Index>(rows.size());
    Mat Ar(r, n_);
    Vec br(r);
    for (Eigen::Index i = 0; i < r; ++i) {
      Ar.row(i) = C.A().row(rows[i]);
      br(i) = C.b()(rows[i]);
    }
    Mat chosen(r, 0);
    for (int j = n_ - 1; j >= 0 && static_cast<Eigen::Index>(basic_.size()) < r; --j) {
      Mat trial(r, chosen.cols() + 1);
      trial << chosen, Ar.col(j);
      Eigen::FullPivLU<Mat> lu(trial);
      lu.setThreshold(1e-10);
      if (lu.rank() == trial.cols()) {
        chosen = trial;
        basic_.push_back(j);
      }
    }
    for (int j = 0; j < n_; ++j)
      if (std::find(basic_.begin(), basic_.end(), j) == basic_.end()) free_.push_back(j);
    require(static_cast<int>(free_.size()) <= opt.max_grid_dim, Errc::guard,
            "oracle grid: intrinsic dimension " + std::to_string(free_.size()) + " exceeds " +
                std::to_string(opt.max_grid_dim));

    Mat AN(r, static_cast<Eigen::Index>(free_.size()));
    for (std::size_t k = 0; k < free_.size(); ++k) AN.col(k) = Ar.col(free_[k]);
    if (r > 0) {
      Eigen::FullPivLU<Mat> lu(chosen);
      base_ = lu.solve(br);
      M_ = lu.solve(AN);
    } else {
      base_ = Vec::Zero(0);
      M_ = Mat::Zero(0, AN.cols());
    }

    long long total = 1;
    for (int j : free_) {
      Vec e = Vec::Zero(n_);
      e(j) = 1.0;
      const double lo = lp_minimize(e, C).x(j);
      const double hi = lp_minimize(-e, C).x(j);
      const int cells = hi > lo ? std::max(1, static_cast<int>(std::ceil((hi - lo) / step - 1e-9))) : 0;
      lo_.push_back(lo);
      hi_.push_back(hi);
      cells_.push_back(cells);
      total *= cells + 1;
      require(total <= opt.max_grid_points, Errc::guard,
              "oracle grid: more than " + std::to_string(opt.max_grid_points) + " points");
    }
    total_ = total;
  }

  long long size() const { return total_; }

  /// Visits every feasible grid point in index order as fn(index, x); the
  /// coordinates are advanced like an odometer, avoiding per-point division.
  template <class Fn>
  void for_each(Fn&& fn) const {
    const auto d = static_cast<Eigen::Index>(free_.size());
    const auto r = static_cast<Eigen::Index>(basic_.size());
    std::vector<int> counter(static_cast<std::size_t>(d), 0);
    Vec z(d), xb = base_;
    for (Eigen::Index k = 0; k < d; ++k) z(k) = lo_[k];
    if (d > 0) xb.noalias() -= M_ * z;
    Vec x = Vec::Zero(n_);
    for (Eigen::Index k = 0; k < d; ++k) x(free_[k]) = z(k);
    for (long long index = 0; index < total_; ++index) {
      bool feasible = true;
      for (Eigen::Index k = 0; k < r; ++k) {
        if (xb(k) < -1e-12) {
          feasible = false;
          break;
        }
        x(basic_[k]) = std::max(xb(k), 0.0);
      }
      if (feasible) fn(index, static_cast<const Vec&>(x));
      for (Eigen::Index k = 0; k < d; ++k) {
        const auto ks = static_cast<std::size_t>(k);
        const int c = cells_[ks];
        if (counter[ks] < c) {
          ++counter[ks];
          const double nz = lo_[ks] + (hi_[ks] - lo_[ks]) * static_cast<double>(counter[ks]) / static_cast<double>(c);
          xb -= M_.col(k) * (nz - z(k));
          z(k) = nz;
          x(free_[k]) = nz;
          break;
        }
        // Wrap this coordinate; recompute the basic part exactly to avoid drift.
        counter[ks] = 0;
        z(k) = lo_[ks];
        x(free_[k]) = z(k);
        xb = base_;
        if (d > 0) xb.noalias() -= M_ * z;
      }
    }
  }
  int intrinsic_dim() const { return static_cast<int>(free_.size()); }

  /// Writes grid point `index` into x; returns false when it falls outside C.
  /// `scratch` holds the intrinsic coordinates and is resized as needed.
  bool point(long long index, Vec& x, Vec& scratch) const {
    const auto d = static_cast<Eigen::Index>(free_.size());
    if (scratch.size() != d) scratch.resize(d);
    for (Eigen::Index k = 0; k < d; ++k) {
      const int c = cells_[k];
      const long long i = index % (c + 1);
      index /= (c + 1);
      scratch(k) = c == 0 ? lo_[k] : lo_[k] + (hi_[k] - lo_[k]) * static_cast<double>(i) / static_cast<double>(c);
      x(free_[k]) = scratch(k);
    }
    for (std::size_t k = 0; k < basic_.size(); ++k) {
      const auto row = static_cast<Eigen::Index>(k);
      double v = base_(row);
      for (Eigen::Index j = 0; j < d; ++j) v -= M_(row, j) * scratch(j);
      if (v < -1e-12) return false;
      x(basic_[k]) = std::max(v, 0.0);
    }
    return true;
  }

 private:
  int n_;
  std::vector<int> basic_, free_;
  Vec base_;
  Mat M_;
  std::vector<double> lo_, hi_;
  std::vector<int> cells_;
  long long total_ = 0;
};

inline double membership_band(double tol, double min_value) { return tol * (1.0 + std::abs(min_value)); }

/// S(y): optimal vertices when h(y, .) is linear (their hull is the optimal
/// face), otherwise all intrinsic grid points within tolerance of the grid
/// minimum.
inline LowerSetDescription exact_lower_set(const BilevelProblem& p, const Vec& y, const OracleOptions& opt = {}) {
  LowerSetDescription out;
  if (p.h().structure() == Structure::linear_in_x) {
    const std::vector<Vec> vs = enumerate_vertices(p.C());
    std::vector<double> hv;
    for (const Vec& v : vs) hv.push_back(p.h()(y, v));
    out.value = *std::min_element(hv.begin(), hv.end());
    const double band = membership_band(opt.tol, out.value);
    for (std::size_t i = 0; i < vs.size(); ++i)
      if (hv[i] <= out.value + band) out.points.push_back(vs[i]);
    out.kind = out.points.size() == 1 ? LowerSetKind::single_point : LowerSetKind::vertex_face;
    return out;
  }
  const IntrinsicGrid grid(p.C(), opt.x_grid_step, opt);
  // One pass: keep (index, value) candidates within the band of the running
  // minimum, pruning whenever the list has doubled since the last prune.
  std::vector<std::pair<long long, double>> cand;
  std::size_t prune_at = 1024;
  double best = std::numeric_limits<double>::infinity();
  auto prune = [&] {
    const double cut = best + membership_band(opt.tol, best);
    std::erase_if(cand, [cut](const auto& c) { return !(c.second <= cut); });
  };
  grid.for_each([&](long long i, const Vec& x) {
    const double v = p.h()(y, x);
    if (v < best) best = v;
    if (v <= best + membership_band(opt.tol, best)) {
      cand.emplace_back(i, v);
      if (cand.size() >= prune_at) {
        prune();
        prune_at = std::max<std::size_t>(1024, 2 * cand.size());
      }
    }
  });
  prune();
  Vec x = Vec::Zero(p.dim_x()), scratch;
  for (const auto& c : cand) {
    grid.point(c.first, x, scratch);
    out.points.push_back(x);
  }
  out.value = best;
  out.from_grid = true;
  out.kind = out.points.size() == 1 ? LowerSetKind::single_point : LowerSetKind::grid_cloud;
  return out;
}

struct PessimisticSelection {
  Vec x;
  double value = 0.0;  // f(y, x)
  LowerSetKind kind = LowerSetKind::single_point;
};

/// Minimizes f^2(y, .) over S(y): Frank-Wolfe over the hull of the optimal
/// vertices, or exhaustively over the grid cloud.
inline PessimisticSelection pessimistic_select(const BilevelProblem& p, const Vec& y, const OracleOptions& opt = {}) {
  const LowerSetDescription lower = exact_lower_set(p, y, opt);
  const ScalarField& f = p.f();
  PessimisticSelection out;
  out.kind = lower.kind;
  std::size_t best = 0;
  double best_sq = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < lower.points.size(); ++i) {
    const double fv = f(y, lower.points[i]);
    if (fv * fv < best_sq) {
      best_sq = fv * fv;
      best = i;
    }
  }
  out.x = lower.points[best];
  if (lower.kind == LowerSetKind::vertex_face) {
    auto value = [&](const Vec& x) {
      const double fv = f(y, x);
      return fv * fv;
    };
    auto gradient = [&](const Vec& x) -> Vec { return 2.0 * f(y, x) * f.gradient_x(y, x); };
    auto lmo = [&](const Vec& g) -> Vec {
      std::size_t k = 0;
      for (std::size_t i = 1; i < lower.points.size(); ++i)
        if (g.dot(lower.points[i]) < g.dot(lower.points[k])) k = i;
      return lower.points[k];
    };
    const LineSearch ls = f.structure() == Structure::linear_in_x ? LineSearch::exact_quadratic : LineSearch::armijo;
    out.x = frank_wolfe(value, gradient, lmo, out.x, ls, 1e-14, 10000).x;
  }
  out.value = f(y, out.x);
  return out;
}

enum class OracleMethod { face_enum, grid };

inline const char* to_string(OracleMethod m) { return m == OracleMethod::face_enum ? "face_enum" : "grid"; }

struct OracleSolution {
  std::string problem;
  Vec y_star;
  Vec x_star;
  double beta_star = 0.0;   // f(y*, x*)
  double alpha_star = 0.0;  // h(y*, x*)
  OracleMethod method = OracleMethod::face_enum;
  double resolution = 0.0;    // y-grid step
  double x_resolution = 0.0;  // x-grid step, 0 for face enumeration
};

/// Maximizes y -> pessimistic_select(p, y).value on a y-grid over K, then
/// polishes with one local compass search around the best grid point.
inline OracleSolution solve_three_level(const BilevelProblem& p, double y_grid_step = 1e-3,
                                        const OracleOptions& opt = {}) {
  require(p.dim_y() <= 2, Errc::guard, "solve_three_level: at most 2 leader dimensions");
  require(y_grid_step > 0.0, Errc::precondition, "solve_three_level: y_grid_step must be positive");
  const BoxSet& K = p.K();
  std::vector<int> cells;
  long long total = 1;
  for (int d = 0; d < K.dim(); ++d) {
    const double w = K.width()(d);
    cells.push_back(w > 0.0 ? std::max(1, static_cast<int>(std::ceil(w / y_grid_step - 1e-9))) : 0);
    total *= cells.back() + 1;
  }
  auto grid_y = [&](long long index) {
    Vec y(K.dim());
    for (int d = 0; d < K.dim(); ++d) {
      const int c = cells[d];
      const long long i = index % (c + 1);
      index /= (c + 1);
      y(d) = c == 0 ? K.lower()(d)
                    : K.lower()(d) + K.width()(d) * static_cast<double>(i) / static_cast<double>(c);
    }
    return y;
  };
  auto value = [&](const Vec& y) { return pessimistic_select(p, y, opt).value; };

  Vec best_y = grid_y(0);
  double best_v = value(best_y);
  for (long long i = 1; i < total; ++i) {
    const Vec y = grid_y(i);
    const double v = value(y);
    if (v > best_v) {
      best_v = v;
      best_y = y;
    }
  }

  UpperConfig polish;
  polish.initial_step = 0.5 * y_grid_step;
  polish.min_step = 1e-3 * y_grid_step;
  polish.max_evals = 200;
  const PatternResult pr = pattern_search_maximize(value, K, polish, best_y);

  OracleSolution out;
  out.problem = p.name();
  out.y_star = pr.y;
  out.x_star = pessimistic_select(p, pr.y, opt).x;
  out.beta_star = p.f()(out.y_star, out.x_star);
  out.alpha_star = p.h()(out.y_star, out.x_star);
  out.method = p.h().structure() == Structure::linear_in_x ? OracleMethod::face_enum : OracleMethod::grid;
  out.resolution = y_grid_step;
  out.x_resolution = out.method == OracleMethod::grid ? opt.x_grid_step : 0.0;
  return out;
}

struct GapRow {
  double epsilon;
  double gap;  // beta* - v
};

inline std::vector<GapRow> gap_table(const OracleSolution& o, const ContinuationTrace& t) {
  require(o.problem == t.problem, Errc::precondition, "gap_table: oracle and trace are for different problems");
  std::vector<GapRow> out;
  for (const TraceRow& r : t.rows) out.push_back({r.epsilon, o.beta_star - r.v});
  return out;
}

}  // namespace bilevel
