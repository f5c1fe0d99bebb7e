#pragma once

// Dense linear programming on standard-form polyhedra {x : Ax = b, x >= 0}:
// a two-phase tableau simplex with Bland's rule, and brute-force enumeration
// of basic feasible solutions.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "bilevel/types.hpp"

namespace bilevel {

enum class LpStatus { optimal, unbounded, infeasible };

inline const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::optimal: return "optimal";
    case LpStatus::unbounded: return "unbounded";
    case LpStatus::infeasible: return "infeasible";
  }
  return "unknown";
}

struct LpSolution {
  Vec x;
  double value = 0.0;
  std::vector<int> basis;  // original column indices of the basic variables
  LpStatus status = LpStatus::infeasible;
};

namespace detail {

class Tableau {
 public:
  Tableau(const Mat& A, const Vec& b) : m_(A.rows()), n_(A.cols()) {
    t_ = Mat::Zero(m_ + 1, n_ + m_ + 1);
    basis_.resize(m_);
    for (Eigen::Index i = 0; i < m_; ++i) {
      const double s = b(i) < 0 ? -1.0 : 1.0;
      t_.row(i).head(n_) = s * A.row(i);
      t_(i, n_ + i) = 1.0;
      t_(i, rhs()) = s * b(i);
      basis_[i] = static_cast<int>(n_ + i);
    }
  }

  // Phase 1: minimize the sum of artificials. Returns the residual infeasibility.
  double phase_one() {
    t_.row(m_).setZero();
    for (Eigen::Index i = 0; i < m_; ++i) {
      t_.row(m_).head(n_) -= t_.row(i).head(n_);
      t_(m_, rhs()) -= t_(i, rhs());
    }
    iterate(n_ + m_);
    const double infeas = -t_(m_, rhs());
    drive_out_artificials();
    return infeas;
  }

  // Phase 2 over original columns only. Returns false when unbounded.
  bool phase_two(const Vec& c) {
    t_.row(m_).setZero();
    t_.row(m_).head(n_) = c.transpose();
    for (Eigen::Index i = 0; i < m_; ++i) {
      const int bi = basis_[i];
      const double cb = bi < n_ ? c(bi) : 0.0;
      if (cb != 0.0) t_.row(m_) -= cb * t_.row(i);
    }
    return iterate(n_);
  }

  Vec primal() const {
    Vec x = Vec::Zero(n_);
    for (Eigen::Index i = 0; i < m_; ++i)
      if (basis_[i] < n_) x(basis_[i]) = t_(i, rhs());
    return x;
  }

  std::vector<int> original_basis() const {
    std::vector<int> out;
    for (int bi : basis_)
      if (bi < n_) out.push_back(bi);
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  static constexpr double kPivTol = 1e-11;

  Eigen::Index rhs() const { return n_ + m_; }

  // Bland's rule: lowest-index improving column, lowest-index leaving variable
  // among ratio ties. Returns false when an improving column has no ratio.
  bool iterate(Eigen::Index allowed_cols) {
    for (;;) {
      Eigen::Index enter = -1;
      for (Eigen::Index j = 0; j < allowed_cols; ++j) {
        if (t_(m_, j) < -kPivTol) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return true;
      Eigen::Index leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < m_; ++i) {
        const double a = t_(i, enter);
        if (a <= kPivTol) continue;
        const double ratio = t_(i, rhs()) / a;
        if (ratio < best - 1e-14 ||
            (leave >= 0 && std::abs(ratio - best) <= 1e-14 && basis_[i] < basis_[leave])) {
          best = ratio;
          leave = i;
        }
      }
      if (leave < 0) return false;
      pivot(leave, enter);
    }
  }

  void pivot(Eigen::Index r, Eigen::Index c) {
    t_.row(r) /= t_(r, c);
    for (Eigen::Index i = 0; i <= m_; ++i) {
      if (i == r) continue;
      const double f = t_(i, c);
      if (f != 0.0) t_.row(i) -= f * t_.row(r);
    }
    basis_[r] = static_cast<int>(c);
  }

  // Rows whose artificial cannot be pivoted out are redundant; the artificial
  // stays basic at zero and never re-enters because phase two excludes it.
  void drive_out_artificials() {
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (basis_[i] < n_) continue;
      for (Eigen::Index j = 0; j < n_; ++j) {
        if (std::abs(t_(i, j)) > 1e-9) {
          pivot(i, j);
          break;
        }
      }
    }
  }

  Eigen::Index m_, n_;
  Mat t_;
  std::vector<int> basis_;
};

// Recomputes basic values from the original data for accuracy.
inline Vec refine_basic_solution(const Mat& A, const Vec& b, const std::vector<int>& basis) {
  Vec x = Vec::Zero(A.cols());
  if (basis.empty()) return x;
  Mat B(A.rows(), static_cast<Eigen::Index>(basis.size()));
  for (std::size_t k = 0; k < basis.size(); ++k) B.col(k) = A.col(basis[k]);
  const Vec xb = B.colPivHouseholderQr().solve(b);
  for (std::size_t k = 0; k < basis.size(); ++k) x(basis[k]) = xb(k);
  return x;
}

inline void clean_small_negatives(Vec& x) {
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (x(i) < 0.0 && x(i) > -1e-12) x(i) = 0.0;
}

}  // namespace detail

/// Minimizes <c, x> over {Ax = b, x >= 0}.
inline LpSolution simplex_minimize(const Mat& A, const Vec& b, const Vec& c) {
  require(A.rows() == b.size() && A.cols() == c.size(), Errc::dimension_mismatch,
          "simplex: inconsistent dimensions");
  LpSolution out;
  detail::Tableau tab(A, b);
  const double scale = 1.0 + b.cwiseAbs().sum();
  if (tab.phase_one() > kFeasTol * scale) {
    out.status = LpStatus::infeasible;
    return out;
  }
  if (!tab.phase_two(c)) {
    out.status = LpStatus::unbounded;
    out.x = tab.primal();
    return out;
  }
  out.basis = tab.original_basis();
  Vec refined = detail::refine_basic_solution(A, b, out.basis);
  Vec raw = tab.primal();
  // Keep whichever reconstruction is more accurate.
  const double res_refined = max_abs(A * refined - b);
  const double res_raw = max_abs(A * raw - b);
  out.x = (res_refined <= res_raw && (refined.size() == 0 || refined.minCoeff() >= -kFeasTol)) ? refined : raw;
  detail::clean_small_negatives(out.x);
  out.value = c.dot(out.x);
  out.status = LpStatus::optimal;
  return out;
}

/// Indices of a maximal set of linearly independent rows of A.
inline std::vector<int> independent_rows(const Mat& A) {
  std::vector<int> rows;
  if (A.rows() == 0) return rows;
  Eigen::ColPivHouseholderQR<Mat> qr(A.transpose());
  qr.setThreshold(1e-10);
  const auto rank = qr.rank();
  for (Eigen::Index k = 0; k < rank; ++k) rows.push_back(static_cast<int>(qr.colsPermutation().indices()(k)));
  std::sort(rows.begin(), rows.end());
  return rows;
}

/// All basic feasible solutions of {Ax = b, x >= 0}, deduplicated at `dedup_tol`
/// in the max norm. Cost is C(n, rank A) small linear solves.
inline std::vector<Vec> enumerate_basic_feasible(const Mat& A, const Vec& b, double dedup_tol = 1e-8) {
  const auto n = A.cols();
  const std::vector<int> rows = independent_rows(A);
  const auto r = static_cast<Eigen::Index>(rows.size());
  Mat Ar(r, n);
  Vec br(r);
  for (Eigen::Index i = 0; i < r; ++i) {
    Ar.row(i) = A.row(rows[i]);
    br(i) = b(rows[i]);
  }

  std::vector<Vec> out;
  std::vector<bool> mask(static_cast<std::size_t>(n), false);
  std::fill(mask.begin(), mask.begin() + r, true);
  Mat B(r, r);
  do {
    std::vector<Eigen::Index> cols;
    for (Eigen::Index j = 0; j < n; ++j)
      if (mask[static_cast<std::size_t>(j)]) cols.push_back(j);
    for (Eigen::Index k = 0; k < r; ++k) B.col(k) = Ar.col(cols[k]);
    Vec x = Vec::Zero(n);
    if (r > 0) {
      Eigen::FullPivLU<Mat> lu(B);
      lu.setThreshold(1e-10);
      if (lu.rank() < r) continue;
      const Vec xb = lu.solve(br);
      for (Eigen::Index k = 0; k < r; ++k) x(cols[k]) = xb(k);
    }
    if (x.size() > 0 && x.minCoeff() < -kFeasTol) continue;
    detail::clean_small_negatives(x);
    if (A.rows() > 0 && (A * x - b).cwiseAbs().maxCoeff() > kFeasTol) continue;
    const bool dup = std::any_of(out.begin(), out.end(), [&](const Vec& v) {
      return (v - x).cwiseAbs().maxCoeff() <= dedup_tol;
    });
    if (!dup) out.push_back(std::move(x));
  } while (std::prev_permutation(mask.begin(), mask.end()));
  return out;
}

}  // namespace bilevel
