#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace bilevel {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

enum class Errc {
  empty_polytope,
  unbounded_polytope,
  dimension_mismatch,
  invalid_box,
  unknown_problem,
  parse_error,
  precondition,
  guard,
  infeasible,
};

inline const char* to_string(Errc c) {
  switch (c) {
    case Errc::empty_polytope: return "empty_polytope";
    case Errc::unbounded_polytope: return "unbounded_polytope";
    case Errc::dimension_mismatch: return "dimension_mismatch";
    case Errc::invalid_box: return "invalid_box";
    case Errc::unknown_problem: return "unknown_problem";
    case Errc::parse_error: return "parse_error";
    case Errc::precondition: return "precondition";
    case Errc::guard: return "guard";
    case Errc::infeasible: return "infeasible";
  }
  return "unknown";
}

/// Single exception type for the library; `code()` distinguishes causes.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

inline void require(bool cond, Errc code, const std::string& msg) {
  if (!cond) throw Error(code, msg);
}

/// Sign of the f^2 term in the lower-level penalty. Pessimistic selects the
/// follower responses with the smallest f; optimistic the largest.
enum class Sign : int { pessimistic = 1, optimistic = -1 };

inline double sign_value(Sign s) { return s == Sign::pessimistic ? 1.0 : -1.0; }

inline const char* to_string(Sign s) {
  return s == Sign::pessimistic ? "pessimistic" : "optimistic";
}

// Feasibility tolerance shared by the polytope machinery.
inline constexpr double kFeasTol = 1e-9;

/// Max-norm that treats an empty vector as zero.
inline double max_abs(const Vec& v) { return v.size() > 0 ? v.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace bilevel
