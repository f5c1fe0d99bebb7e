#pragma once

#include <algorithm>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "bilevel/model.hpp"

namespace bilevel {

namespace problems {

inline double bump(const Vec& y) { return 1.0 + 4.0 * y(0) * (1.0 - y(0)); }

/// "flat-segment": h == 0 so all of C = {z1 + z2 = 1, z >= 0} is optimal for
/// the follower; f = 1 + 4y(1-y) + z1.
inline BilevelProblem flat_segment() {
  ScalarField f(
      1, 2, [](const Vec& y, const Vec& x) { return bump(y) + x(0); },
      [](const Vec&, const Vec&) {
        Vec g(2);
        g << 1.0, 0.0;
        return g;
      },
      Structure::linear_in_x, true, "1 + 4*y[0]*(1 - y[0]) + x[0]");
  ScalarField h(
      1, 2, [](const Vec&, const Vec&) { return 0.0; }, [](const Vec&, const Vec&) { return Vec::Zero(2); },
      Structure::linear_in_x, true, "0");
  Mat A(1, 2);
  A << 1.0, 1.0;
  Vec b(1);
  b << 1.0;
  return {"FS", f, h, BoxSet(Vec::Zero(1), Vec::Ones(1)), Polytope(A, b)};
}

/// "quad-band": the unit box in (z1, z2) with slacks; h = (z1 + z2 - 1)^2 is
/// minimized on a whole band and f = w(y)(1 + z1 + z2).
inline BilevelProblem quad_band() {
  ScalarField f(
      1, 4, [](const Vec& y, const Vec& x) { return bump(y) * (1.0 + x(0) + x(1)); },
      [](const Vec& y, const Vec&) {
        const double w = bump(y);
        Vec g(4);
        g << w, w, 0.0, 0.0;
        return g;
      },
      Structure::linear_in_x, true, "(1 + 4*y[0]*(1 - y[0]))*(1 + x[0] + x[1])");
  ScalarField h(
      1, 4,
      [](const Vec&, const Vec& x) {
        const double r = x(0) + x(1) - 1.0;
        return r * r;
      },
      [](const Vec&, const Vec& x) {
        const double r = 2.0 * (x(0) + x(1) - 1.0);
        Vec g(4);
        g << r, r, 0.0, 0.0;
        return g;
      },
      Structure::quadratic_in_x, true, "(x[0] + x[1] - 1)^2");
  Mat A(2, 4);
  A << 1, 0, 1, 0, 0, 1, 0, 1;
  Vec b(2);
  b << 1.0, 1.0;
  return {"QB", f, h, BoxSet(Vec::Zero(1), Vec::Ones(1)), Polytope(A, b)};
}

}  // namespace problems

/// Built-in problems plus anything added with register_problem.
class Registry {
 public:
  static Registry& instance() {
    static Registry r;
    return r;
  }

  BilevelProblem get(const std::string& name) const {
    std::lock_guard lock(mu_);
    auto it = user_.find(name);
    if (it != user_.end()) return it->second;
    if (name == "FS") return problems::flat_segment();
    if (name == "QB") return problems::quad_band();
    throw Error(Errc::unknown_problem, "unknown problem '" + name + "'");
  }

  void add(const BilevelProblem& p) {
    std::lock_guard lock(mu_);
    user_.insert_or_assign(p.name(), p);
  }

  std::vector<std::string> names() const {
    std::lock_guard lock(mu_);
    std::vector<std::string> out{"FS", "QB"};
    for (const auto& [name, _] : user_)
      if (std::find(out.begin(), out.end(), name) == out.end()) out.push_back(name);
    return out;
  }

 private:
  Registry() = default;
  mutable std::mutex mu_;
  std::map<std::string, BilevelProblem> user_;
};

inline BilevelProblem registry_get(const std::string& name) { return Registry::instance().get(name); }
inline std::vector<std::string> registry_names() { return Registry::instance().names(); }
inline void register_problem(const BilevelProblem& p) { Registry::instance().add(p); }

}  // namespace bilevel
