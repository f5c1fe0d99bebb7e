#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "bilevel/expression.hpp"
#include "bilevel/model.hpp"
#include "bilevel/random.hpp"
#include "json.hpp"

namespace bilevel {

using json = nlohmann::json;

namespace detail {

inline Vec vec_from_json(const json& j, const char* key) {
  require(j.contains(key) && j.at(key).is_array(), Errc::parse_error,
          std::string("problem: '") + key + "' must be an array");
  const auto& a = j.at(key);
  Vec v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) v(static_cast<Eigen::Index>(i)) = a[i].get<double>();
  return v;
}

// A is accepted either flat (row-major, m * n entries) or as a list of rows.
inline Mat matrix_from_json(const json& a, Eigen::Index m, Eigen::Index n) {
  require(a.is_array(), Errc::parse_error, "problem: 'A' must be an array");
  Mat A(m, n);
  if (!a.empty() && a[0].is_array()) {
    require(static_cast<Eigen::Index>(a.size()) == m, Errc::parse_error, "problem: A has wrong number of rows");
    for (Eigen::Index i = 0; i < m; ++i) {
      const auto& row = a[static_cast<std::size_t>(i)];
      require(static_cast<Eigen::Index>(row.size()) == n, Errc::parse_error, "problem: A row has wrong length");
      for (Eigen::Index j = 0; j < n; ++j) A(i, j) = row[static_cast<std::size_t>(j)].get<double>();
    }
    return A;
  }
  require(static_cast<Eigen::Index>(a.size()) == m * n, Errc::parse_error,
          "problem: flat A must have len(b) * dim_x entries");
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < n; ++j) A(i, j) = a[static_cast<std::size_t>(i * n + j)].get<double>();
  return A;
}

/// Linear: convex. Quadratic: PSD Hessian at the box corners and random y.
/// Anything else needs an explicit declaration.
inline bool infer_convex(const expr::Expression& e, const BoxSet& K) {
  if (e.structure() == Structure::linear_in_x) return true;
  if (e.structure() != Structure::quadratic_in_x) return false;
  Rng rng(12345);
  std::vector<Vec> ys{K.lower(), K.upper(), K.center()};
  for (int i = 0; i < 32; ++i) ys.push_back(uniform_in_box(rng, K.lower(), K.upper()));
  const Vec x0 = Vec::Zero(e.dim_x());
  for (const Vec& y : ys) {
    const Mat H = e.hessian(y, x0);
    const Vec eig = Eigen::SelfAdjointEigenSolver<Mat>(0.5 * (H + H.transpose())).eigenvalues();
    if (eig.minCoeff() < -1e-10 * (1.0 + eig.cwiseAbs().maxCoeff())) return false;
  }
  return true;
}

}  // namespace detail

inline BilevelProblem problem_from_json(const json& j) {
  try {
    const std::string name = j.at("name").get<std::string>();
    const int dim_y = j.at("dim_y").get<int>();
    const int dim_x = j.at("dim_x").get<int>();
    const Vec b = detail::vec_from_json(j, "b");
    const Mat A = detail::matrix_from_json(j.at("A"), b.size(), dim_x);
    BoxSet K(detail::vec_from_json(j, "K_lower"), detail::vec_from_json(j, "K_upper"));
    require(K.dim() == dim_y, Errc::dimension_mismatch, "problem: K bounds must have dim_y entries");
    const expr::Expression fe(j.at("f").get<std::string>(), dim_y, dim_x);
    const expr::Expression he(j.at("h").get<std::string>(), dim_y, dim_x);
    const bool f_convex = j.contains("f_convex_in_x") ? j["f_convex_in_x"].get<bool>() : detail::infer_convex(fe, K);
    const bool h_convex = j.contains("h_convex_in_x") ? j["h_convex_in_x"].get<bool>() : detail::infer_convex(he, K);
    return {name, fe.to_field(f_convex), he.to_field(h_convex), std::move(K), Polytope(A, b)};
  } catch (const json::exception& e) {
    throw Error(Errc::parse_error, std::string("problem JSON: ") + e.what());
  }
}

inline BilevelProblem load_problem_file(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), Errc::parse_error, "cannot open problem file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(Errc::parse_error, "problem file '" + path + "': " + e.what());
  }
  return problem_from_json(j);
}

inline json problem_to_json(const BilevelProblem& p) {
  require(!p.f().expression().empty() && !p.h().expression().empty(), Errc::precondition,
          "problem_to_json: f and h need expression sources");
  json A = json::array();
  for (Eigen::Index i = 0; i < p.C().A().rows(); ++i)
    for (Eigen::Index j = 0; j < p.C().A().cols(); ++j) A.push_back(p.C().A()(i, j));
  auto to_array = [](const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  return json{{"name", p.name()},
              {"dim_y", p.dim_y()},
              {"dim_x", p.dim_x()},
              {"A", A},
              {"b", to_array(p.C().b())},
              {"K_lower", to_array(p.K().lower())},
              {"K_upper", to_array(p.K().upper())},
              {"f", p.f().expression()},
              {"h", p.h().expression()},
              {"f_convex_in_x", p.f().convex_in_x()},
              {"h_convex_in_x", p.h().convex_in_x()}};
}

}  // namespace bilevel
