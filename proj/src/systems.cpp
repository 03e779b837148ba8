#include "reach/systems.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

namespace reach {
namespace {

using nlohmann::json;

double param(const std::map<std::string, double>& params, const std::string& key,
             double fallback) {
  const auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

Matrix matrix_from_json(const json& rows) {
  const auto r = rows.size();
  const auto c = r == 0 ? 0 : rows.at(0).size();
  Matrix m(r, c);
  for (size_t i = 0; i < r; ++i) {
    if (rows.at(i).size() != c) throw std::runtime_error("data file: ragged matrix");
    for (size_t j = 0; j < c; ++j) m(i, j) = rows.at(i).at(j).get<double>();
  }
  return m;
}

json load_data_file(const std::string& stem) {
  const std::string dir = data_directory();
  const std::filesystem::path path = std::filesystem::path(dir) / (stem + ".json");
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("benchmark data file not found: " + path.string() +
                             " (set REACH_DATA_DIR to the data directory)");
  json j;
  in >> j;
  return j;
}

Zonotope box_zonotope(std::initializer_list<std::pair<double, double>> bounds) {
  const int n = static_cast<int>(bounds.size());
  Vector c(n), r(n);
  int i = 0;
  for (const auto& [lo, hi] : bounds) {
    c(i) = 0.5 * (lo + hi);
    r(i) = 0.5 * (hi - lo);
    ++i;
  }
  return Zonotope(std::move(c), Matrix(r.asDiagonal()));
}

BenchmarkCase pursuit_evasion() {
  Matrix a = Matrix::Zero(4, 4);
  a(0, 1) = 1.0;
  a(2, 3) = 1.0;
  Matrix b = Matrix::Zero(4, 2);
  b(1, 0) = 1.0;
  b(3, 1) = 1.0;
  Matrix e = Matrix::Zero(4, 2);
  e(1, 0) = -1.0;
  e(3, 1) = -1.0;
  const Zonotope u = box_zonotope({{-0.5, 0.1}, {-0.1, 0.5}});
  const Zonotope w = box_zonotope({{-0.1, 0.5}, {-0.5, 0.1}});

  BenchmarkCase bc;
  bc.sys = LinSys(std::move(a), std::move(b), std::move(e), u, w);
  bc.spec.target = HPolytope::box(Vector::Constant(4, -0.5), Vector::Constant(4, 0.5));
  bc.spec.horizon = Horizon::time_interval(0.0, 1.0);
  bc.spec.sigma = 100;
  return bc;
}

BenchmarkCase quadrotor_6d(double zeta, double phi) {
  const double g = 9.81, d0 = 70.0, d1 = 17.0, k = 0.89 / 1.4, n0 = 55.0;
  Matrix a = Matrix::Zero(6, 6);
  a(0, 2) = 1.0;
  a(1, 3) = 1.0;
  a(2, 4) = g;
  a(4, 5) = 1.0;
  a(5, 4) = -d0;
  a(5, 5) = -d1;
  Matrix b = Matrix::Zero(6, 2);
  b(3, 0) = k;
  b(5, 1) = n0;
  Matrix e = Matrix::Zero(6, 2);
  e(2, 0) = 1.0;
  e(3, 1) = 1.0;

  Vector uc(2);
  uc << g / k, 0.0;
  Vector ur(2);
  ur << zeta * 1.5, M_PI / 6.0;
  Vector wr(2);
  wr << 0.2760 * phi, 0.3668;
  const Zonotope u(uc, Matrix(ur.asDiagonal()));
  const Zonotope w(Vector::Zero(2), Matrix(wr.asDiagonal()));

  Matrix ct(6, 15);
  // clang-format off
  ct << 1, -1, 0,  0,  1, -1, 0,  0, 0,  0,  0, 0,  0, 0,  0,
        0,  0, 1, -1, -2, -2, 0,  0, 0,  0, 10, 0,  0, 0,  0,
        0,  0, 0,  0,  0,  0, 1, -1, 0,  0,  0, 0,  0, 0,  0,
        0,  0, 0,  0,  0,  0, 0,  0, 1, -1, -1, 0,  0, 0,  0,
        0,  0, 0,  0,  0,  0, 0,  0, 0,  0,  0, 1, -1, 0,  0,
        0,  0, 0,  0,  0,  0, 0,  0, 0,  0,  0, 0,  0, 1, -1;
  // clang-format on
  Vector d(15);
  d << 0.5, 0.5, 0.1, 0.0, 0.3, 0.3, 1.0, 1.0, 0.0, 1.0, 1.0, M_PI / 15.0, M_PI / 15.0,
      M_PI / 2.0, M_PI / 2.0;

  BenchmarkCase bc;
  bc.sys = LinSys(std::move(a), std::move(b), std::move(e), u, w);
  bc.spec.target = HPolytope(ct.transpose(), std::move(d));
  bc.spec.horizon = Horizon::time_interval(0.0, 0.5);
  bc.spec.sigma = 200;
  return bc;
}

Matrix terminal_set_generators() {
  Matrix g(12, 12);
  // clang-format off
  g << -0.0042,  0.0455,  0.0064, -0.0694,  0,       0,       0.0001, -0.0004,  0,       0,      -0.0002, -0.0004,
        0.0455,  0.0042,  0.0694,  0.0064,  0,       0,       0.0004,  0.0001,  0,       0,      -0.0004,  0.0002,
        0,       0,       0,       0,      -0.0370,  0.0377,  0,       0,       0,       0,       0,       0,
        0.0086, -0.0924,  0.0031, -0.0331,  0,       0,       0.0008, -0.0022,  0,       0,      -0.0003, -0.0006,
       -0.0924, -0.0086,  0.0331,  0.0031,  0,       0,       0.0022,  0.0008,  0,       0,      -0.0006,  0.0003,
        0,       0,       0,       0,       0.0491,  0.0284,  0,       0,       0,       0,       0,       0,
       -0.0044, -0.0004,  0.0083,  0.0008,  0,       0,       0.0088,  0.0032,  0,       0,       0.0046, -0.0023,
        0.0004, -0.0044,  0.0008, -0.0083,  0,       0,       0.0032, -0.0088,  0,       0,       0.0023,  0.0046,
        0,       0,       0,       0,       0,       0,       0,       0,       0.0045, -0.0005,  0,       0,
       -0.0091, -0.0008,  0.0071,  0.0007,  0,       0,      -0.0244, -0.0088,  0,       0,       0.0016, -0.0008,
        0.0008, -0.0091,  0.0007, -0.0071,  0,       0,      -0.0088,  0.0244,  0,       0,       0.0008,  0.0016,
        0,       0,       0,       0,       0,       0,       0,       0,      -0.0019, -0.0011,  0,       0;
  // clang-format on
  return g;
}

BenchmarkCase quadrotor_12d(double zeta, double phi) {
  const json data = load_data_file("quadrotor12d");
  Matrix a = matrix_from_json(data.at("A"));
  Matrix b = matrix_from_json(data.at("B"));
  require(a.rows() == 12 && a.cols() == 12 && b.rows() == 12 && b.cols() == 4,
          "quadrotor12d data file: unexpected matrix shape");
  Matrix e = Matrix::Zero(12, 3);
  e(3, 0) = 1.0;
  e(4, 1) = 1.0;
  e(5, 2) = 1.0;

  Matrix g3(3, 9);
  // clang-format off
  g3 << 1, 0, 0, 1, -1, 1, -1, 0,  0,
        0, 1, 0, 1,  1, 0,  0, 1, -1,
        0, 0, 1, 0,  0, 1,  1, 1,  1;
  // clang-format on
  g3 *= 0.2;

  Vector uc = Vector::Zero(4);
  uc(0) = 0.5 * (-9.81 + 2.38);
  Matrix ug = Matrix::Zero(4, 10);
  ug(0, 0) = 0.5 * (2.38 + 9.81);
  ug.block(1, 1, 3, 9) = zeta * g3;
  const Zonotope u(uc, ug);
  const Zonotope w(Vector::Zero(3), phi * g3);

  // The square full-rank terminal-set generator matrix converts the
  // parallelotope <0, G> into the polytope |G^-1 x| <= 1.
  const Matrix gx = terminal_set_generators();
  const Matrix gx_inv = gx.fullPivLu().inverse();
  Matrix c(24, 12);
  c << gx_inv, -gx_inv;

  BenchmarkCase bc;
  bc.sys = LinSys(std::move(a), std::move(b), std::move(e), u, w);
  bc.spec.target = HPolytope(std::move(c), Vector::Ones(24));
  bc.spec.horizon = Horizon::time_interval(0.0, 1.0);
  bc.spec.sigma = 1000;
  bc.provenance = data.value("provenance", "");
  return bc;
}

BenchmarkCase platoon(int theta, const std::string& target_variant) {
  if (theta < 1) throw std::invalid_argument("platoon: theta must be >= 1");
  const json data = load_data_file("platoon");
  const Matrix a_self = matrix_from_json(data.at("A_self"));
  const Matrix a_prev = matrix_from_json(data.at("A_coupling_prev"));
  const Matrix b_col = matrix_from_json(data.at("b_column"));
  const Matrix e_col = matrix_from_json(data.at("e_column_first"));
  require(a_self.rows() == 3 && a_self.cols() == 3, "platoon data: A_self shape");

  const int n = 3 * theta;
  Matrix a = Matrix::Zero(n, n);
  Matrix b = Matrix::Zero(n, theta);
  Matrix e = Matrix::Zero(n, 1);
  for (int j = 0; j < theta; ++j) {
    a.block(3 * j, 3 * j, 3, 3) = a_self;
    if (j > 0) a.block(3 * j, 3 * (j - 1), 3, 3) = a_prev;
    b.block(3 * j, j, 3, 1) = b_col;
  }
  e.block(0, 0, 3, 1) = e_col;

  const Zonotope u(Vector::Constant(theta, -2.0), Matrix(Vector::Constant(theta, 3.0).asDiagonal()));
  const Zonotope w(Vector::Zero(1), Matrix(Vector::Constant(1, 0.5).asDiagonal()));

  Matrix ct(3, 7);
  // clang-format off
  ct << 1, -1, -1, 0,  0, 0,  0,
        0,  0, -2, 1, -1, 0,  0,
        0,  0,  0, 0,  0, 1, -1;
  // clang-format on
  Vector d_truck(7);
  if (target_variant == "ea") {
    d_truck << 20.0, 0.0, 0.0, 1.5, 1.5, 1.0, 1.0;
  } else {
    d_truck << 0.0, 20.0, 7.0, 10.0, -3.0, 5.0, -1.0;
  }
  Matrix c = Matrix::Zero(7 * theta, n);
  Vector d(7 * theta);
  for (int j = 0; j < theta; ++j) {
    c.block(7 * j, 3 * j, 7, 3) = ct.transpose();
    d.segment(7 * j, 7) = d_truck;
  }

  BenchmarkCase bc;
  bc.sys = LinSys(std::move(a), std::move(b), std::move(e), u, w);
  bc.spec.target = HPolytope(std::move(c), std::move(d));
  bc.spec.horizon = Horizon::time_point(2.0);
  bc.spec.sigma = 100;
  bc.provenance = data.value("provenance", "");
  return bc;
}

} // namespace

std::string data_directory() {
  if (const char* env = std::getenv("REACH_DATA_DIR"); env && *env) return env;
  if (std::filesystem::exists("data/platoon.json")) return "data";
#ifdef REACH_SOURCE_DATA_DIR
  return REACH_SOURCE_DATA_DIR;
#else
  return "data";
#endif
}

BenchmarkCase builtin_system(const std::string& name,
                             const std::map<std::string, double>& params,
                             const std::string& target_variant) {
  if (name == "pursuit-evasion") return pursuit_evasion();
  if (name == "quadrotor-6d")
    return quadrotor_6d(param(params, "zeta", 1.0), param(params, "phi", 1.0));
  if (name == "quadrotor-12d")
    return quadrotor_12d(param(params, "zeta", 1.0), param(params, "phi", 0.0));
  if (name == "platoon")
    return platoon(static_cast<int>(param(params, "theta", 5.0)),
                   target_variant.empty() ? "ae" : target_variant);
  throw std::invalid_argument("unknown builtin system: " + name);
}

} // namespace reach
