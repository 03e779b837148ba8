#include "reach/serialization.hpp"

namespace reach {
namespace {

std::string kind_name(SolutionKind kind) {
  switch (kind) {
    case SolutionKind::AEOuter: return "ae-outer";
    case SolutionKind::AEInner: return "ae-inner";
    case SolutionKind::EAOuter: return "ea-outer";
    case SolutionKind::EAInner: return "ea-inner";
  }
  return "?";
}

} // namespace

Json to_json(const Vector& v) {
  Json j = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) j.push_back(v(i));
  return j;
}

Json to_json(const Matrix& m) {
  Json j = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    j.push_back(std::move(row));
  }
  return j;
}

Vector vector_from_json(const Json& j) {
  Vector v(j.size());
  for (size_t i = 0; i < j.size(); ++i) v(i) = j.at(i).get<double>();
  return v;
}

Matrix matrix_from_json(const Json& j) {
  const size_t rows = j.size();
  const size_t cols = rows == 0 ? 0 : j.at(0).size();
  Matrix m(rows, cols);
  for (size_t i = 0; i < rows; ++i) {
    if (j.at(i).size() != cols)
      throw std::invalid_argument("matrix_from_json: ragged rows");
    for (size_t k = 0; k < cols; ++k) m(i, k) = j.at(i).at(k).get<double>();
  }
  return m;
}

Json to_json(const Interval& iv) {
  return Json{{"type", "interval"}, {"lo", to_json(iv.lo)}, {"hi", to_json(iv.hi)}};
}

Json to_json(const IntervalMatrix& im) {
  return Json{{"type", "interval_matrix"}, {"lo", to_json(im.lo)}, {"hi", to_json(im.hi)}};
}

Json to_json(const Zonotope& z) {
  return Json{{"type", "zonotope"}, {"center", to_json(z.c)}, {"generators", to_json(z.G)}};
}

Json to_json(const ConstrainedZonotope& cz) {
  return Json{{"type", "constrained_zonotope"},
              {"center", to_json(cz.c)},
              {"generators", to_json(cz.G)},
              {"con_lhs", to_json(cz.con_lhs)},
              {"con_rhs", to_json(cz.con_rhs)}};
}

Json to_json(const HPolytope& p) {
  return Json{{"type", "hpolytope"}, {"con_lhs", to_json(p.C)}, {"con_rhs", to_json(p.d)}};
}

Json to_json(const Ball& b) {
  return Json{{"type", "ball"}, {"radius", b.radius}, {"dim", b.n}};
}

namespace {
void expect_type(const Json& j, const std::string& type) {
  if (j.value("type", "") != type)
    throw std::invalid_argument("set json: expected type '" + type + "'");
}
} // namespace

Interval interval_from_json(const Json& j) {
  expect_type(j, "interval");
  return Interval(vector_from_json(j.at("lo")), vector_from_json(j.at("hi")));
}

IntervalMatrix interval_matrix_from_json(const Json& j) {
  expect_type(j, "interval_matrix");
  return IntervalMatrix(matrix_from_json(j.at("lo")), matrix_from_json(j.at("hi")));
}

Zonotope zonotope_from_json(const Json& j) {
  expect_type(j, "zonotope");
  Matrix g = matrix_from_json(j.at("generators"));
  Vector c = vector_from_json(j.at("center"));
  if (g.size() == 0) g = Matrix(c.size(), 0);
  return Zonotope(std::move(c), std::move(g));
}

ConstrainedZonotope conzono_from_json(const Json& j) {
  expect_type(j, "constrained_zonotope");
  Vector c = vector_from_json(j.at("center"));
  Matrix g = matrix_from_json(j.at("generators"));
  Matrix a = matrix_from_json(j.at("con_lhs"));
  Vector b = vector_from_json(j.at("con_rhs"));
  if (g.size() == 0) g = Matrix(c.size(), 0);
  if (a.size() == 0) a = Matrix(b.size(), g.cols());
  return ConstrainedZonotope(std::move(c), std::move(g), std::move(a), std::move(b));
}

HPolytope hpolytope_from_json(const Json& j) {
  expect_type(j, "hpolytope");
  return HPolytope(matrix_from_json(j.at("con_lhs")), vector_from_json(j.at("con_rhs")));
}

Ball ball_from_json(const Json& j) {
  expect_type(j, "ball");
  return Ball(j.at("radius").get<double>(), j.at("dim").get<int>());
}

Json to_json(const TimePointResult& res) {
  Json j;
  j["kind"] = kind_name(res.kind);
  j["horizon"] = Json{{"t", res.t}};
  j["empty"] = res.empty;
  if (!res.empty_stage.empty()) j["empty_stage"] = res.empty_stage;
  if (res.poly) j["set"] = to_json(*res.poly);
  if (res.cz) j["set"] = to_json(*res.cz);
  if (res.witness) j["witness_blocks"] = res.witness->blocks.size();
  Json log = Json::object();
  for (const auto& [name, value] : res.log.entries) log[name] = value;
  j["diagnostics"] = std::move(log);
  return j;
}

Json to_json(const TimeIntervalResult& res) {
  Json j;
  j["kind"] = kind_name(res.kind);
  j["horizon"] = Json{{"t0", res.grid.t0}, {"t_end", res.grid.t_end}};
  j["steps"] = res.grid.sigma;
  Json pieces = Json::array();
  for (size_t k = 0; k < res.pieces.size(); ++k) {
    const PieceResult& pr = res.pieces[k];
    Json pj;
    pj["k"] = k;
    pj["t0"] = res.grid.point(static_cast<int>(k));
    pj["t1"] = res.grid.point(static_cast<int>(k) + 1);
    pj["empty"] = pr.empty();
    if (pr.empty()) {
      pj["empty_stage"] = pr.empty_stage;
    } else {
      pj["set"] = to_json(*pr.set);
      if (pr.witness) pj["witness_blocks"] = pr.witness->blocks.size();
    }
    pieces.push_back(std::move(pj));
  }
  j["pieces"] = std::move(pieces);
  Json log = Json::object();
  for (const auto& [name, value] : res.log.entries) log[name] = value;
  j["diagnostics"] = std::move(log);
  return j;
}

} // namespace reach
