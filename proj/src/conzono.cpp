#include "reach/conzono.hpp"

#include <cmath>
#include <limits>

#include "reach/lp.hpp"

namespace reach {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Factor box -1 <= a <= 1 as inequality rows.
LPProblem factor_lp(const ConstrainedZonotope& cz, const Vector& objective) {
  const int gamma = cz.num_generators();
  LPProblem p = LPProblem::maximize(objective);
  p.ineq_lhs = Matrix(2 * gamma, gamma);
  p.ineq_lhs << Matrix::Identity(gamma, gamma), -Matrix::Identity(gamma, gamma);
  p.ineq_rhs = Vector::Ones(2 * gamma);
  p.eq_lhs = cz.con_lhs;
  p.eq_rhs = cz.con_rhs;
  return p;
}

} // namespace

double ConstrainedZonotope::support(const Vector& l) const {
  require(l.size() == c.size(), "ConstrainedZonotope::support: direction dimension");
  const LPOutcome out = solve_lp(factor_lp(*this, G.transpose() * l));
  switch (out.status) {
    case LPStatus::Optimal: return l.dot(c) + out.value;
    case LPStatus::Infeasible: return -kInf;
    default: throw NumericalFailure("cz support: unbounded factor LP");
  }
}

bool ConstrainedZonotope::is_empty() const {
  const LPOutcome out = solve_lp(factor_lp(*this, Vector::Zero(num_generators())));
  return out.status == LPStatus::Infeasible;
}

bool ConstrainedZonotope::contains_point(const Vector& x, double tol) const {
  require(x.size() == c.size(), "contains_point: dimension mismatch");
  const int gamma = num_generators();
  LPProblem p = LPProblem::maximize(Vector::Zero(gamma));
  p.ineq_lhs = Matrix(2 * gamma, gamma);
  p.ineq_lhs << Matrix::Identity(gamma, gamma), -Matrix::Identity(gamma, gamma);
  p.ineq_rhs = Vector::Ones(2 * gamma);
  p.eq_lhs = Matrix(num_constraints() + dim(), gamma);
  p.eq_lhs << con_lhs, G;
  p.eq_rhs = Vector(num_constraints() + dim());
  p.eq_rhs << con_rhs, x - c;
  (void)tol; // feasibility tolerance lives in the LP backend
  return solve_lp(p).status == LPStatus::Optimal;
}

ConstrainedZonotope linear_map(const Matrix& m, const ConstrainedZonotope& cz) {
  require(m.cols() == cz.c.size(), "linear_map: matrix/set dimension");
  return {m * cz.c, m * cz.G, cz.con_lhs, cz.con_rhs};
}

ConstrainedZonotope minkowski_sum(const ConstrainedZonotope& cz1,
                                  const ConstrainedZonotope& cz2) {
  require(cz1.dim() == cz2.dim(), "minkowski_sum: dimension mismatch");
  const int g1 = cz1.num_generators(), g2 = cz2.num_generators();
  const int h1 = cz1.num_constraints(), h2 = cz2.num_constraints();
  Matrix g(cz1.dim(), g1 + g2);
  g << cz1.G, cz2.G;
  Matrix a = Matrix::Zero(h1 + h2, g1 + g2);
  a.topLeftCorner(h1, g1) = cz1.con_lhs;
  a.bottomRightCorner(h2, g2) = cz2.con_lhs;
  Vector b(h1 + h2);
  b << cz1.con_rhs, cz2.con_rhs;
  return {cz1.c + cz2.c, std::move(g), std::move(a), std::move(b)};
}

ConstrainedZonotope minkowski_sum(const ConstrainedZonotope& cz, const Zonotope& z) {
  return minkowski_sum(cz, ConstrainedZonotope::from(z));
}

ConstrainedZonotope negate(const ConstrainedZonotope& cz) {
  return {-cz.c, -cz.G, cz.con_lhs, cz.con_rhs};
}

ConstrainedZonotope halfspace_intersection(const ConstrainedZonotope& cz,
                                           const Vector& row, double rhs) {
  require(row.size() == cz.c.size(), "halfspace_intersection: dimension mismatch");
  const double min_val = -cz.support(-row);
  if (min_val == kInf) return ConstrainedZonotope::empty(cz.dim()); // empty input
  if (rhs < min_val - 1e-9 * std::max(1.0, std::abs(min_val)))
    return ConstrainedZonotope::empty(cz.dim()); // separated halfspace

  const int gamma = cz.num_generators();
  const int hc = cz.num_constraints();
  Matrix g(cz.dim(), gamma + 1);
  g << cz.G, Vector::Zero(cz.dim());
  Matrix a = Matrix::Zero(hc + 1, gamma + 1);
  a.topLeftCorner(hc, gamma) = cz.con_lhs;
  a.block(hc, 0, 1, gamma) = row.transpose() * cz.G;
  a(hc, gamma) = 0.5 * (rhs - min_val);
  Vector b(hc + 1);
  b << cz.con_rhs, 0.5 * (rhs + min_val) - row.dot(cz.c);
  return {cz.c, std::move(g), std::move(a), std::move(b)};
}

ConstrainedZonotope convex_hull(const ConstrainedZonotope& cz1,
                                const ConstrainedZonotope& cz2) {
  require(cz1.dim() == cz2.dim(), "convex_hull: dimension mismatch");
  if (cz1.is_empty() || cz2.is_empty())
    throw EmptySetError("convex_hull: empty input set");

  const int n = cz1.dim();
  const int g1 = cz1.num_generators(), g2 = cz2.num_generators();
  const int h1 = cz1.num_constraints(), h2 = cz2.num_constraints();
  const int gs = 2 * (g1 + g2); // slack factors for the |beta| <= lambda couplings

  // Factors: [beta1 (g1), beta2 (g2), lambda' (1), slack (gs)] with
  // lambda' = 2*lambda - 1. A point is
  //   (c1+c2)/2 + (c1-c2)/2 lambda' + G1 beta1 + G2 beta2,
  // |beta1| <= (1+lambda')/2, |beta2| <= (1-lambda')/2, and the original
  // constraints scaled by lambda and 1-lambda.
  Matrix g = Matrix::Zero(n, g1 + g2 + 1 + gs);
  g.leftCols(g1) = cz1.G;
  g.middleCols(g1, g2) = cz2.G;
  g.col(g1 + g2) = 0.5 * (cz1.c - cz2.c);

  const int rows = h1 + h2 + gs;
  Matrix a = Matrix::Zero(rows, g1 + g2 + 1 + gs);
  Vector b(rows);
  a.topLeftCorner(h1, g1) = cz1.con_lhs;
  a.block(0, g1 + g2, h1, 1) = -0.5 * cz1.con_rhs;
  b.head(h1) = 0.5 * cz1.con_rhs;
  a.block(h1, g1, h2, g2) = cz2.con_lhs;
  a.block(h1, g1 + g2, h2, 1) = 0.5 * cz2.con_rhs;
  b.segment(h1, h2) = 0.5 * cz2.con_rhs;

  // beta1_i - lambda'/2 + s = -1/2 and -beta1_i - lambda'/2 + s = -1/2
  // encode |beta1_i| <= (1+lambda')/2; analogous rows couple beta2.
  int r = h1 + h2;
  int s = g1 + g2 + 1;
  for (int i = 0; i < g1; ++i) {
    a(r, i) = 1.0;
    a(r, g1 + g2) = -0.5;
    a(r, s) = 1.0;
    b(r) = -0.5;
    ++r; ++s;
    a(r, i) = -1.0;
    a(r, g1 + g2) = -0.5;
    a(r, s) = 1.0;
    b(r) = -0.5;
    ++r; ++s;
  }
  for (int i = 0; i < g2; ++i) {
    a(r, g1 + i) = 1.0;
    a(r, g1 + g2) = 0.5;
    a(r, s) = 1.0;
    b(r) = -0.5;
    ++r; ++s;
    a(r, g1 + i) = -1.0;
    a(r, g1 + g2) = 0.5;
    a(r, s) = 1.0;
    b(r) = -0.5;
    ++r; ++s;
  }

  return {0.5 * (cz1.c + cz2.c), std::move(g), std::move(a), std::move(b)};
}

ConstrainedZonotope interval_matrix_map(const IntervalMatrix& im,
                                        const ConstrainedZonotope& cz) {
  require(im.cols() == cz.c.size(), "interval_matrix_map: dimension mismatch");
  const Matrix mc = im.center();
  const Matrix mr = im.radius();
  const Vector nu = cz.c.cwiseAbs() + cz.G.cwiseAbs().rowwise().sum();
  const Vector rad = mr * nu;
  const int gamma = cz.num_generators();
  const int extra = static_cast<int>(im.rows());
  Matrix g(im.rows(), gamma + extra);
  g << mc * cz.G, Matrix(rad.asDiagonal());
  Matrix a = Matrix::Zero(cz.num_constraints(), gamma + extra);
  a.leftCols(gamma) = cz.con_lhs;
  return {mc * cz.c, std::move(g), std::move(a), cz.con_rhs};
}

} // namespace reach
