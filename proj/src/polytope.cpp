#include "reach/polytope.hpp"

#include <cmath>
#include <limits>

#include "reach/lp.hpp"

namespace reach {
namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

HPolytope HPolytope::box(const Vector& lo, const Vector& hi) {
  const auto n = lo.size();
  require(hi.size() == n, "HPolytope::box: bound length mismatch");
  Matrix c(2 * n, n);
  c << Matrix::Identity(n, n), -Matrix::Identity(n, n);
  Vector d(2 * n);
  d << hi, -lo;
  return HPolytope(std::move(c), std::move(d));
}

double support(const HPolytope& p, const Vector& l) {
  require(l.size() == p.C.cols(), "support: direction dimension");
  LPProblem lp = LPProblem::maximize(l);
  lp.ineq_lhs = p.C;
  lp.ineq_rhs = p.d;
  const LPOutcome out = solve_lp(lp);
  switch (out.status) {
    case LPStatus::Optimal: return out.value;
    case LPStatus::Unbounded: return kInf;
    case LPStatus::Infeasible: return -kInf;
  }
  throw NumericalFailure("support: unreachable status");
}

double support(const Zonotope& z, const Vector& l) { return z.support(l); }
double support(const ConstrainedZonotope& cz, const Vector& l) { return cz.support(l); }
double support(const Ball& b, const Vector& l) { return b.support(l); }

bool is_empty(const HPolytope& p) {
  LPProblem lp = LPProblem::maximize(Vector::Zero(p.dim()));
  lp.ineq_lhs = p.C;
  lp.ineq_rhs = p.d;
  return solve_lp(lp).status == LPStatus::Infeasible;
}

HPolytope minkowski_difference(const HPolytope& p, const SupportFn& rho) {
  Vector d_new(p.num_constraints());
  for (int j = 0; j < p.num_constraints(); ++j) {
    const double s = rho(p.C.row(j).transpose());
    if (s == -kInf) throw EmptySetError("minkowski_difference: empty subtrahend");
    d_new(j) = p.d(j) - s;
  }
  return HPolytope(p.C, std::move(d_new));
}

HPolytope minkowski_difference(const HPolytope& p, const Zonotope& s) {
  return minkowski_difference(p, SupportFn([&](const Vector& l) { return s.support(l); }));
}

HPolytope minkowski_difference(const HPolytope& p, const ConstrainedZonotope& s) {
  return minkowski_difference(p, SupportFn([&](const Vector& l) { return s.support(l); }));
}

HPolytope minkowski_difference(const HPolytope& p, const Ball& s) {
  return minkowski_difference(p, SupportFn([&](const Vector& l) { return s.support(l); }));
}

HPolytope outer_minkowski_sum(const HPolytope& p, const Zonotope& z) {
  require(p.dim() == z.dim(), "outer_minkowski_sum: dimension mismatch");
  Vector d_new(p.num_constraints());
  for (int j = 0; j < p.num_constraints(); ++j)
    d_new(j) = p.d(j) + z.support(p.C.row(j).transpose());
  return HPolytope(p.C, std::move(d_new));
}

HPolytope linear_map(const Matrix& m, const HPolytope& p) {
  require(m.rows() == m.cols() && m.cols() == p.dim(), "linear_map: square matrix required");
  Eigen::FullPivLU<Matrix> lu(m);
  if (!lu.isInvertible()) throw SingularMatrix("linear_map: singular matrix");
  const Matrix inv = lu.inverse();
  const double cond = m.cwiseAbs().rowwise().sum().maxCoeff() *
                      inv.cwiseAbs().rowwise().sum().maxCoeff();
  if (!(cond < 1e12)) throw SingularMatrix("linear_map: matrix condition above 1e12");
  return linear_map(m, p, inv);
}

HPolytope linear_map(const Matrix& m, const HPolytope& p, const Matrix& m_inverse) {
  require(m.rows() == p.dim() && m_inverse.rows() == p.dim(),
          "linear_map: inverse dimension mismatch");
  return HPolytope(p.C * m_inverse, p.d);
}

HPolytope translate(const HPolytope& p, const Vector& v) {
  return HPolytope(p.C, p.d + p.C * v);
}

Interval bounding_box(const HPolytope& p) {
  const int n = p.dim();
  Vector lo(n), hi(n);
  for (int i = 0; i < n; ++i) {
    Vector e = Vector::Zero(n);
    e(i) = 1.0;
    const double up = support(p, e);
    if (up == -kInf) throw EmptySetError("bounding_box: empty polytope");
    if (up == kInf) throw UnboundedSetError("bounding_box: unbounded polytope");
    const double down = support(p, -e);
    if (down == kInf) throw UnboundedSetError("bounding_box: unbounded polytope");
    hi(i) = up;
    lo(i) = -down;
  }
  return Interval(std::move(lo), std::move(hi));
}

ConstrainedZonotope to_constrained_zonotope(const HPolytope& p) {
  return to_constrained_zonotope(p, Zonotope::from_interval(bounding_box(p)));
}

ConstrainedZonotope to_constrained_zonotope(const HPolytope& p, const Zonotope& box_z) {
  require(p.dim() == box_z.dim(), "to_constrained_zonotope: dimension mismatch");
  const int n = p.dim();
  const int h = p.num_constraints();
  const int gamma = box_z.num_generators();

  Vector o(h);
  for (int j = 0; j < h; ++j) {
    o(j) = -box_z.support(-p.C.row(j).transpose());
    if (o(j) > p.d(j) + 1e-12 * std::max(1.0, std::abs(p.d(j))))
      return ConstrainedZonotope::empty(n); // enclosure misses halfspace j
  }

  Matrix g(n, gamma + h);
  g << box_z.G, Matrix::Zero(n, h);
  Matrix a(h, gamma + h);
  a << p.C * box_z.G, Matrix(Vector(0.5 * (o - p.d)).asDiagonal());
  Vector b = 0.5 * (p.d + o) - p.C * box_z.c;
  return {box_z.c, std::move(g), std::move(a), std::move(b)};
}

ConstrainedZonotope polytope_intersection(const ConstrainedZonotope& cz,
                                          const HPolytope& p) {
  require(cz.dim() == p.dim(), "polytope_intersection: dimension mismatch");
  ConstrainedZonotope out = cz;
  for (int j = 0; j < p.num_constraints(); ++j) {
    out = halfspace_intersection(out, p.C.row(j).transpose(), p.d(j));
    if (out.num_generators() == 0 && out.num_constraints() == 1 && out.con_rhs(0) == 1.0)
      return out; // canonical empty; remaining rows cannot help
  }
  return out;
}

namespace {
bool contained_in_impl(const SupportFn& rho, const HPolytope& p, double tol) {
  for (int j = 0; j < p.num_constraints(); ++j) {
    const double s = rho(p.C.row(j).transpose());
    if (s == kInf) return false;
    if (s > p.d(j) + tol) return false;
  }
  return true;
}
} // namespace

bool contained_in(const Zonotope& s, const HPolytope& p, double tol) {
  return contained_in_impl([&](const Vector& l) { return s.support(l); }, p, tol);
}

bool contained_in(const ConstrainedZonotope& s, const HPolytope& p, double tol) {
  return contained_in_impl([&](const Vector& l) { return s.support(l); }, p, tol);
}

bool contained_in(const HPolytope& s, const HPolytope& p, double tol) {
  return contained_in_impl([&](const Vector& l) { return support(s, l); }, p, tol);
}

} // namespace reach
