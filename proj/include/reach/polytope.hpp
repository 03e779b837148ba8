#ifndef REACH_POLYTOPE_HPP_
#define REACH_POLYTOPE_HPP_

#include <functional>

#include "reach/conzono.hpp"
#include "reach/interval.hpp"
#include "reach/types.hpp"
#include "reach/zonotope.hpp"

namespace reach {

/// Polytope in halfspace representation { x | C x <= d }. Emptiness and
/// unboundedness are queryable states, not construction errors.
struct HPolytope {
  Matrix C;
  Vector d;

  HPolytope() = default;
  HPolytope(Matrix con_lhs, Vector con_rhs)
      : C(std::move(con_lhs)), d(std::move(con_rhs)) {
    require(C.rows() == d.size(), "HPolytope: row count mismatch");
    if (!C.allFinite() || !d.allFinite())
      throw std::invalid_argument("HPolytope: non-finite entry");
    for (Eigen::Index i = 0; i < C.rows(); ++i)
      if (C.row(i).lpNorm<Eigen::Infinity>() == 0.0)
        throw std::invalid_argument("HPolytope: all-zero constraint row");
  }

  static HPolytope box(const Vector& lo, const Vector& hi);
  static HPolytope from_interval(const Interval& iv) { return box(iv.lo, iv.hi); }

  int dim() const { return static_cast<int>(C.cols()); }
  int num_constraints() const { return static_cast<int>(C.rows()); }

  bool contains_point(const Vector& x, double tol = 1e-9) const {
    return ((C * x - d).array() <= tol).all();
  }
};

/// Hyperball { x | ||x||_2 <= radius }.
struct Ball {
  double radius = 0.0;
  int n = 0;

  Ball() = default;
  Ball(double radius_, int dim_) : radius(radius_), n(dim_) {
    if (radius < 0.0) throw std::invalid_argument("Ball: negative radius");
  }
  double support(const Vector& l) const { return radius * l.norm(); }
};

/// LP maximum of l'x over P; +inf when unbounded in l, -inf when P is empty.
double support(const HPolytope& p, const Vector& l);
double support(const Zonotope& z, const Vector& l);
double support(const ConstrainedZonotope& cz, const Vector& l);
double support(const Ball& b, const Vector& l);

bool is_empty(const HPolytope& p);

using SupportFn = std::function<double(const Vector&)>;

/// P (-) S with d~_j = d_j - rho(S, C_j'); exact for H-polytopes. The result
/// may be empty.
HPolytope minkowski_difference(const HPolytope& p, const SupportFn& rho);
HPolytope minkowski_difference(const HPolytope& p, const Zonotope& s);
HPolytope minkowski_difference(const HPolytope& p, const ConstrainedZonotope& s);
HPolytope minkowski_difference(const HPolytope& p, const Ball& s);

/// Outer approximation <C, d + d~> of P (+) Z, tight in every row normal.
HPolytope outer_minkowski_sum(const HPolytope& p, const Zonotope& z);

/// M P = <C M^-1, d> for invertible M (condition estimate below 1e12).
HPolytope linear_map(const Matrix& m, const HPolytope& p);
HPolytope linear_map(const Matrix& m, const HPolytope& p, const Matrix& m_inverse);

HPolytope translate(const HPolytope& p, const Vector& v);

/// Tightest axis-aligned enclosure, via 2n support LPs. Throws EmptySetError
/// or UnboundedSetError.
Interval bounding_box(const HPolytope& p);

/// Exact polytope-to-constrained-zonotope conversion (bounded, nonempty P).
ConstrainedZonotope to_constrained_zonotope(const HPolytope& p);

/// Same construction with a caller-provided enclosing zonotope (any box
/// enclosing P keeps the conversion exact; a non-enclosing box yields the
/// intersection of P with it).
ConstrainedZonotope to_constrained_zonotope(const HPolytope& p, const Zonotope& box_z);

/// Fold of halfspace_intersection over the rows of P.
ConstrainedZonotope polytope_intersection(const ConstrainedZonotope& cz,
                                          const HPolytope& p);

/// true iff rho(S, C_j') <= d_j + tol for every row.
bool contained_in(const Zonotope& s, const HPolytope& p, double tol = 1e-9);
bool contained_in(const ConstrainedZonotope& s, const HPolytope& p, double tol = 1e-9);
bool contained_in(const HPolytope& s, const HPolytope& p, double tol = 1e-9);

} // namespace reach

#endif // REACH_POLYTOPE_HPP_
