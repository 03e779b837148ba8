#ifndef REACH_CONZONO_HPP_
#define REACH_CONZONO_HPP_

#include "reach/interval.hpp"
#include "reach/types.hpp"
#include "reach/zonotope.hpp"

namespace reach {

/// Constrained zonotope <c, G, A, b> = { c + G a | A a = b, a in [-1,1]^gamma }.
///
/// Emptiness is a queryable state (feasibility LP over the factors), not a
/// structural invariant.
struct ConstrainedZonotope {
  Vector c;
  Matrix G;
  Matrix con_lhs; // h_c x gamma
  Vector con_rhs; // h_c

  ConstrainedZonotope() = default;
  ConstrainedZonotope(Vector center, Matrix generators, Matrix lhs, Vector rhs)
      : c(std::move(center)), G(std::move(generators)), con_lhs(std::move(lhs)),
        con_rhs(std::move(rhs)) {
    if (G.size() == 0) G = Matrix(c.size(), 0);
    if (con_lhs.size() == 0) con_lhs = Matrix(con_rhs.size(), G.cols());
    require(G.rows() == c.size(), "ConstrainedZonotope: generator row count");
    require(con_lhs.cols() == G.cols(), "ConstrainedZonotope: constraint column count");
    require(con_lhs.rows() == con_rhs.size(), "ConstrainedZonotope: constraint row count");
    if (!c.allFinite() || !G.allFinite() || !con_lhs.allFinite() || !con_rhs.allFinite())
      throw std::invalid_argument("ConstrainedZonotope: non-finite entry");
  }

  static ConstrainedZonotope from(const Zonotope& z) {
    return {z.c, z.G, Matrix(0, z.G.cols()), Vector(0)};
  }
  static ConstrainedZonotope point(Vector center) {
    const auto n = center.size();
    return {std::move(center), Matrix(n, 0), Matrix(0, 0), Vector(0)};
  }
  /// Canonically empty set of the given dimension (infeasible constraint).
  static ConstrainedZonotope empty(int dim) {
    return {Vector::Zero(dim), Matrix(dim, 0), Matrix::Zero(1, 0), Vector::Ones(1)};
  }

  int dim() const { return static_cast<int>(c.size()); }
  int num_generators() const { return static_cast<int>(G.cols()); }
  int num_constraints() const { return static_cast<int>(con_lhs.rows()); }

  Vector at(const Vector& factors) const {
    require(factors.size() == G.cols(), "ConstrainedZonotope::at: factor count");
    return c + G * factors;
  }

  /// LP max of l'(c + G a); -inf when empty.
  double support(const Vector& l) const;
  bool is_empty() const;
  /// Feasibility of { G a = x - c, A a = b, a in box }.
  bool contains_point(const Vector& x, double tol = 1e-9) const;
};

ConstrainedZonotope linear_map(const Matrix& m, const ConstrainedZonotope& cz);
ConstrainedZonotope minkowski_sum(const ConstrainedZonotope& cz1,
                                  const ConstrainedZonotope& cz2);
ConstrainedZonotope minkowski_sum(const ConstrainedZonotope& cz, const Zonotope& z);
ConstrainedZonotope negate(const ConstrainedZonotope& cz);

/// Exact intersection with { x | row'x <= rhs } via the lifted-generator
/// construction; the result may be empty.
ConstrainedZonotope halfspace_intersection(const ConstrainedZonotope& cz,
                                           const Vector& row, double rhs);

/// Exact convex hull via the lifted-factor construction; the defining
/// contract is rho(result, l) = max(rho(cz1, l), rho(cz2, l)).
ConstrainedZonotope convex_hull(const ConstrainedZonotope& cz1,
                                const ConstrainedZonotope& cz2);

/// Enclosure: interval-matrix product applied to (c, G), constraints kept,
/// the appended radius generators unconstrained.
ConstrainedZonotope interval_matrix_map(const IntervalMatrix& im,
                                        const ConstrainedZonotope& cz);

} // namespace reach

#endif // REACH_CONZONO_HPP_
