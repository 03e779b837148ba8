#ifndef REACH_ZONOTOPE_HPP_
#define REACH_ZONOTOPE_HPP_

#include "reach/interval.hpp"
#include "reach/types.hpp"

namespace reach {

/// Zonotope <c, G> = { c + G a | a in [-1,1]^gamma }. gamma = 0 encodes a
/// point.
struct Zonotope {
  Vector c;
  Matrix G;

  Zonotope() = default;
  Zonotope(Vector center, Matrix generators)
      : c(std::move(center)), G(std::move(generators)) {
    require(G.size() == 0 || G.rows() == c.size(), "Zonotope: generator row count");
    if (G.size() == 0) G = Matrix(c.size(), 0);
    if (!c.allFinite() || !G.allFinite())
      throw std::invalid_argument("Zonotope: non-finite entry");
  }

  static Zonotope point(Vector center) {
    const auto n = center.size();
    return Zonotope(std::move(center), Matrix(n, 0));
  }
  static Zonotope from_interval(const Interval& iv) {
    return Zonotope(iv.center(), Matrix(iv.radius().asDiagonal()));
  }

  int dim() const { return static_cast<int>(c.size()); }
  int num_generators() const { return static_cast<int>(G.cols()); }
  double order() const { return dim() == 0 ? 0.0 : double(num_generators()) / dim(); }

  /// rho(Z, l) = l'c + sum_i |l'G_i|, exact.
  double support(const Vector& l) const {
    require(l.size() == c.size(), "Zonotope::support: direction dimension");
    return l.dot(c) + (l.transpose() * G).cwiseAbs().sum();
  }

  Vector at(const Vector& factors) const {
    require(factors.size() == G.cols(), "Zonotope::at: factor count");
    return c + G * factors;
  }

  Interval bounding_box() const {
    Vector r = G.cwiseAbs().rowwise().sum();
    return Interval(c - r, c + r);
  }

  /// Drops generator columns with norm below tol.
  Zonotope normalized(double tol = 1e-14) const;
};

Zonotope linear_map(const Matrix& m, const Zonotope& z);
Zonotope minkowski_sum(const Zonotope& z1, const Zonotope& z2);
Zonotope negate(const Zonotope& z);
Zonotope scale(const Zonotope& z, double factor);

/// Enclosure of {M z | M in im, z in z}: <Mc*c, [Mc*G diag(Mr*nu)]> with
/// Mc/Mr the interval center/radius and nu = |c| + sum_i |G_i|.
Zonotope interval_matrix_map(const IntervalMatrix& im, const Zonotope& z);

/// Enclosing zonotope with at most max_order * dim generators: generators
/// sorted by a norm criterion, smallest bundled into an interval hull.
Zonotope reduce_order(const Zonotope& z, double max_order);

} // namespace reach

#endif // REACH_ZONOTOPE_HPP_
