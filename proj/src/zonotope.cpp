#include "reach/zonotope.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

namespace reach {

Zonotope Zonotope::normalized(double tol) const {
  std::vector<int> keep;
  for (int j = 0; j < G.cols(); ++j)
    if (G.col(j).lpNorm<Eigen::Infinity>() > tol) keep.push_back(j);
  if (keep.size() == static_cast<size_t>(G.cols())) return *this;
  Matrix g(dim(), keep.size());
  for (size_t k = 0; k < keep.size(); ++k) g.col(k) = G.col(keep[k]);
  return Zonotope(c, std::move(g));
}

Zonotope linear_map(const Matrix& m, const Zonotope& z) {
  require(m.cols() == z.c.size(), "linear_map: matrix/zonotope dimension");
  return Zonotope(m * z.c, m * z.G);
}

Zonotope minkowski_sum(const Zonotope& z1, const Zonotope& z2) {
  require(z1.dim() == z2.dim(), "minkowski_sum: dimension mismatch");
  Matrix g(z1.dim(), z1.num_generators() + z2.num_generators());
  g << z1.G, z2.G;
  return Zonotope(z1.c + z2.c, std::move(g));
}

Zonotope negate(const Zonotope& z) { return Zonotope(-z.c, -z.G); }

Zonotope scale(const Zonotope& z, double factor) {
  return Zonotope(factor * z.c, factor * z.G);
}

Zonotope interval_matrix_map(const IntervalMatrix& im, const Zonotope& z) {
  require(im.cols() == z.c.size(), "interval_matrix_map: dimension mismatch");
  const Matrix mc = im.center();
  const Matrix mr = im.radius();
  const Vector nu = z.c.cwiseAbs() + z.G.cwiseAbs().rowwise().sum();
  const Vector rad = mr * nu;
  Matrix g(im.rows(), z.num_generators() + im.rows());
  g << mc * z.G, Matrix(rad.asDiagonal());
  return Zonotope(mc * z.c, std::move(g));
}

Zonotope reduce_order(const Zonotope& z, double max_order) {
  if (max_order < 1.0) throw std::invalid_argument("reduce_order: max_order < 1");
  const int n = z.dim();
  const int gamma = z.num_generators();
  const int budget = static_cast<int>(max_order * n);
  if (gamma <= budget) return z;

  // Girard criterion: bundle generators with small ||g||_1 - ||g||_inf.
  std::vector<int> idx(gamma);
  std::iota(idx.begin(), idx.end(), 0);
  Vector score(gamma);
  for (int j = 0; j < gamma; ++j)
    score(j) = z.G.col(j).lpNorm<1>() - z.G.col(j).lpNorm<Eigen::Infinity>();
  std::stable_sort(idx.begin(), idx.end(),
                   [&](int a, int b) { return score(a) < score(b); });

  const int keep = std::max(0, budget - n);
  const int reduce = gamma - keep;
  Vector box = Vector::Zero(n);
  Matrix g(n, keep + n);
  for (int k = 0; k < reduce; ++k) box += z.G.col(idx[k]).cwiseAbs();
  for (int k = 0; k < keep; ++k) g.col(k) = z.G.col(idx[reduce + k]);
  g.rightCols(n) = Matrix(box.asDiagonal());
  return Zonotope(z.c, std::move(g)).normalized();
}

} // namespace reach
