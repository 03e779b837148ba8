#ifndef REACH_INTERVAL_HPP_
#define REACH_INTERVAL_HPP_

#include "reach/types.hpp"

namespace reach {

/// Axis-aligned interval [lo, hi] in R^n, inequalities elementwise.
struct Interval {
  Vector lo;
  Vector hi;

  Interval() = default;
  Interval(Vector lo_, Vector hi_) : lo(std::move(lo_)), hi(std::move(hi_)) {
    require(lo.size() == hi.size(), "Interval: bound length mismatch");
    if (((hi - lo).array() < 0.0).any())
      throw std::invalid_argument("Interval: lo > hi");
  }

  int dim() const { return static_cast<int>(lo.size()); }
  Vector center() const { return 0.5 * (lo + hi); }
  Vector radius() const { return 0.5 * (hi - lo); }
  bool contains(const Vector& x, double tol = 1e-12) const {
    return ((x - lo).array() >= -tol).all() && ((hi - x).array() >= -tol).all();
  }
};

/// Elementwise matrix interval [L, U]; houses the exponential remainder and
/// curvature enclosures.
struct IntervalMatrix {
  Matrix lo;
  Matrix hi;

  IntervalMatrix() = default;
  IntervalMatrix(Matrix lo_, Matrix hi_) : lo(std::move(lo_)), hi(std::move(hi_)) {
    require(lo.rows() == hi.rows() && lo.cols() == hi.cols(),
            "IntervalMatrix: shape mismatch");
    if (((hi - lo).array() < 0.0).any())
      throw std::invalid_argument("IntervalMatrix: lo > hi");
  }

  static IntervalMatrix zero(int rows, int cols) {
    return {Matrix::Zero(rows, cols), Matrix::Zero(rows, cols)};
  }
  static IntervalMatrix point(const Matrix& m) { return {m, m}; }
  /// Symmetric interval [-R, R] around zero, R >= 0 elementwise.
  static IntervalMatrix symmetric(const Matrix& r) { return {-r, r}; }

  Eigen::Index rows() const { return lo.rows(); }
  Eigen::Index cols() const { return lo.cols(); }
  Matrix center() const { return 0.5 * (lo + hi); }
  Matrix radius() const { return 0.5 * (hi - lo); }
  double max_abs() const {
    if (lo.size() == 0) return 0.0;
    return std::max(lo.cwiseAbs().maxCoeff(), hi.cwiseAbs().maxCoeff());
  }

  IntervalMatrix operator+(const IntervalMatrix& other) const {
    return {lo + other.lo, hi + other.hi};
  }
  IntervalMatrix operator*(double s) const {
    return s >= 0.0 ? IntervalMatrix{lo * s, hi * s} : IntervalMatrix{hi * s, lo * s};
  }
};

/// Exact product of a scalar interval [a, b] with a fixed matrix, resolved
/// per entry on the sign of the entry.
inline IntervalMatrix scalar_interval_times(double a, double b, const Matrix& m) {
  Matrix lo(m.rows(), m.cols());
  Matrix hi(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const double x = a * m(i, j);
      const double y = b * m(i, j);
      lo(i, j) = std::min(x, y);
      hi(i, j) = std::max(x, y);
    }
  }
  return {std::move(lo), std::move(hi)};
}

} // namespace reach

#endif // REACH_INTERVAL_HPP_
