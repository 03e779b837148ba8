#include "reach/linflow.hpp"

#include <cmath>

namespace reach {
namespace {

double factorial(int i) {
  double f = 1.0;
  for (int k = 2; k <= i; ++k) f *= k;
  return f;
}

// Pade(13) approximant of the scaled matrix, squared back up (Higham 2005).
Matrix expm_pade13(const Matrix& m) {
  static const double b[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                             1187353796428800.0,  129060195264000.0,   10559470521600.0,
                             670442572800.0,      33522128640.0,       1323241920.0,
                             40840800.0,          960960.0,            16380.0,
                             182.0,               1.0};
  const int n = static_cast<int>(m.rows());
  const Matrix ident = Matrix::Identity(n, n);
  const Matrix m2 = m * m;
  const Matrix m4 = m2 * m2;
  const Matrix m6 = m4 * m2;
  const Matrix u =
      m * (m6 * (b[13] * m6 + b[11] * m4 + b[9] * m2) + b[7] * m6 + b[5] * m4 +
           b[3] * m2 + b[1] * ident);
  const Matrix v = m6 * (b[12] * m6 + b[10] * m4 + b[8] * m2) + b[6] * m6 + b[4] * m4 +
                   b[2] * m2 + b[0] * ident;
  return (v - u).partialPivLu().solve(v + u);
}

constexpr double kCondLimit = 1e8;

} // namespace

Matrix expm(const Matrix& a, double t) {
  require(a.rows() == a.cols(), "expm: square matrix required");
  if (!a.allFinite() || !std::isfinite(t)) throw std::invalid_argument("expm: non-finite input");
  const int n = static_cast<int>(a.rows());
  if (n == 0) return Matrix(0, 0);
  Matrix at = a * t;
  const double norm = at.cwiseAbs().rowwise().sum().maxCoeff();
  if (norm > 1e4) throw NumericalFailure("expm: ||A t|| too large");
  const double theta13 = 5.371920351148152;
  int squarings = 0;
  if (norm > theta13) {
    squarings = static_cast<int>(std::ceil(std::log2(norm / theta13)));
    at /= std::pow(2.0, squarings);
  }
  Matrix r = expm_pade13(at);
  for (int i = 0; i < squarings; ++i) r = r * r;
  if (!r.allFinite()) throw NumericalFailure("expm: overflow");
  return r;
}

IntervalMatrix remainder_matrix(const Matrix& a, double dt, int eta) {
  require(a.rows() == a.cols(), "remainder_matrix: square matrix required");
  if (dt <= 0.0) throw std::invalid_argument("remainder_matrix: dt <= 0");
  if (eta < 1) throw std::invalid_argument("remainder_matrix: eta < 1");
  const int n = static_cast<int>(a.rows());
  const Matrix w = a.cwiseAbs() * dt;
  Matrix partial = Matrix::Identity(n, n);
  Matrix term = Matrix::Identity(n, n);
  for (int i = 1; i <= eta; ++i) {
    term = term * w / i;
    partial += term;
  }
  Matrix e = (expm(w) - partial).cwiseMax(0.0); // tail of a nonnegative series
  return IntervalMatrix::symmetric(std::move(e));
}

IntervalMatrix curvature_f(const Matrix& a, double dt, int eta) {
  const int n = static_cast<int>(a.rows());
  IntervalMatrix acc = IntervalMatrix::zero(n, n);
  Matrix apow = a * a;
  for (int i = 2; i <= eta; ++i) {
    const double delta =
        std::pow(double(i), -double(i) / (i - 1)) - std::pow(double(i), -1.0 / (i - 1));
    acc = acc + scalar_interval_times(delta * std::pow(dt, i), 0.0, apow / factorial(i));
    apow = apow * a;
  }
  return acc + remainder_matrix(a, dt, eta);
}

IntervalMatrix curvature_g(const Matrix& a, double dt, int eta) {
  const int n = static_cast<int>(a.rows());
  IntervalMatrix acc = IntervalMatrix::zero(n, n);
  Matrix apow = a;
  for (int i = 2; i <= eta + 1; ++i) {
    const double delta =
        std::pow(double(i), -double(i) / (i - 1)) - std::pow(double(i), -1.0 / (i - 1));
    acc = acc + scalar_interval_times(delta * std::pow(dt, i), 0.0, apow / factorial(i));
    apow = apow * a;
  }
  return acc + remainder_matrix(a, dt, eta) * dt;
}

Matrix particular_integral(const Matrix& a, double dt) {
  require(a.rows() == a.cols(), "particular_integral: square matrix required");
  const int n = static_cast<int>(a.rows());
  Eigen::FullPivLU<Matrix> lu(a);
  if (lu.isInvertible()) {
    const Matrix inv = lu.inverse();
    const double cond = a.cwiseAbs().rowwise().sum().maxCoeff() *
                        inv.cwiseAbs().rowwise().sum().maxCoeff();
    if (cond < kCondLimit) return inv * (expm(a, dt) - Matrix::Identity(n, n));
  }
  // Integrated power series sum_i A^i dt^{i+1} / (i+1)!.
  Matrix acc = Matrix::Identity(n, n) * dt;
  Matrix term = acc;
  for (int i = 1; i < 500; ++i) {
    term = term * a * (dt / (i + 1));
    acc += term;
    if (term.cwiseAbs().maxCoeff() < 1e-16) return acc;
  }
  throw NumericalFailure("particular_integral: series did not converge");
}

Zonotope outer_particular_step(const Matrix& a, const Zonotope& s, double dt, int eta) {
  require(a.cols() == s.c.size(), "outer_particular_step: dimension mismatch");
  if (dt <= 0.0) throw std::invalid_argument("outer_particular_step: dt <= 0");
  const int n = static_cast<int>(a.rows());
  Matrix coeff = Matrix::Identity(n, n) * dt; // A^i dt^{i+1} / (i+1)!
  Zonotope acc = linear_map(coeff, s);
  for (int i = 1; i <= eta; ++i) {
    coeff = coeff * a * (dt / (i + 1));
    acc = minkowski_sum(acc, linear_map(coeff, s));
  }
  return minkowski_sum(acc, interval_matrix_map(remainder_matrix(a, dt, eta) * dt, s));
}

Zonotope inner_particular_step(const Matrix& a, const Zonotope& s, double dt) {
  require(a.cols() == s.c.size(), "inner_particular_step: dimension mismatch");
  if (dt <= 0.0) throw std::invalid_argument("inner_particular_step: dt <= 0");
  return linear_map(particular_integral(a, dt), s);
}

Zonotope propagate_particular(const Zonotope& z_prev, const Matrix& exp_at_k,
                              const Zonotope& z_step, double max_order) {
  Zonotope out = minkowski_sum(z_prev, linear_map(exp_at_k, z_step));
  if (max_order > 0.0 && out.order() > max_order) out = reduce_order(out, max_order);
  return out;
}

Zonotope propagate_particular(const Zonotope& z_prev, const Matrix& a, double t_k,
                              const Zonotope& z_step, double max_order) {
  return propagate_particular(z_prev, expm(a, t_k), z_step, max_order);
}

Zonotope segment_zonotope(const Vector& a, const Vector& b) {
  require(a.size() == b.size(), "segment_zonotope: dimension mismatch");
  return Zonotope(0.5 * (a + b), 0.5 * (b - a));
}

Zonotope traj_particular(const Matrix& a, const std::vector<Vector>& s_traj, double dt,
                         int eta, int k) {
  require(static_cast<int>(s_traj.size()) >= k + 1, "traj_particular: trajectory too short");
  const int n = static_cast<int>(a.rows());
  const Matrix phi = particular_integral(a, dt);
  Vector point = Vector::Zero(n);
  for (int j = 0; j <= k - 1; ++j) point += expm(a, (k - 1 - j) * dt) * (phi * s_traj[j]);

  // Within tau_k the accumulated point drifts along the flow and the current
  // slot integrates up: enclose both. The drift of the point uses the
  // homogeneous interval enclosure; the fresh-input part is the linear
  // interpolation toward phi * s(t_k) plus the curvature bound G {s(t_k)}.
  const Vector drifted = expm(a, dt) * point;
  Zonotope out = minkowski_sum(
      segment_zonotope(point, drifted),
      interval_matrix_map(curvature_f(a, dt, std::max(eta, 2)), Zonotope::point(point)));
  out = minkowski_sum(out, segment_zonotope(Vector::Zero(n), phi * s_traj[k]));
  return minkowski_sum(
      out, interval_matrix_map(curvature_g(a, dt, eta), Zonotope::point(s_traj[k])));
}

Zonotope outer_particular_interval(const Matrix& a, const Zonotope& s, int k, double dt,
                                   int eta) {
  const Vector center = s.c;
  const Zonotope centered(Vector::Zero(s.dim()), s.G);
  const Zonotope step = outer_particular_step(a, centered, dt, eta);
  Zonotope prop = step;
  for (int j = 1; j <= k; ++j) prop = propagate_particular(prop, expm(a, j * dt), step);
  const std::vector<Vector> traj(static_cast<size_t>(k) + 1, center);
  return minkowski_sum(prop, traj_particular(a, traj, dt, eta, k));
}

ConstrainedZonotope homog_outer_interval(const ConstrainedZonotope& h_k, const Matrix& a,
                                         double dt, const IntervalMatrix& f) {
  const ConstrainedZonotope h_next = linear_map(expm(a, dt), h_k);
  return minkowski_sum(convex_hull(h_k, h_next), interval_matrix_map(f, h_k));
}

double mu_bound(const Matrix& box_generators, const Matrix& a, double dt) {
  if (box_generators.cols() == 0) return 0.0;
  const Matrix m =
      (expm(a, dt) - Matrix::Identity(a.rows(), a.cols())) * box_generators;
  const double spectral = m.jacobiSvd().singularValues()(0);
  return std::sqrt(double(box_generators.cols())) * spectral;
}

TruncationOrder auto_eta(const Matrix& a, double dt, double tol) {
  const int n = static_cast<int>(a.rows());
  const Matrix w = a.cwiseAbs() * dt;
  const Matrix expw = expm(w);
  Matrix partial = Matrix::Identity(n, n);
  Matrix term = Matrix::Identity(n, n);
  for (int eta = 1; eta <= 50; ++eta) {
    term = term * w / eta;
    partial += term;
    const double rem = (expw - partial).cwiseMax(0.0).maxCoeff();
    if (rem <= tol) return TruncationOrder{eta};
  }
  throw NumericalFailure("auto_eta: no eta <= 50 meets the tolerance; decrease dt");
}

FlowCache::FlowCache(Matrix a, double dt, int eta, int max_steps)
    : a_(std::move(a)), dt_(dt), eta_(eta) {
  require(a_.rows() == a_.cols(), "FlowCache: square matrix required");
  if (dt_ <= 0.0) throw std::invalid_argument("FlowCache: dt <= 0");
  const int n = static_cast<int>(a_.rows());
  exp_dt_ = expm(a_, dt_);
  exp_neg_dt_ = expm(a_, -dt_);
  e_ = remainder_matrix(a_, dt_, eta_);
  f_ = reach::curvature_f(a_, dt_, eta_);
  g_ = reach::curvature_g(a_, dt_, eta_);
  phi_ = particular_integral(a_, dt_);

  // Transition powers by repeated multiplication with the step exponential,
  // re-validated against a direct evaluation every 64 steps (1e-9 drift
  // bound).
  exp_pos_.reserve(max_steps + 1);
  exp_neg_.reserve(max_steps + 1);
  exp_pos_.push_back(Matrix::Identity(n, n));
  exp_neg_.push_back(Matrix::Identity(n, n));
  for (int k = 1; k <= max_steps; ++k) {
    Matrix pos = exp_pos_.back() * exp_dt_;
    Matrix neg = exp_neg_.back() * exp_neg_dt_;
    if (k % 64 == 0) {
      const Matrix direct_pos = expm(a_, k * dt_);
      const Matrix direct_neg = expm(a_, -k * dt_);
      const double scale_pos = std::max(1.0, direct_pos.cwiseAbs().maxCoeff());
      const double scale_neg = std::max(1.0, direct_neg.cwiseAbs().maxCoeff());
      if ((pos - direct_pos).cwiseAbs().maxCoeff() > 1e-9 * scale_pos) pos = direct_pos;
      if ((neg - direct_neg).cwiseAbs().maxCoeff() > 1e-9 * scale_neg) neg = direct_neg;
    }
    exp_pos_.push_back(std::move(pos));
    exp_neg_.push_back(std::move(neg));
  }
}

} // namespace reach
