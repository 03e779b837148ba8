#ifndef REACH_LINFLOW_HPP_
#define REACH_LINFLOW_HPP_

#include <vector>

#include "reach/conzono.hpp"
#include "reach/interval.hpp"
#include "reach/types.hpp"
#include "reach/zonotope.hpp"

namespace reach {

/// Uniform time grid t_k = t0 + k*dt over [t0, t_end] with sigma steps.
struct StepGrid {
  double t0 = 0.0;
  double t_end = 0.0;
  int sigma = 1;

  StepGrid() = default;
  StepGrid(double t0_, double t_end_, int sigma_) : t0(t0_), t_end(t_end_), sigma(sigma_) {
    if (!(t_end > t0) || t0 < 0.0) throw std::invalid_argument("StepGrid: need t_end > t0 >= 0");
    if (sigma < 1) throw std::invalid_argument("StepGrid: need sigma >= 1");
  }
  double dt() const { return (t_end - t0) / sigma; }
  double point(int k) const { return t0 + k * dt(); }
};

struct TruncationOrder {
  int eta = 1;
};

/// Matrix exponential e^{A t}, scaling-and-squaring with Pade truncation.
Matrix expm(const Matrix& a, double t = 1.0);

/// Remainder enclosure [-E, E] with E = e^{|A| dt} - sum_{i<=eta} (|A| dt)^i / i!.
IntervalMatrix remainder_matrix(const Matrix& a, double dt, int eta);

/// Curvature enclosure for the homogeneous time-interval solution.
IntervalMatrix curvature_f(const Matrix& a, double dt, int eta);

/// Curvature enclosure for the constant-input time-interval solution.
IntervalMatrix curvature_g(const Matrix& a, double dt, int eta);

/// Integral of e^{A s} over [0, dt]: closed form A^-1 (e^{A dt} - I) for
/// well-conditioned A, otherwise the integrated power series truncated at
/// machine precision.
Matrix particular_integral(const Matrix& a, double dt);

/// Outer enclosure of the one-step particular solution for inputs in s.
Zonotope outer_particular_step(const Matrix& a, const Zonotope& s, double dt, int eta);

/// Inner approximation of the one-step particular solution: the image of s
/// under particular_integral (exact for constant inputs).
Zonotope inner_particular_step(const Matrix& a, const Zonotope& s, double dt);

/// Wrapping-free recursion Z(t_{k+1}) = Z(t_k) (+) e^{A t_k} Z_step; reduces
/// the result when max_order > 0.
Zonotope propagate_particular(const Zonotope& z_prev, const Matrix& exp_at_k,
                              const Zonotope& z_step, double max_order = 0.0);
Zonotope propagate_particular(const Zonotope& z_prev, const Matrix& a, double t_k,
                              const Zonotope& z_step, double max_order);

/// Segment between two points as a one-generator zonotope.
Zonotope segment_zonotope(const Vector& a, const Vector& b);

/// Enclosure of the particular solution over tau_k for a piecewise-constant
/// trajectory (>= k+1 samples): the accumulated constant-step terms, their
/// within-step drift, the interpolation segment of the current slot, and the
/// curvature term G {s(t_k)}.
Zonotope traj_particular(const Matrix& a, const std::vector<Vector>& s_traj, double dt,
                         int eta, int k);

/// Time-interval particular solution via the center split
/// S = S0 (+) {center}: propagated centered solution plus the constant-center
/// trajectory term.
Zonotope outer_particular_interval(const Matrix& a, const Zonotope& s, int k, double dt,
                                   int eta);

/// Encloses { e^{A t} x | t in [0, dt], x in h_k }:
/// conv(h_k, e^{A dt} h_k) (+) F h_k.
ConstrainedZonotope homog_outer_interval(const ConstrainedZonotope& h_k, const Matrix& a,
                                         double dt, const IntervalMatrix& f);

/// mu = sqrt(gamma) ||(e^{A dt} - I) G||_2 for a generator matrix G.
double mu_bound(const Matrix& box_generators, const Matrix& a, double dt);

/// Smallest eta <= 50 with max-abs entry of the remainder below tol.
TruncationOrder auto_eta(const Matrix& a, double dt, double tol = 1e-10);

/// Matrix machinery shared by every step of a reachability run: step
/// exponentials, remainder/curvature enclosures, and the per-step transition
/// powers e^{+-A t_k}. Built once, then read-only.
class FlowCache {
public:
  FlowCache(Matrix a, double dt, int eta, int max_steps);

  const Matrix& a() const { return a_; }
  double dt() const { return dt_; }
  int eta() const { return eta_; }
  const Matrix& exp_dt() const { return exp_dt_; }
  const Matrix& exp_neg_dt() const { return exp_neg_dt_; }
  const IntervalMatrix& remainder() const { return e_; }
  const IntervalMatrix& curvature_f() const { return f_; }
  const IntervalMatrix& curvature_g() const { return g_; }
  const Matrix& phi() const { return phi_; }

  /// e^{A t_k} with t_k = k * dt, 0 <= k <= max_steps.
  const Matrix& exp_at(int k) const { return exp_pos_.at(k); }
  const Matrix& exp_at_neg(int k) const { return exp_neg_.at(k); }

private:
  Matrix a_;
  double dt_;
  int eta_;
  Matrix exp_dt_, exp_neg_dt_;
  IntervalMatrix e_, f_, g_;
  Matrix phi_;
  std::vector<Matrix> exp_pos_, exp_neg_;
};

} // namespace reach

#endif // REACH_LINFLOW_HPP_
