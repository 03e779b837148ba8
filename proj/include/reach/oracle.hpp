#ifndef REACH_ORACLE_HPP_
#define REACH_ORACLE_HPP_

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "reach/backward.hpp"
#include "reach/polytope.hpp"
#include "reach/types.hpp"

namespace reach {

struct PiecewiseConstantSignal {
  std::vector<Vector> values;
  double dt = 0.0;

  PiecewiseConstantSignal() = default;
  PiecewiseConstantSignal(std::vector<Vector> values_, double dt_)
      : values(std::move(values_)), dt(dt_) {
    if (values.empty() || dt <= 0.0)
      throw std::invalid_argument("PiecewiseConstantSignal: need values and dt > 0");
  }

  Vector at(double t) const {
    const auto idx = std::min<size_t>(values.size() - 1,
                                      static_cast<size_t>(std::max(0.0, t / dt)));
    return values[idx];
  }
};

/// RK4 integration of x' = A x + B u(t) + E w(t); sub-step at most dt/20 of
/// the signal steps (tighter for stiff A). Matches the exact LTI solution to
/// about 1e-9 on the benchmark systems.
Vector ode_simulate(const LinSys& sys, const Vector& x0, const PiecewiseConstantSignal& u,
                    const PiecewiseConstantSignal& w, double t);

/// Exact 1D backward reachable interval for x' = a x + u + w via interval
/// arithmetic on the closed forms; nullopt when the set is empty.
std::optional<Interval> analytic_1d_brs(double a, const Interval& u, const Interval& w,
                                        const Interval& x_end, double t, SolutionKind kind);

bool membership(const Vector& x, const HPolytope& p, double tol = 1e-9);
bool membership(const Vector& x, const ConstrainedZonotope& cz, double tol = 1e-9);

/// max_j (C_j x - d_j) / ||C_j||_2; negative inside.
double signed_distance(const Vector& x, const HPolytope& p);

/// max_j rho(S_in, l_j) - rho(S_out, l_j) over the direction columns;
/// nonpositive certifies containment along the tested directions.
double directional_gap(const SupportFn& rho_in, const SupportFn& rho_out,
                       const Matrix& directions);
double directional_gap(const ConstrainedZonotope& s_in, const ConstrainedZonotope& s_out,
                       const Matrix& directions);

struct GameVerdict {
  int samples = 0;
  int passes = 0;
  double worst_violation = 0.0;
  std::vector<std::string> stage_log;

  bool all_passed() const { return passes == samples; }
};

struct ReplayOptions {
  int num_initial_states = 200;
  int num_disturbances = 50;
  int grid_points = 100; // density of the "exists t in tau_k" check
  double tol = 1e-4;
  std::uint64_t seed = 0;
  int verbosity = 0;
};

/// Replays factor-decoded input witnesses of an EA inner approximation
/// against random disturbance signals. t_lo == t_hi checks the terminal
/// state at that time; otherwise the minimum signed distance over a dense
/// time grid in [t_lo, t_hi] must stay within tol.
GameVerdict ea_witness_replay(const LinSys& sys, const ConstrainedZonotope& set,
                              const WitnessMap& witness, const HPolytope& target,
                              double t_lo, double t_hi, const ReplayOptions& opt);

struct SamplingOptions {
  int num_samples = 10000;
  std::uint64_t seed = 0;
  int verbosity = 0;
};

/// For U = {0}: backward-integrated trajectories from the target under random
/// disturbances must land inside the computed AE outer approximation.
GameVerdict ae_backward_sampling(const LinSys& sys, const HPolytope& target,
                                 const TimePointResult& outer, const SamplingOptions& opt);
GameVerdict ae_backward_sampling(const LinSys& sys, const HPolytope& target,
                                 const TimeIntervalResult& outer, const SamplingOptions& opt);

// Sampling utilities (vertex samples via seeded random-objective LPs mixed
// with convex interior combinations).
std::vector<Vector> sample_cz_factors(const ConstrainedZonotope& cz, int count,
                                      std::uint64_t seed);
PiecewiseConstantSignal sample_signal(const Zonotope& set, double dt, int steps,
                                      std::mt19937_64& rng, bool vertex_mode);

// Negative-control transforms: oracles must detect these as unsound.
HPolytope deflate(const HPolytope& p, double factor);
ConstrainedZonotope inflate(const ConstrainedZonotope& cz, double factor);

} // namespace reach

#endif // REACH_ORACLE_HPP_
