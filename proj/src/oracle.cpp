#include "reach/oracle.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <set>
#include <thread>

#include "reach/lp.hpp"

namespace reach {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// One RK4 segment with constant forcing s: x' = A x + s.
Vector rk4_segment(const Matrix& a, Vector x, const Vector& s, double len, double h_max) {
  const int steps = std::max(1, static_cast<int>(std::ceil(len / h_max)));
  const double h = len / steps;
  for (int i = 0; i < steps; ++i) {
    const Vector k1 = a * x + s;
    const Vector k2 = a * (x + 0.5 * h * k1) + s;
    const Vector k3 = a * (x + 0.5 * h * k2) + s;
    const Vector k4 = a * (x + h * k3) + s;
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return x;
}

// Sub-step at most dt/20 and small enough that the accumulated fourth-order
// truncation error stays below the accuracy target on horizons of a few
// seconds: t (||A|| h)^4 ||A|| / 120 <= accuracy.
double substep_limit(const Matrix& a, double signal_dt, double accuracy = 1e-10) {
  const double stiff = a.cwiseAbs().rowwise().sum().maxCoeff();
  double h = signal_dt / 20.0;
  if (stiff > 1e-9)
    h = std::min(h, std::pow(30.0 * accuracy / stiff, 0.25) / stiff);
  return h;
}

// Integrates x' = A x + f(t) between sorted breakpoints, reporting the state
// at each requested time (which must be a breakpoint).
template <typename Forcing, typename Visitor>
void integrate_over(const Matrix& a, Vector x, const std::vector<double>& breaks,
                    double h_max, const Forcing& forcing, const Visitor& visit) {
  visit(breaks.front(), x);
  for (size_t i = 0; i + 1 < breaks.size(); ++i) {
    const double t0 = breaks[i];
    const double t1 = breaks[i + 1];
    if (t1 - t0 > 1e-14) {
      const Vector s = forcing(0.5 * (t0 + t1));
      x = rk4_segment(a, std::move(x), s, t1 - t0, h_max);
    }
    visit(t1, x);
  }
}

std::vector<double> merged_breakpoints(double t_end, std::initializer_list<double> dts,
                                       const std::vector<double>& extra) {
  std::set<double> pts{0.0, t_end};
  for (double dt : dts) {
    if (dt <= 0.0) continue;
    for (double t = dt; t < t_end - 1e-14; t += dt) pts.insert(t);
  }
  for (double t : extra)
    if (t > 0.0 && t < t_end + 1e-14) pts.insert(std::min(t, t_end));
  return {pts.begin(), pts.end()};
}

Vector vertex_sample(const Zonotope& set, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> coin(0, 1);
  Vector alpha(set.num_generators());
  for (int i = 0; i < alpha.size(); ++i) alpha(i) = coin(rng) ? 1.0 : -1.0;
  return set.at(alpha);
}

Vector interior_sample(const Zonotope& set, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  Vector alpha(set.num_generators());
  for (int i = 0; i < alpha.size(); ++i) alpha(i) = uni(rng);
  return set.at(alpha);
}

void parallel_for(int count, const std::function<void(int)>& body) {
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (hw == 1 || count < 8) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> workers;
  const unsigned num = std::min<unsigned>(hw, count);
  workers.reserve(num);
  for (unsigned w = 0; w < num; ++w) {
    workers.emplace_back([&] {
      for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) body(i);
    });
  }
  for (auto& th : workers) th.join();
}

} // namespace

Vector ode_simulate(const LinSys& sys, const Vector& x0, const PiecewiseConstantSignal& u,
                    const PiecewiseConstantSignal& w, double t) {
  require(x0.size() == sys.dim(), "ode_simulate: state dimension");
  if (t < 0.0) throw std::invalid_argument("ode_simulate: t < 0");
  if (t == 0.0) return x0;
  if (u.dt * static_cast<double>(u.values.size()) < t - 1e-12 ||
      w.dt * static_cast<double>(w.values.size()) < t - 1e-12)
    throw std::invalid_argument("ode_simulate: signals do not cover [0, t]");

  const std::vector<double> breaks = merged_breakpoints(t, {u.dt, w.dt}, {});
  const double h = substep_limit(sys.A, std::min(u.dt, w.dt));
  Vector out = x0;
  integrate_over(
      sys.A, x0, breaks, h,
      [&](double tm) -> Vector { return sys.B * u.at(tm) + sys.E * w.at(tm); },
      [&](double tm, const Vector& x) {
        if (std::abs(tm - t) < 1e-14) out = x;
      });
  return out;
}

std::optional<Interval> analytic_1d_brs(double a, const Interval& u, const Interval& w,
                                        const Interval& x_end, double t, SolutionKind kind) {
  if (u.dim() != 1 || w.dim() != 1 || x_end.dim() != 1)
    throw DimensionMismatch("analytic_1d_brs: scalar sets required");
  if (!(t > 0.0)) throw std::invalid_argument("analytic_1d_brs: t <= 0");
  const double kappa = a == 0.0 ? t : (std::exp(a * t) - 1.0) / a;
  const double zu_lo = kappa * u.lo(0), zu_hi = kappa * u.hi(0);
  const double zw_lo = kappa * w.lo(0), zw_hi = kappa * w.hi(0);
  const double scale = std::exp(-a * t);

  double lo = 0.0, hi = 0.0;
  if (kind == SolutionKind::AEOuter || kind == SolutionKind::AEInner) {
    // e^{-a t} ((X_end (+) -Z_W) (-) Z_U)
    const double sum_lo = x_end.lo(0) - zw_hi;
    const double sum_hi = x_end.hi(0) - zw_lo;
    lo = sum_lo - zu_lo;
    hi = sum_hi - zu_hi;
  } else {
    // e^{-a t} ((X_end (-) Z_W) (+) -Z_U)
    const double diff_lo = x_end.lo(0) - zw_lo;
    const double diff_hi = x_end.hi(0) - zw_hi;
    if (diff_lo > diff_hi) return std::nullopt;
    lo = diff_lo - zu_hi;
    hi = diff_hi - zu_lo;
  }
  if (lo > hi) return std::nullopt;
  Vector vlo(1), vhi(1);
  vlo << scale * lo;
  vhi << scale * hi;
  return Interval(std::move(vlo), std::move(vhi));
}

bool membership(const Vector& x, const HPolytope& p, double tol) {
  return p.contains_point(x, tol);
}

bool membership(const Vector& x, const ConstrainedZonotope& cz, double tol) {
  return cz.contains_point(x, tol);
}

double signed_distance(const Vector& x, const HPolytope& p) {
  double worst = -kInf;
  for (int j = 0; j < p.num_constraints(); ++j)
    worst = std::max(worst, (p.C.row(j).dot(x) - p.d(j)) / p.C.row(j).norm());
  return worst;
}

double directional_gap(const SupportFn& rho_in, const SupportFn& rho_out,
                       const Matrix& directions) {
  double gap = -kInf;
  for (int j = 0; j < directions.cols(); ++j)
    gap = std::max(gap, rho_in(directions.col(j)) - rho_out(directions.col(j)));
  return gap;
}

double directional_gap(const ConstrainedZonotope& s_in, const ConstrainedZonotope& s_out,
                       const Matrix& directions) {
  return directional_gap([&](const Vector& l) { return s_in.support(l); },
                         [&](const Vector& l) { return s_out.support(l); }, directions);
}

std::vector<Vector> sample_cz_factors(const ConstrainedZonotope& cz, int count,
                                      std::uint64_t seed) {
  const int gamma = cz.num_generators();
  std::vector<Vector> vertices;
  std::vector<Vector> out;
  out.reserve(count);
  const int num_vertex = (count + 1) / 2;
  for (int i = 0; i < count; ++i) {
    std::mt19937_64 rng(seed * 0x9e3779b97f4a7c15ULL + i + 1);
    if (i < num_vertex || vertices.size() < 2) {
      std::normal_distribution<double> gauss;
      Vector objective(gamma);
      for (int j = 0; j < gamma; ++j) objective(j) = gauss(rng);
      LPProblem p = LPProblem::maximize(objective);
      p.ineq_lhs = Matrix(2 * gamma, gamma);
      p.ineq_lhs << Matrix::Identity(gamma, gamma), -Matrix::Identity(gamma, gamma);
      p.ineq_rhs = Vector::Ones(2 * gamma);
      p.eq_lhs = cz.con_lhs;
      p.eq_rhs = cz.con_rhs;
      const LPOutcome sol = solve_lp(p);
      if (sol.status != LPStatus::Optimal)
        throw EmptySetError("sample_cz_factors: empty constrained zonotope");
      Vector alpha = sol.point.cwiseMax(-1.0).cwiseMin(1.0);
      vertices.push_back(alpha);
      out.push_back(std::move(alpha));
    } else {
      std::uniform_real_distribution<double> uni(0.0, 1.0);
      std::uniform_int_distribution<size_t> pick(0, vertices.size() - 1);
      const double lambda = uni(rng);
      out.push_back(lambda * vertices[pick(rng)] + (1.0 - lambda) * vertices[pick(rng)]);
    }
  }
  return out;
}

PiecewiseConstantSignal sample_signal(const Zonotope& set, double dt, int steps,
                                      std::mt19937_64& rng, bool vertex_mode) {
  std::vector<Vector> values;
  values.reserve(steps);
  for (int i = 0; i < steps; ++i)
    values.push_back(vertex_mode ? vertex_sample(set, rng) : interior_sample(set, rng));
  return PiecewiseConstantSignal(std::move(values), dt);
}

GameVerdict ea_witness_replay(const LinSys& sys, const ConstrainedZonotope& set,
                              const WitnessMap& witness, const HPolytope& target,
                              double t_lo, double t_hi, const ReplayOptions& opt) {
  require(t_hi >= t_lo && t_lo >= 0.0, "ea_witness_replay: bad time window");
  const bool time_point = t_hi <= t_lo + 1e-15;

  const std::vector<Vector> factor_samples =
      sample_cz_factors(set, opt.num_initial_states, opt.seed + 1);

  // Breakpoints: witness slots plus the distance-check grid.
  std::vector<double> extra;
  for (const WitnessBlock& b : witness.blocks) {
    extra.push_back(b.slot_t0);
    extra.push_back(b.slot_t1);
  }
  if (witness.tail_t0 >= 0.0) extra.push_back(witness.tail_t0);
  std::vector<double> check_times;
  if (time_point) {
    check_times.push_back(t_hi);
  } else {
    for (int i = 0; i <= opt.grid_points; ++i)
      check_times.push_back(t_lo + (t_hi - t_lo) * i / opt.grid_points);
  }
  extra.insert(extra.end(), check_times.begin(), check_times.end());

  // Disturbance signal step: align with the witness slot length when
  // available.
  double w_dt = t_hi;
  if (!witness.blocks.empty())
    w_dt = witness.blocks.front().slot_t1 - witness.blocks.front().slot_t0;
  else if (witness.tail_t0 >= 0.0)
    w_dt = witness.tail_t1 - witness.tail_t0;
  const int w_steps = static_cast<int>(std::ceil(t_hi / w_dt - 1e-12)) + 1;

  GameVerdict verdict;
  verdict.samples = static_cast<int>(factor_samples.size());
  std::vector<double> violations(factor_samples.size(), 0.0);
  std::vector<int> passed(factor_samples.size(), 0);

  // The pass tolerance is 1e-4; an integration target two orders tighter
  // keeps the integrator cost proportionate.
  const double h = substep_limit(sys.A, w_dt, std::min(1e-8, opt.tol * 1e-2));
  parallel_for(verdict.samples, [&](int i) {
    const Vector& alpha = factor_samples[i];
    const Vector x0 = set.at(alpha);
    double worst = -kInf; // max over disturbances of the per-run distance
    for (int dw = 0; dw < opt.num_disturbances; ++dw) {
      std::mt19937_64 rng(opt.seed * 0x9e3779b97f4a7c15ULL + i * 1000003ULL + dw);
      const PiecewiseConstantSignal w_sig =
          sample_signal(sys.W, w_dt, w_steps, rng, dw % 2 == 0);
      const std::vector<double> breaks = merged_breakpoints(t_hi, {w_dt}, extra);
      double best = kInf; // min over the check grid of the signed distance
      size_t next_check = 0;
      integrate_over(
          sys.A, x0, breaks, h,
          [&](double tm) -> Vector {
            return sys.B * witness.input_at(alpha, tm) + sys.E * w_sig.at(tm);
          },
          [&](double tm, const Vector& x) {
            while (next_check < check_times.size() &&
                   check_times[next_check] <= tm + 1e-12) {
              if (std::abs(check_times[next_check] - tm) <= 1e-9)
                best = std::min(best, signed_distance(x, target));
              ++next_check;
            }
          });
      worst = std::max(worst, best);
      if (worst > opt.tol) break; // already failing
    }
    violations[i] = worst;
    passed[i] = worst <= opt.tol ? 1 : 0;
  });

  verdict.worst_violation = *std::max_element(violations.begin(), violations.end());
  for (size_t i = 0; i < passed.size(); ++i) {
    verdict.passes += passed[i];
    if (opt.verbosity >= 2)
      verdict.stage_log.push_back("sample " + std::to_string(i) +
                                  (passed[i] ? " pass " : " FAIL ") +
                                  "distance=" + std::to_string(violations[i]));
  }
  return verdict;
}

namespace {

// Shared core of the AE backward-sampling oracle: integrate the
// time-inverted dynamics from the target under a random disturbance and hand
// the landing state to a membership callback.
GameVerdict ae_backward_core(const LinSys& sys, const HPolytope& target, double t0,
                             double t_end, double dt_sig, const SamplingOptions& opt,
                             const std::function<bool(const Vector&, double, double&)>& member) {
  const Zonotope bu = sys.input_set();
  if (bu.c.lpNorm<Eigen::Infinity>() > 1e-14 ||
      (bu.num_generators() > 0 && bu.G.lpNorm<Eigen::Infinity>() > 1e-14))
    throw std::invalid_argument("ae_backward_sampling: requires U = {0}");

  const ConstrainedZonotope cz_target = to_constrained_zonotope(target);
  const std::vector<Vector> end_factors =
      sample_cz_factors(cz_target, opt.num_samples, opt.seed + 7);

  GameVerdict verdict;
  verdict.samples = opt.num_samples;
  std::vector<int> passed(opt.num_samples, 0);
  std::vector<double> violations(opt.num_samples, 0.0);
  const Matrix a_inv = -sys.A;
  const Matrix e_inv = -sys.E;
  const double h = substep_limit(sys.A, dt_sig);

  parallel_for(opt.num_samples, [&](int i) {
    std::mt19937_64 rng(opt.seed * 0x2545f4914f6cdd1dULL + i + 13);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    const double t_back = t0 == t_end ? t_end : t0 + (t_end - t0) * uni(rng);
    const Vector x_end = cz_target.at(end_factors[i]);
    const int steps = static_cast<int>(std::ceil(t_back / dt_sig - 1e-12)) + 1;
    const PiecewiseConstantSignal w_sig =
        sample_signal(sys.W, dt_sig, steps, rng, i % 2 == 0);

    Vector x0 = x_end;
    const std::vector<double> breaks = merged_breakpoints(t_back, {dt_sig}, {});
    if (t_back > 0.0) {
      integrate_over(
          a_inv, x_end, breaks, h,
          [&](double tm) -> Vector { return e_inv * w_sig.at(tm); },
          [&](double tm, const Vector& x) {
            if (std::abs(tm - t_back) < 1e-14) x0 = x;
          });
    }
    double violation = 0.0;
    passed[i] = member(x0, t_back, violation) ? 1 : 0;
    violations[i] = passed[i] ? 0.0 : violation;
  });

  for (int i = 0; i < opt.num_samples; ++i) {
    verdict.passes += passed[i];
    verdict.worst_violation = std::max(verdict.worst_violation, violations[i]);
    if (opt.verbosity >= 2 && !passed[i])
      verdict.stage_log.push_back("sample " + std::to_string(i) + " FAIL violation=" +
                                  std::to_string(violations[i]));
  }
  return verdict;
}

} // namespace

GameVerdict ae_backward_sampling(const LinSys& sys, const HPolytope& target,
                                 const TimePointResult& outer, const SamplingOptions& opt) {
  if (!outer.poly) throw std::invalid_argument("ae_backward_sampling: polytope result required");
  const HPolytope& result = *outer.poly;
  const double dt_sig = outer.t / 100.0;
  return ae_backward_core(sys, target, outer.t, outer.t, dt_sig, opt,
                          [&](const Vector& x0, double, double& violation) {
                            violation = signed_distance(x0, result);
                            return violation <= 1e-7;
                          });
}

GameVerdict ae_backward_sampling(const LinSys& sys, const HPolytope& target,
                                 const TimeIntervalResult& outer, const SamplingOptions& opt) {
  const StepGrid& grid = outer.grid;
  return ae_backward_core(
      sys, target, grid.t0, grid.t_end, grid.dt(), opt,
      [&](const Vector& x0, double t_back, double& violation) {
        const int sigma = static_cast<int>(outer.pieces.size());
        int guess = std::clamp(static_cast<int>((t_back - grid.t0) / grid.dt()), 0, sigma - 1);
        std::vector<int> order{guess};
        if (guess > 0) order.push_back(guess - 1);
        if (guess + 1 < sigma) order.push_back(guess + 1);
        for (int k = 0; k < sigma; ++k)
          if (k != guess && std::abs(k - guess) > 1) order.push_back(k);
        for (int k : order) {
          if (outer.pieces[k].empty()) continue;
          if (outer.pieces[k].set->contains_point(x0)) return true;
        }
        violation = 1.0;
        return false;
      });
}

HPolytope deflate(const HPolytope& p, double factor) {
  const Vector center = bounding_box(p).center();
  return HPolytope(p.C, factor * p.d + (1.0 - factor) * (p.C * center));
}

ConstrainedZonotope inflate(const ConstrainedZonotope& cz, double factor) {
  return {cz.c, factor * cz.G, cz.con_lhs, cz.con_rhs};
}

} // namespace reach
