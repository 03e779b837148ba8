#include "reach/backward.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace reach {
namespace {

struct Timer {
  std::chrono::steady_clock::time_point mark = std::chrono::steady_clock::now();
  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(now - mark).count();
    mark = now;
    return s;
  }
};

int resolve_eta(const Matrix& a, double dt, const BackwardSpec& spec) {
  if (spec.eta > 0) return spec.eta;
  return auto_eta(a, dt, spec.eta_tol).eta;
}

Zonotope centered(const Zonotope& z) { return Zonotope(Vector::Zero(z.dim()), z.G); }

bool canonical_empty(const ConstrainedZonotope& cz) {
  return cz.num_generators() == 0 && cz.num_constraints() == 1 && cz.con_rhs(0) == 1.0;
}

/// Outer particular solution at the end of the grid [0, sigma*dt].
Zonotope outer_particular_final(const FlowCache& fc, const Zonotope& s, int sigma,
                                double max_order) {
  const Zonotope step = outer_particular_step(fc.a(), s, fc.dt(), fc.eta());
  Zonotope z = step;
  for (int k = 1; k < sigma; ++k)
    z = propagate_particular(z, fc.exp_at(k), step, max_order);
  return z;
}

/// Inner particular solution recursion with per-step factor bookkeeping.
/// Generators are kept exactly (no order reduction): reduction would enclose,
/// which breaks the inner approximation direction, and the factor columns are
/// what witness decoding consumes.
struct InnerParticular {
  Zonotope z;
  struct Block {
    double tau_map;
    double delta;
    int col_start;
    int cols;
  };
  std::vector<Block> blocks;

  static InnerParticular zero(int n) { return {Zonotope::point(Vector::Zero(n)), {}}; }

  void append(const Matrix& trans, const Zonotope& step, double tau_map, double delta) {
    blocks.push_back({tau_map, delta, z.num_generators(), step.num_generators()});
    z = minkowski_sum(z, linear_map(trans, step));
  }

  std::vector<WitnessBlock> resolve(double t_final, int col_offset) const {
    std::vector<WitnessBlock> out;
    out.reserve(blocks.size());
    for (const Block& b : blocks)
      out.push_back({b.col_start + col_offset, b.cols, t_final - b.tau_map - b.delta,
                     t_final - b.tau_map});
    return out;
  }
};

InnerParticular inner_particular_final(const FlowCache& fc, const Zonotope& s, int sigma) {
  InnerParticular acc = InnerParticular::zero(s.dim());
  const Zonotope step = linear_map(fc.phi(), s);
  for (int k = 0; k < sigma; ++k) acc.append(fc.exp_at(k), step, k * fc.dt(), fc.dt());
  return acc;
}

struct TpSetup {
  StepGrid grid;
  FlowCache fc;
  Zonotope bu;
  Zonotope ew;
};

TpSetup tp_setup(const LinSys& sys, const BackwardSpec& spec) {
  if (!spec.horizon.is_time_point)
    throw std::invalid_argument("time-point algorithm requires a time-point horizon");
  StepGrid grid(0.0, spec.horizon.t_end, spec.sigma);
  const int eta = resolve_eta(sys.A, grid.dt(), spec);
  return {grid, FlowCache(sys.A, grid.dt(), eta, spec.sigma), sys.input_set(),
          sys.disturbance_set()};
}

void log_poly(StageLog& log, const HPolytope& p) {
  log.add("result_constraints", p.num_constraints());
  for (int j = 0; j < std::min(4, p.num_constraints()); ++j)
    log.add("rho_row" + std::to_string(j), p.d(j));
}

void log_cz(StageLog& log, const ConstrainedZonotope& cz) {
  log.add("result_generators", cz.num_generators());
  log.add("result_constraints", cz.num_constraints());
}

// Pre-propagation of the particular solutions from 0 to t0 on an auxiliary
// grid with step close to dt.
struct PrePropagation {
  int sigma0 = 0;
  double dt0 = 0.0;
  Zonotope outer_w;        // outer particular solution of the centered W at t0
  InnerParticular inner_u; // inner particular solution (blocks for witnesses)
  Vector traj_point;       // exact particular solution of the constant center
  std::vector<Vector> support_inner; // running support values, one per direction
};

} // namespace

LinSys::LinSys(Matrix a, Matrix b, Matrix e, Zonotope u, Zonotope w)
    : A(std::move(a)), B(std::move(b)), E(std::move(e)), U(std::move(u)), W(std::move(w)) {
  require(A.rows() == A.cols(), "LinSys: A must be square");
  require(B.rows() == A.rows() && B.cols() == U.dim(), "LinSys: B/U dimension mismatch");
  require(E.rows() == A.rows() && E.cols() == W.dim(), "LinSys: E/W dimension mismatch");
}

LinSys unperturbed_mode(const LinSys& sys) {
  LinSys out = sys;
  out.W = Zonotope::point(Vector::Zero(sys.W.dim()));
  return out;
}

Horizon Horizon::time_point(double t) {
  if (!(t > 0.0)) throw std::invalid_argument("Horizon: need t > 0");
  Horizon h;
  h.t0 = 0.0;
  h.t_end = t;
  h.is_time_point = true;
  return h;
}

Horizon Horizon::time_interval(double t0, double t_end) {
  if (!(t_end > t0) || t0 < 0.0)
    throw std::invalid_argument("Horizon: need t_end > t0 >= 0");
  Horizon h;
  h.t0 = t0;
  h.t_end = t_end;
  h.is_time_point = false;
  return h;
}

Matrix default_directions(int n, const Matrix& extra) {
  const int q_extra = extra.size() == 0 ? 0 : static_cast<int>(extra.cols());
  if (q_extra > 0) require(extra.rows() == n, "directions: row count mismatch");
  Matrix dirs(n, 2 * n + q_extra);
  dirs.leftCols(n) = Matrix::Identity(n, n);
  dirs.middleCols(n, n) = -Matrix::Identity(n, n);
  if (q_extra > 0) dirs.rightCols(q_extra) = extra;
  return dirs;
}

Vector WitnessMap::input_at(const Vector& factors, double t) const {
  for (const WitnessBlock& b : blocks) {
    if (t >= b.slot_t0 - 1e-12 && t < b.slot_t1 - 1e-12) {
      Vector alpha = factors.segment(b.col_start, b.cols);
      alpha = alpha.cwiseMax(-1.0).cwiseMin(1.0);
      return u_center + u_generators * alpha;
    }
  }
  return u_center; // tail slot and fallback
}

TimePointResult ae_tp_outer(const LinSys& sys, const BackwardSpec& spec) {
  Timer timer;
  TimePointResult res;
  res.kind = SolutionKind::AEOuter;
  res.t = spec.horizon.t_end;
  const TpSetup su = tp_setup(sys, spec);
  res.log.add("setup_seconds", timer.lap());

  const Zonotope zw_hat = outer_particular_final(su.fc, su.ew, spec.sigma, spec.max_order);
  // Inner particular solutions keep every generator; reducing the subtrahend
  // would break the outer approximation direction.
  const Zonotope zu_check = inner_particular_final(su.fc, su.bu, spec.sigma).z;
  res.log.add("particular_seconds", timer.lap());

  const HPolytope summed = outer_minkowski_sum(spec.target, negate(zw_hat));
  const HPolytope eroded = minkowski_difference(summed, zu_check);
  res.log.add("minkowski_seconds", timer.lap());

  res.empty = is_empty(eroded);
  if (res.empty) res.empty_stage = "difference_with_input_solution";
  res.poly = linear_map(su.fc.exp_at_neg(spec.sigma), eroded, su.fc.exp_at(spec.sigma));
  res.log.add("map_seconds", timer.lap());
  log_poly(res.log, *res.poly);
  return res;
}

TimePointResult ae_tp_inner(const LinSys& sys, const BackwardSpec& spec) {
  Timer timer;
  TimePointResult res;
  res.kind = SolutionKind::AEInner;
  res.t = spec.horizon.t_end;
  const TpSetup su = tp_setup(sys, spec);
  res.log.add("setup_seconds", timer.lap());

  const Zonotope zu_hat = outer_particular_final(su.fc, su.bu, spec.sigma, spec.max_order);
  const Zonotope zw_check = inner_particular_final(su.fc, su.ew, spec.sigma).z;
  res.log.add("particular_seconds", timer.lap());

  const HPolytope eroded = minkowski_difference(spec.target, zu_hat);
  if (is_empty(eroded)) {
    res.empty = true;
    res.empty_stage = "target_minus_outer_input_solution";
    res.cz = ConstrainedZonotope::empty(sys.dim());
    return res;
  }
  res.log.add("minkowski_seconds", timer.lap());

  const ConstrainedZonotope cz = to_constrained_zonotope(eroded);
  res.log.add("conversion_seconds", timer.lap());
  res.cz = linear_map(su.fc.exp_at_neg(spec.sigma),
                      minkowski_sum(cz, negate(zw_check)));
  res.log.add("map_seconds", timer.lap());
  log_cz(res.log, *res.cz);
  return res;
}

TimePointResult ea_tp_outer(const LinSys& sys, const BackwardSpec& spec) {
  Timer timer;
  TimePointResult res;
  res.kind = SolutionKind::EAOuter;
  res.t = spec.horizon.t_end;
  const TpSetup su = tp_setup(sys, spec);
  res.log.add("setup_seconds", timer.lap());

  const Zonotope zw_check = inner_particular_final(su.fc, su.ew, spec.sigma).z;
  const Zonotope zu_hat = outer_particular_final(su.fc, su.bu, spec.sigma, spec.max_order);
  res.log.add("particular_seconds", timer.lap());

  const HPolytope eroded = minkowski_difference(spec.target, zw_check);
  if (is_empty(eroded)) {
    res.empty = true;
    res.empty_stage = "target_minus_disturbance_solution";
    res.cz = ConstrainedZonotope::empty(sys.dim());
    return res;
  }
  res.log.add("minkowski_seconds", timer.lap());

  const ConstrainedZonotope cz = to_constrained_zonotope(eroded);
  res.log.add("conversion_seconds", timer.lap());
  res.cz = linear_map(su.fc.exp_at_neg(spec.sigma), minkowski_sum(cz, negate(zu_hat)));
  res.log.add("map_seconds", timer.lap());
  log_cz(res.log, *res.cz);
  return res;
}

TimePointResult ea_tp_inner(const LinSys& sys, const BackwardSpec& spec) {
  Timer timer;
  TimePointResult res;
  res.kind = SolutionKind::EAInner;
  res.t = spec.horizon.t_end;
  const TpSetup su = tp_setup(sys, spec);
  res.log.add("setup_seconds", timer.lap());

  const Zonotope zw_hat = outer_particular_final(su.fc, su.ew, spec.sigma, spec.max_order);
  const InnerParticular zu_check = inner_particular_final(su.fc, su.bu, spec.sigma);
  res.log.add("particular_seconds", timer.lap());

  const HPolytope eroded = minkowski_difference(spec.target, zw_hat);
  if (is_empty(eroded)) {
    res.empty = true;
    res.empty_stage = "target_minus_outer_disturbance_solution";
    res.cz = ConstrainedZonotope::empty(sys.dim());
    return res;
  }
  res.log.add("minkowski_seconds", timer.lap());

  const ConstrainedZonotope cz = to_constrained_zonotope(eroded);
  res.log.add("conversion_seconds", timer.lap());
  res.cz = linear_map(su.fc.exp_at_neg(spec.sigma),
                      minkowski_sum(cz, negate(zu_check.z)));

  WitnessMap wit;
  wit.u_center = sys.U.c;
  wit.u_generators = sys.U.G;
  wit.blocks = zu_check.resolve(res.t, cz.num_generators());
  res.witness = std::move(wit);
  res.log.add("map_seconds", timer.lap());
  log_cz(res.log, *res.cz);
  return res;
}

TimeIntervalResult ae_ti_outer(const LinSys& sys, const BackwardSpec& spec) {
  if (spec.horizon.is_time_point)
    throw std::invalid_argument("ae_ti_outer requires an interval horizon");
  Timer timer;
  const int n = sys.dim();
  TimeIntervalResult res;
  res.kind = SolutionKind::AEOuter;
  res.grid = StepGrid(spec.horizon.t0, spec.horizon.t_end, spec.sigma);
  const double dt = res.grid.dt();
  const int eta = resolve_eta(sys.A, dt, spec);

  // Particular solutions run on the time-inverted dynamics -A; the matrices
  // -B, -E are absorbed as set negation.
  const Matrix a_inv = -sys.A;
  const FlowCache fci(a_inv, dt, eta, spec.sigma);
  const IntervalMatrix f_pos = curvature_f(sys.A, dt, eta);

  const Zonotope u_inv = negate(sys.input_set());
  const Zonotope w_inv = negate(sys.disturbance_set());
  const Vector w_comb = w_inv.c + u_inv.c; // combined constant trajectory
  const Zonotope w0 = centered(w_inv);
  const Zonotope u0 = centered(u_inv);

  const Zonotope zw0_step = outer_particular_step(a_inv, w0, dt, eta);
  const Zonotope zu0_step = linear_map(fci.phi(), u0);
  // Within-step contribution of the combined constant trajectory: the
  // interpolation segment toward phi * w plus the curvature bound G {w}.
  const Zonotope slot_term = minkowski_sum(
      segment_zonotope(Vector::Zero(n), fci.phi() * w_comb),
      interval_matrix_map(fci.curvature_g(), Zonotope::point(w_comb)));

  const Interval box = bounding_box(spec.target);
  const Zonotope box_z = Zonotope::from_interval(box);
  const ConstrainedZonotope cz_target = to_constrained_zonotope(spec.target, box_z);
  const Zonotope f_box = interval_matrix_map(f_pos, box_z);

  const Matrix dirs = default_directions(n, spec.directions);
  const int q = static_cast<int>(dirs.cols());
  res.log.add("setup_seconds", timer.lap());

  // Absolute-time transitions e^{-A (t0 + k dt)}.
  std::vector<Matrix> trans(spec.sigma + 1);
  Matrix exp_t0_inv = Matrix::Identity(n, n);
  if (spec.horizon.t0 > 0.0) exp_t0_inv = expm(a_inv, spec.horizon.t0);
  for (int k = 0; k <= spec.sigma; ++k)
    trans[k] = spec.horizon.t0 > 0.0 ? Matrix(exp_t0_inv * fci.exp_at(k)) : fci.exp_at(k);

  // State at t0: propagate the particular solutions over [0, t0].
  Zonotope zw0_cur = Zonotope::point(Vector::Zero(n));
  Vector ptw = Vector::Zero(n);
  Vector s_inner = Vector::Zero(q); // rho( inner U0 solution(t_k), -l_j )
  if (spec.horizon.t0 > 0.0) {
    const int sigma0 = std::max(1, static_cast<int>(std::llround(spec.horizon.t0 / dt)));
    const double dt0 = spec.horizon.t0 / sigma0;
    const int eta0 = resolve_eta(sys.A, dt0, spec);
    const FlowCache fci0(a_inv, dt0, eta0, sigma0);
    const Zonotope zw0_step0 = outer_particular_step(a_inv, w0, dt0, eta0);
    const Zonotope zu0_step0 = linear_map(fci0.phi(), u0);
    for (int j = 0; j < sigma0; ++j) {
      zw0_cur = propagate_particular(zw0_cur, fci0.exp_at(j), zw0_step0, spec.max_order);
      ptw += fci0.exp_at(j) * (fci0.phi() * w_comb);
      for (int l = 0; l < q; ++l)
        s_inner(l) += zu0_step0.support(fci0.exp_at(j).transpose() * (-dirs.col(l)));
    }
  }
  res.log.add("prepropagation_seconds", timer.lap());

  Vector p = Vector::Constant(q, -std::numeric_limits<double>::infinity());
  Vector rho_x_k(q);
  for (int l = 0; l < q; ++l)
    rho_x_k(l) = support(spec.target, trans[0].transpose() * dirs.col(l));

  std::vector<ConstrainedZonotope> raw;
  raw.reserve(spec.sigma);
  double support_seconds = 0.0;
  for (int k = 0; k < spec.sigma; ++k) {
    zw0_cur = propagate_particular(zw0_cur, trans[k], zw0_step, spec.max_order);
    const Zonotope traj_k =
        minkowski_sum(Zonotope::point(ptw), linear_map(trans[k], slot_term));
    Zonotope zw_int = minkowski_sum(zw0_cur, traj_k);
    if (spec.max_order > 0.0 && zw_int.order() > spec.max_order)
      zw_int = reduce_order(zw_int, spec.max_order);

    const ConstrainedZonotope m_next = linear_map(trans[k + 1], cz_target);
    const ConstrainedZonotope m_cur = linear_map(trans[k], cz_target);
    raw.push_back(minkowski_sum(
        minkowski_sum(convex_hull(m_next, m_cur), interval_matrix_map(f_pos, m_next)),
        zw_int));

    Timer sw;
    for (int l = 0; l < q; ++l) {
      const double rho_next = support(spec.target, trans[k + 1].transpose() * dirs.col(l));
      const double rho_f = f_box.support(trans[k + 1].transpose() * dirs.col(l));
      const double rho_w = zw_int.support(dirs.col(l));
      const double beta = -s_inner(l);
      p(l) = std::max(p(l), std::max(rho_x_k(l), rho_next) + rho_f + rho_w + beta);
      rho_x_k(l) = rho_next;
      s_inner(l) += zu0_step.support(trans[k].transpose() * (-dirs.col(l)));
    }
    support_seconds += sw.lap();

    ptw += trans[k] * (fci.phi() * w_comb);
  }
  res.log.add("piece_seconds", timer.lap() - support_seconds);
  res.log.add("support_seconds", support_seconds);

  const HPolytope clip(dirs.transpose(), p);
  res.pieces.reserve(spec.sigma);
  for (ConstrainedZonotope& piece : raw) {
    ConstrainedZonotope clipped = polytope_intersection(piece, clip);
    PieceResult pr;
    if (canonical_empty(clipped)) {
      pr.empty_stage = "direction_intersection";
    } else {
      pr.set = std::move(clipped);
    }
    res.pieces.push_back(std::move(pr));
  }
  res.log.add("intersection_seconds", timer.lap());
  return res;
}

TimeIntervalResult ea_ti_inner(const LinSys& sys, const BackwardSpec& spec) {
  if (spec.horizon.is_time_point)
    throw std::invalid_argument("ea_ti_inner requires an interval horizon");
  Timer timer;
  const int n = sys.dim();
  TimeIntervalResult res;
  res.kind = SolutionKind::EAInner;
  res.grid = StepGrid(spec.horizon.t0, spec.horizon.t_end, spec.sigma);
  const double dt = res.grid.dt();
  const int eta = resolve_eta(sys.A, dt, spec);
  const FlowCache fc(sys.A, dt, eta, spec.sigma + 1);

  const Zonotope bu = sys.input_set();
  const Zonotope ew = sys.disturbance_set();
  const Vector w_center = ew.c;
  const Zonotope w0 = centered(ew);

  const Interval box = bounding_box(spec.target);
  const Zonotope box_z = Zonotope::from_interval(box);
  const double mu = mu_bound(box_z.G, sys.A, dt);
  const Ball ball(mu, n);
  const Zonotope f_box = interval_matrix_map(fc.curvature_f(), box_z);

  const HPolytope p1 = minkowski_difference(minkowski_difference(spec.target, f_box), ball);
  const HPolytope p2 = minkowski_difference(
      minkowski_difference(linear_map(fc.exp_dt(), spec.target, fc.exp_neg_dt()), f_box),
      ball);
  const bool p1_empty = is_empty(p1);
  const bool p2_empty = is_empty(p2);

  // The pieces live in the e^{-A t_{k+1}} frame, where the constant-center
  // disturbance over tau_k contributes phi(t_{k+1}) w minus the within-step
  // integral: a backward interpolation segment plus the curvature bound.
  const Zonotope slot_term = minkowski_sum(
      segment_zonotope(Vector::Zero(n), Vector(-fc.phi() * w_center)),
      negate(interval_matrix_map(fc.curvature_g(), Zonotope::point(w_center))));
  const Zonotope zu_step = linear_map(fc.phi(), bu);
  const Zonotope zw0_step = outer_particular_step(sys.A, w0, dt, eta);
  res.log.add("setup_seconds", timer.lap());

  std::vector<Matrix> trans_pos(spec.sigma + 1), trans_neg(spec.sigma + 2);
  Matrix exp_t0 = Matrix::Identity(n, n);
  Matrix exp_t0_inv = Matrix::Identity(n, n);
  if (spec.horizon.t0 > 0.0) {
    exp_t0 = expm(sys.A, spec.horizon.t0);
    exp_t0_inv = expm(sys.A, -spec.horizon.t0);
  }
  for (int k = 0; k <= spec.sigma; ++k) {
    trans_pos[k] = spec.horizon.t0 > 0.0 ? Matrix(exp_t0 * fc.exp_at(k)) : fc.exp_at(k);
    trans_neg[k] =
        spec.horizon.t0 > 0.0 ? Matrix(exp_t0_inv * fc.exp_at_neg(k)) : fc.exp_at_neg(k);
  }
  trans_neg[spec.sigma + 1] = trans_neg[spec.sigma] * fc.exp_neg_dt();

  // Pre-propagate the particular solutions over [0, t0].
  InnerParticular zu = InnerParticular::zero(n);
  Zonotope zw0_cur = Zonotope::point(Vector::Zero(n));
  Vector ptw = Vector::Zero(n);
  if (spec.horizon.t0 > 0.0) {
    const int sigma0 = std::max(1, static_cast<int>(std::llround(spec.horizon.t0 / dt)));
    const double dt0 = spec.horizon.t0 / sigma0;
    const int eta0 = resolve_eta(sys.A, dt0, spec);
    const FlowCache fc0(sys.A, dt0, eta0, sigma0);
    const Zonotope zu_step0 = linear_map(fc0.phi(), bu);
    const Zonotope zw0_step0 = outer_particular_step(sys.A, w0, dt0, eta0);
    for (int j = 0; j < sigma0; ++j) {
      zu.append(fc0.exp_at(j), zu_step0, j * dt0, dt0);
      zw0_cur = propagate_particular(zw0_cur, fc0.exp_at(j), zw0_step0, spec.max_order);
      ptw += fc0.exp_at(j) * (fc0.phi() * w_center);
    }
  }
  res.log.add("prepropagation_seconds", timer.lap());

  res.pieces.reserve(spec.sigma);
  for (int k = 0; k < spec.sigma; ++k) {
    const double t_k = res.grid.point(k);
    zw0_cur = propagate_particular(zw0_cur, trans_pos[k], zw0_step, spec.max_order);
    ptw += trans_pos[k] * (fc.phi() * w_center); // now at t_{k+1}
    Zonotope zw_int = minkowski_sum(zw0_cur, minkowski_sum(Zonotope::point(ptw), slot_term));
    if (spec.max_order > 0.0 && zw_int.order() > spec.max_order)
      zw_int = reduce_order(zw_int, spec.max_order);

    auto erode = [&](const HPolytope& p, bool structurally_empty)
        -> std::optional<ConstrainedZonotope> {
      if (structurally_empty) return std::nullopt;
      const HPolytope d = minkowski_difference(p, zw_int);
      ConstrainedZonotope cz = to_constrained_zonotope(d, box_z);
      if (canonical_empty(cz) || cz.is_empty()) return std::nullopt;
      return cz;
    };
    const std::optional<ConstrainedZonotope> cz1 = erode(p1, p1_empty);
    const std::optional<ConstrainedZonotope> cz2 = erode(p2, p2_empty);

    PieceResult pr;
    if (!cz1 && !cz2) {
      pr.empty_stage = "target_erosion";
    } else {
      const ConstrainedZonotope hull =
          cz1 && cz2 ? convex_hull(*cz1, *cz2) : (cz1 ? *cz1 : *cz2);
      const ConstrainedZonotope piece = minkowski_sum(hull, negate(zu.z));

      WitnessMap wit;
      wit.u_center = sys.U.c;
      wit.u_generators = sys.U.G;
      wit.blocks = zu.resolve(t_k, hull.num_generators());
      wit.tail_t0 = t_k;
      wit.tail_t1 = t_k + dt;
      pr.witness = std::move(wit);
      pr.set = linear_map(trans_neg[k + 1], piece);
    }
    res.pieces.push_back(std::move(pr));

    zu.append(trans_pos[k], zu_step, t_k, dt);
  }
  res.log.add("loop_seconds", timer.lap());
  return res;
}

} // namespace reach
