#include <doctest.h>

#include <cmath>
#include <random>

#include "reach/backward.hpp"
#include "reach/oracle.hpp"
#include "test_common.hpp"

using namespace reach;
using namespace reach::testing;

namespace {

Matrix matrix1(double v) { return v * Matrix::Ones(1, 1); }

LinSys scalar_benchmark() {
  // x' = -x + u + w with U = [-0.1, 0.1], W = [-0.05, 0.05]
  return LinSys(matrix1(-1.0), matrix1(1.0), matrix1(1.0),
                Zonotope(Vector::Zero(1), 0.1 * Matrix::Ones(1, 1)),
                Zonotope(Vector::Zero(1), 0.05 * Matrix::Ones(1, 1)));
}

BackwardSpec scalar_spec(double t, int sigma) {
  BackwardSpec spec;
  spec.target = HPolytope::box(Vector::Constant(1, -1.0), Vector::Constant(1, 1.0));
  spec.horizon = Horizon::time_point(t);
  spec.sigma = sigma;
  return spec;
}

LinSys planar_system() {
  Matrix a(2, 2);
  a << -0.4, 1.0, -1.0, -0.4;
  Matrix b(2, 1);
  b << 0.0, 1.0;
  Matrix e(2, 1);
  e << 1.0, 0.0;
  return LinSys(a, b, e, Zonotope(Vector::Zero(1), 0.2 * Matrix::Ones(1, 1)),
                Zonotope(Vector::Zero(1), 0.1 * Matrix::Ones(1, 1)));
}

BackwardSpec planar_spec(double t, int sigma) {
  BackwardSpec spec;
  spec.target = HPolytope::box(Vector::Constant(2, -1.0), Vector::Constant(2, 1.0));
  spec.horizon = Horizon::time_point(t);
  spec.sigma = sigma;
  return spec;
}

BackwardSpec planar_interval_spec(double t0, double t_end, int sigma) {
  BackwardSpec spec;
  spec.target = HPolytope::box(Vector::Constant(2, -1.0), Vector::Constant(2, 1.0));
  spec.horizon = Horizon::time_interval(t0, t_end);
  spec.sigma = sigma;
  return spec;
}

LinSys with_zero_inputs(const LinSys& sys) {
  LinSys out = sys;
  out.U = Zonotope::point(Vector::Zero(sys.U.dim()));
  out.W = Zonotope::point(Vector::Zero(sys.W.dim()));
  return out;
}

LinSys scale_input(const LinSys& sys, double factor) {
  LinSys out = sys;
  out.U = Zonotope(sys.U.c, factor * sys.U.G);
  return out;
}

LinSys scale_disturbance(const LinSys& sys, double factor) {
  LinSys out = sys;
  out.W = Zonotope(sys.W.c, factor * sys.W.G);
  return out;
}

double result_support(const TimePointResult& res, const Vector& l) {
  return res.poly ? support(*res.poly, l) : res.cz->support(l);
}

} // namespace

TEST_CASE("time-point AE with zero inputs is the mapped target") {
  const LinSys sys = with_zero_inputs(planar_system());
  const BackwardSpec spec = planar_spec(0.7, 40);
  const Matrix flow = expm(sys.A, -0.7);

  const TimePointResult outer = ae_tp_outer(sys, spec);
  const TimePointResult inner = ae_tp_inner(sys, spec);
  REQUIRE_FALSE(outer.empty);
  REQUIRE_FALSE(inner.empty);
  const ConstrainedZonotope mapped =
      linear_map(flow, to_constrained_zonotope(spec.target));
  std::mt19937_64 rng(51);
  for (int i = 0; i < 16; ++i) {
    const Vector l = random_direction(2, rng);
    CHECK(result_support(outer, l) == doctest::Approx(mapped.support(l)).epsilon(1e-7));
    CHECK(result_support(inner, l) == doctest::Approx(mapped.support(l)).epsilon(1e-7));
  }
}

TEST_CASE("time-point algorithms match the scalar analytic oracle") {
  const LinSys sys = scalar_benchmark();
  const BackwardSpec spec = scalar_spec(1.0, 1000);
  const Interval u_iv = sys.U.bounding_box();
  const Interval w_iv = sys.W.bounding_box();
  const Interval x_iv(Vector::Constant(1, -1.0), Vector::Constant(1, 1.0));
  const Vector e1 = Vector::Ones(1);

  const auto check_against = [&](const TimePointResult& res, SolutionKind kind,
                                 bool is_outer) {
    const auto exact = analytic_1d_brs(-1.0, u_iv, w_iv, x_iv, 1.0, kind);
    REQUIRE(exact.has_value());
    const double hi = result_support(res, e1);
    const double lo = -result_support(res, -e1);
    CHECK(std::abs(hi - exact->hi(0)) < 1e-3);
    CHECK(std::abs(lo - exact->lo(0)) < 1e-3);
    if (is_outer) {
      CHECK(hi >= exact->hi(0) - 1e-9);
      CHECK(lo <= exact->lo(0) + 1e-9);
    } else {
      CHECK(hi <= exact->hi(0) + 1e-9);
      CHECK(lo >= exact->lo(0) - 1e-9);
    }
  };
  check_against(ae_tp_outer(sys, spec), SolutionKind::AEOuter, true);
  check_against(ae_tp_inner(sys, spec), SolutionKind::AEInner, false);
  check_against(ea_tp_outer(sys, spec), SolutionKind::EAOuter, true);
  check_against(ea_tp_inner(sys, spec), SolutionKind::EAInner, false);
}

TEST_CASE("zero-dynamics EA closed form") {
  // A = 0, B = I, U = [-1, 1], W = {0}, X_end = [-1, 1], t = 1 -> [-2, 2]
  LinSys sys(Matrix::Zero(1, 1), Matrix::Identity(1, 1), Matrix::Identity(1, 1),
             Zonotope(Vector::Zero(1), Matrix::Ones(1, 1)),
             Zonotope::point(Vector::Zero(1)));
  const BackwardSpec spec = scalar_spec(1.0, 100);
  const TimePointResult outer = ea_tp_outer(sys, spec);
  const Vector e1 = Vector::Ones(1);
  CHECK(result_support(outer, e1) == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(result_support(outer, -e1) == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("ordering of inner and outer approximations") {
  std::mt19937_64 rng(52);
  const LinSys sys = planar_system();
  const BackwardSpec spec = planar_spec(0.8, 60);
  const TimePointResult ae_out = ae_tp_outer(sys, spec);
  const TimePointResult ae_in = ae_tp_inner(sys, spec);
  const TimePointResult ea_out = ea_tp_outer(sys, spec);
  const TimePointResult ea_in = ea_tp_inner(sys, spec);
  REQUIRE_FALSE(ae_out.empty);
  REQUIRE_FALSE(ae_in.empty);
  Matrix dirs(2, spec.target.num_constraints() + 32);
  dirs.leftCols(spec.target.num_constraints()) = spec.target.C.transpose();
  for (int i = 0; i < 32; ++i)
    dirs.col(spec.target.num_constraints() + i) = random_direction(2, rng);
  for (int j = 0; j < dirs.cols(); ++j) {
    const Vector l = dirs.col(j);
    CHECK(result_support(ae_in, l) <= result_support(ae_out, l) + 1e-8);
    CHECK(result_support(ea_in, l) <= result_support(ea_out, l) + 1e-8);
  }
}

TEST_CASE("monotonicity in the input and disturbance capacity") {
  std::mt19937_64 rng(53);
  const LinSys sys = planar_system();
  const BackwardSpec spec = planar_spec(0.8, 40);
  std::vector<Vector> dirs;
  for (int i = 0; i < 12; ++i) dirs.push_back(random_direction(2, rng));

  SUBCASE("enlarging U shrinks AE outer and grows EA inner") {
    const TimePointResult ae_base = ae_tp_outer(sys, spec);
    const TimePointResult ae_more = ae_tp_outer(scale_input(sys, 2.0), spec);
    const TimePointResult ea_base = ea_tp_inner(sys, spec);
    const TimePointResult ea_more = ea_tp_inner(scale_input(sys, 2.0), spec);
    REQUIRE_FALSE(ae_more.empty);
    for (const Vector& l : dirs) {
      CHECK(result_support(ae_more, l) <= result_support(ae_base, l) + 1e-8);
      CHECK(result_support(ea_more, l) >= result_support(ea_base, l) - 1e-8);
    }
  }
  SUBCASE("enlarging W grows AE outer and shrinks EA inner") {
    const TimePointResult ae_base = ae_tp_outer(sys, spec);
    const TimePointResult ae_more = ae_tp_outer(scale_disturbance(sys, 2.0), spec);
    const TimePointResult ea_base = ea_tp_inner(sys, spec);
    const TimePointResult ea_more = ea_tp_inner(scale_disturbance(sys, 2.0), spec);
    for (const Vector& l : dirs) {
      CHECK(result_support(ae_more, l) >= result_support(ae_base, l) - 1e-8);
      CHECK(result_support(ea_more, l) <= result_support(ea_base, l) + 1e-8);
    }
  }
}

TEST_CASE("EA gap shrinks linearly with the step size") {
  const LinSys sys = planar_system();
  std::mt19937_64 rng(54);
  std::vector<Vector> dirs;
  for (int i = 0; i < 8; ++i) dirs.push_back(random_direction(2, rng));
  const auto gap = [&](int sigma) {
    BackwardSpec spec = planar_spec(0.5, sigma);
    spec.max_order = 1e6; // isolate the step-size convergence from reduction
    const TimePointResult outer = ea_tp_outer(sys, spec);
    const TimePointResult inner = ea_tp_inner(sys, spec);
    double worst = 0.0;
    for (const Vector& l : dirs)
      worst = std::max(worst, result_support(outer, l) - result_support(inner, l));
    return worst;
  };
  const double coarse = gap(25);
  const double fine = gap(100);
  CHECK(fine <= coarse / 2.0);
}

TEST_CASE("unperturbed mode") {
  const LinSys sys = planar_system();
  SUBCASE("idempotent on zero disturbance") {
    const LinSys once = unperturbed_mode(sys);
    const LinSys twice = unperturbed_mode(once);
    CHECK(once.W.num_generators() == 0);
    CHECK((once.W.c - twice.W.c).norm() == 0.0);
  }
  SUBCASE("AE outer loses the disturbance inflation") {
    const BackwardSpec spec = planar_spec(0.6, 40);
    const TimePointResult with_w = ae_tp_outer(sys, spec);
    const TimePointResult without_w = ae_tp_outer(unperturbed_mode(sys), spec);
    std::mt19937_64 rng(55);
    for (int i = 0; i < 8; ++i) {
      const Vector l = random_direction(2, rng);
      CHECK(result_support(without_w, l) <= result_support(with_w, l) + 1e-9);
    }
  }
  SUBCASE("EA inner and outer coincide as the step count grows") {
    const LinSys clean = unperturbed_mode(sys);
    const auto gap = [&](int sigma) {
      BackwardSpec spec = planar_spec(0.5, sigma);
      spec.max_order = 1e6; // isolate the step-size convergence from reduction
      const TimePointResult outer = ea_tp_outer(clean, spec);
      const TimePointResult inner = ea_tp_inner(clean, spec);
      Vector e1 = Vector::Zero(2);
      e1(0) = 1.0;
      return result_support(outer, e1) - result_support(inner, e1);
    };
    CHECK(gap(100) <= gap(25) / 2.0);
    CHECK(gap(100) < 1e-3);
  }
}

TEST_CASE("static flow keeps every interval piece at the target") {
  // A = 0 and zero inputs: each piece equals X_end; the direction bounds are
  // inert.
  LinSys sys(Matrix::Zero(2, 2), Matrix::Identity(2, 2), Matrix::Identity(2, 2),
             Zonotope::point(Vector::Zero(2)), Zonotope::point(Vector::Zero(2)));
  BackwardSpec spec;
  spec.target = HPolytope::box((Vector(2) << -0.5, -1.0).finished(),
                               (Vector(2) << 1.5, 1.0).finished());
  spec.horizon = Horizon::time_interval(0.0, 1.0);
  spec.sigma = 7;

  SUBCASE("AE pieces") {
    const TimeIntervalResult res = ae_ti_outer(sys, spec);
    REQUIRE(res.pieces.size() == 7);
    for (const PieceResult& pr : res.pieces) {
      REQUIRE_FALSE(pr.empty());
      for (int j = 0; j < spec.target.num_constraints(); ++j) {
        const Vector l = spec.target.C.row(j).transpose();
        CHECK(pr.set->support(l) == doctest::Approx(spec.target.d(j)).epsilon(1e-7));
      }
    }
  }
  SUBCASE("EA pieces") {
    const TimeIntervalResult res = ea_ti_inner(sys, spec);
    REQUIRE(res.pieces.size() == 7);
    for (const PieceResult& pr : res.pieces) {
      REQUIRE_FALSE(pr.empty());
      for (int j = 0; j < spec.target.num_constraints(); ++j) {
        const Vector l = spec.target.C.row(j).transpose();
        CHECK(pr.set->support(l) == doctest::Approx(spec.target.d(j)).epsilon(1e-7));
      }
    }
  }
}

TEST_CASE("degenerate single-step horizons") {
  const LinSys sys = planar_system();
  const BackwardSpec spec = planar_interval_spec(0.0, 0.1, 1);
  CHECK(ae_ti_outer(sys, spec).pieces.size() == 1);
  CHECK(ea_ti_inner(sys, spec).pieces.size() == 1);
}

TEST_CASE("time-point members belong to the interval union") {
  // Points of the AE inner time-point solution at interior grid times must
  // lie in some piece of the Algorithm-2 union.
  const LinSys sys = scalar_benchmark();
  BackwardSpec spec = scalar_spec(1.0, 100);
  spec.horizon = Horizon::time_interval(0.0, 1.0);
  const TimeIntervalResult union_res = ae_ti_outer(sys, spec);

  for (int k : {10, 50, 90}) {
    BackwardSpec tp = scalar_spec(union_res.grid.point(k), 100);
    const TimePointResult inner = ae_tp_inner(sys, tp);
    REQUIRE_FALSE(inner.empty);
    const auto factors = sample_cz_factors(*inner.cz, 200, 1234 + k);
    int misses = 0;
    for (const Vector& alpha : factors) {
      const Vector x0 = inner.cz->at(alpha);
      bool member = false;
      for (int probe : {k, k - 1, k + 1}) {
        if (probe < 0 || probe >= spec.sigma || union_res.pieces[probe].empty()) continue;
        if (union_res.pieces[probe].set->contains_point(x0, 1e-8)) {
          member = true;
          break;
        }
      }
      if (!member) {
        for (int probe = 0; probe < spec.sigma && !member; ++probe)
          if (!union_res.pieces[probe].empty() &&
              union_res.pieces[probe].set->contains_point(x0, 1e-8))
            member = true;
      }
      if (!member) ++misses;
    }
    CHECK(misses == 0);
  }
}

TEST_CASE("witness replay validates the EA sets") {
  const LinSys sys = planar_system();
  SUBCASE("time point") {
    const BackwardSpec spec = planar_spec(0.6, 50);
    const TimePointResult inner = ea_tp_inner(sys, spec);
    REQUIRE_FALSE(inner.empty);
    REQUIRE(inner.witness.has_value());
    ReplayOptions opt;
    opt.num_initial_states = 40;
    opt.num_disturbances = 15;
    opt.seed = 5;
    const GameVerdict verdict = ea_witness_replay(sys, *inner.cz, *inner.witness,
                                                  spec.target, inner.t, inner.t, opt);
    CHECK(verdict.all_passed());
    CHECK(verdict.worst_violation <= opt.tol);
  }
  SUBCASE("interval pieces") {
    const BackwardSpec spec = planar_interval_spec(0.0, 0.6, 40);
    const TimeIntervalResult res = ea_ti_inner(sys, spec);
    ReplayOptions opt;
    opt.num_initial_states = 15;
    opt.num_disturbances = 8;
    opt.seed = 6;
    for (size_t k = 0; k < res.pieces.size(); k += 13) {
      const PieceResult& pr = res.pieces[k];
      if (pr.empty()) continue;
      const GameVerdict verdict = ea_witness_replay(
          sys, *pr.set, *pr.witness, spec.target, res.grid.point(static_cast<int>(k)),
          res.grid.point(static_cast<int>(k) + 1), opt);
      CHECK(verdict.all_passed());
    }
  }
}

TEST_CASE("AE soundness by backward sampling with zero input") {
  const LinSys sys = unperturbed_mode(planar_system());
  LinSys no_u = sys;
  no_u.U = Zonotope::point(Vector::Zero(1));
  no_u.W = planar_system().W; // keep the disturbance
  SUBCASE("time point") {
    const BackwardSpec spec = planar_spec(0.7, 50);
    const TimePointResult outer = ae_tp_outer(no_u, spec);
    SamplingOptions opt;
    opt.num_samples = 500;
    opt.seed = 9;
    const GameVerdict verdict = ae_backward_sampling(no_u, spec.target, outer, opt);
    CHECK(verdict.all_passed());
  }
  SUBCASE("interval union") {
    const BackwardSpec spec = planar_interval_spec(0.0, 0.7, 50);
    const TimeIntervalResult res = ae_ti_outer(no_u, spec);
    SamplingOptions opt;
    opt.num_samples = 300;
    opt.seed = 10;
    const GameVerdict verdict = ae_backward_sampling(no_u, spec.target, res, opt);
    CHECK(verdict.all_passed());
  }
}

TEST_CASE("interval horizons with a positive start time") {
  const LinSys sys = planar_system();
  const BackwardSpec spec = planar_interval_spec(0.3, 0.9, 30);
  const TimeIntervalResult ea = ea_ti_inner(sys, spec);
  CHECK(ea.pieces.size() == 30);
  ReplayOptions opt;
  opt.num_initial_states = 10;
  opt.num_disturbances = 6;
  opt.seed = 12;
  int checked = 0;
  for (size_t k = 0; k < ea.pieces.size(); k += 10) {
    if (ea.pieces[k].empty()) continue;
    const GameVerdict verdict = ea_witness_replay(
        sys, *ea.pieces[k].set, *ea.pieces[k].witness, spec.target,
        ea.grid.point(static_cast<int>(k)), ea.grid.point(static_cast<int>(k) + 1), opt);
    CHECK(verdict.all_passed());
    ++checked;
  }
  CHECK(checked > 0);

  const TimeIntervalResult ae = ae_ti_outer(sys, spec);
  CHECK(ae.pieces.size() == 30);
}
