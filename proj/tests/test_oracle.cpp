#include <doctest.h>

#include <cmath>
#include <random>

#include "reach/backward.hpp"
#include "reach/linflow.hpp"
#include "reach/oracle.hpp"
#include "test_common.hpp"

using namespace reach;
using namespace reach::testing;

namespace {

Matrix matrix1(double v) { return v * Matrix::Ones(1, 1); }

LinSys scalar_system(double a, double u_radius, double w_radius) {
  return LinSys(matrix1(a), matrix1(1.0), matrix1(1.0),
                Zonotope(Vector::Zero(1), u_radius * Matrix::Ones(1, 1)),
                Zonotope(Vector::Zero(1), w_radius * Matrix::Ones(1, 1)));
}

Interval unit_interval() {
  return Interval(Vector::Constant(1, -1.0), Vector::Constant(1, 1.0));
}

Interval scalar_interval(double lo, double hi) {
  return Interval(Vector::Constant(1, lo), Vector::Constant(1, hi));
}

} // namespace

TEST_CASE("ode simulation") {
  SUBCASE("no dynamics and no forcing returns the initial state") {
    LinSys sys(Matrix::Zero(2, 2), Matrix::Identity(2, 2), Matrix::Identity(2, 2),
               Zonotope::point(Vector::Zero(2)), Zonotope::point(Vector::Zero(2)));
    Vector x0(2);
    x0 << 0.3, -0.7;
    const PiecewiseConstantSignal zero({Vector::Zero(2)}, 1.0);
    CHECK((ode_simulate(sys, x0, zero, zero, 1.0) - x0).norm() < 1e-12);
  }
  SUBCASE("scalar variation of constants") {
    const LinSys sys = scalar_system(-1.0, 1.0, 1.0);
    Vector x0(1);
    x0 << 0.4;
    const PiecewiseConstantSignal u({Vector::Ones(1)}, 1.0);
    const PiecewiseConstantSignal w({Vector::Zero(1)}, 1.0);
    const double expected = std::exp(-1.0) * 0.4 + (1.0 - std::exp(-1.0));
    CHECK(ode_simulate(sys, x0, u, w, 1.0)(0) == doctest::Approx(expected).epsilon(1e-10));
  }
  SUBCASE("superposition of initial state, input, and disturbance") {
    std::mt19937_64 rng(61);
    Matrix a(2, 2);
    a << -0.3, 1.2, -0.9, -0.1;
    LinSys sys(a, Matrix::Identity(2, 2), Matrix::Identity(2, 2),
               Zonotope::point(Vector::Zero(2)), Zonotope::point(Vector::Zero(2)));
    const double dt = 0.1, t = 0.7;
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    std::vector<Vector> uv, wv;
    for (int i = 0; i < 8; ++i) {
      uv.push_back((Vector(2) << uni(rng), uni(rng)).finished());
      wv.push_back((Vector(2) << uni(rng), uni(rng)).finished());
    }
    const PiecewiseConstantSignal u(uv, dt), w(wv, dt);
    const PiecewiseConstantSignal zero({Vector::Zero(2)}, 1.0);
    Vector x0(2);
    x0 << 0.5, -0.2;
    const Vector full = ode_simulate(sys, x0, u, w, t);
    const Vector parts = ode_simulate(sys, x0, zero, zero, t) +
                         ode_simulate(sys, Vector::Zero(2), u, zero, t) +
                         ode_simulate(sys, Vector::Zero(2), zero, w, t);
    CHECK((full - parts).lpNorm<Eigen::Infinity>() < 1e-9);
  }
  SUBCASE("matches the exact LTI solution on the benchmark systems") {
    // x(t) = e^{At} x0 + Phi(t) (B u + E w) for constant signals.
    std::mt19937_64 rng(62);
    for (double a_scale : {0.0, 1.0}) {
      Matrix a(4, 4);
      a.setZero();
      a(0, 1) = a_scale;
      a(2, 3) = a_scale;
      LinSys sys(a, Matrix::Identity(4, 4), Matrix::Identity(4, 4),
                 Zonotope::point(Vector::Zero(4)), Zonotope::point(Vector::Zero(4)));
      Vector x0(4), uc(4);
      for (int i = 0; i < 4; ++i) {
        x0(i) = random_direction(1, rng)(0);
        uc(i) = random_direction(1, rng)(0);
      }
      const double t = 1.3;
      const PiecewiseConstantSignal u({uc}, 2.0);
      const PiecewiseConstantSignal w({Vector::Zero(4)}, 2.0);
      const Vector exact = expm(sys.A, t) * x0 + particular_integral(sys.A, t) * uc;
      CHECK((ode_simulate(sys, x0, u, w, t) - exact).lpNorm<Eigen::Infinity>() < 1e-9);
    }
  }
  SUBCASE("signals must cover the horizon") {
    const LinSys sys = scalar_system(-1.0, 1.0, 1.0);
    const PiecewiseConstantSignal small({Vector::Zero(1)}, 0.2);
    CHECK_THROWS(ode_simulate(sys, Vector::Zero(1), small, small, 1.0));
  }
}

TEST_CASE("analytic scalar backward reachable interval") {
  SUBCASE("zero input and disturbance map the target") {
    const auto iv = analytic_1d_brs(0.5, scalar_interval(0, 0), scalar_interval(0, 0),
                                    unit_interval(), 1.0, SolutionKind::AEOuter);
    REQUIRE(iv.has_value());
    CHECK(iv->hi(0) == doctest::Approx(std::exp(-0.5)));
    CHECK(iv->lo(0) == doctest::Approx(-std::exp(-0.5)));
  }
  SUBCASE("AE at a = 0 matches plain interval arithmetic") {
    const double t = 2.0;
    const auto iv =
        analytic_1d_brs(0.0, scalar_interval(-0.1, 0.2), scalar_interval(-0.3, 0.05),
                        scalar_interval(-1.0, 2.0), t, SolutionKind::AEInner);
    REQUIRE(iv.has_value());
    // X_end (+) -tW (-) tU evaluated endpoint-wise
    CHECK(iv->lo(0) == doctest::Approx(-1.0 - t * 0.05 - t * (-0.1)));
    CHECK(iv->hi(0) == doctest::Approx(2.0 - t * (-0.3) - t * 0.2));
  }
  SUBCASE("symmetric data give symmetric results") {
    for (const SolutionKind kind : {SolutionKind::AEOuter, SolutionKind::EAInner}) {
      const auto iv = analytic_1d_brs(-1.0, scalar_interval(-0.2, 0.2),
                                      scalar_interval(-0.1, 0.1), unit_interval(), 1.5, kind);
      REQUIRE(iv.has_value());
      CHECK(iv->lo(0) == doctest::Approx(-iv->hi(0)));
    }
  }
  SUBCASE("forward endpoint arithmetic recovers the target for AE with a = 0") {
    const double t = 1.2;
    const Interval w = scalar_interval(-0.3, 0.1);
    const Interval x = scalar_interval(-0.5, 1.5);
    const auto iv = analytic_1d_brs(0.0, scalar_interval(0, 0), w, x, t,
                                    SolutionKind::AEOuter);
    REQUIRE(iv.has_value());
    CHECK(iv->lo(0) + t * w.hi(0) == doctest::Approx(x.lo(0)));
    CHECK(iv->hi(0) + t * w.lo(0) == doctest::Approx(x.hi(0)));
  }
  SUBCASE("oversized erosion reports emptiness") {
    CHECK_FALSE(analytic_1d_brs(0.0, scalar_interval(0, 0), scalar_interval(-2.0, 2.0),
                                unit_interval(), 1.0, SolutionKind::EAOuter)
                    .has_value());
  }
}

TEST_CASE("membership checks") {
  const HPolytope box = HPolytope::box(Vector::Constant(2, -1.0), Vector::Constant(2, 1.0));
  const ConstrainedZonotope cz = to_constrained_zonotope(box);
  SUBCASE("center belongs to the set") {
    CHECK(membership(Vector::Zero(2), cz));
    CHECK(membership(Vector::Zero(2), box));
  }
  SUBCASE("far point does not") {
    CHECK_FALSE(membership(Vector::Constant(2, 3.0), box));
    CHECK_FALSE(membership(Vector::Constant(2, 3.0), cz));
  }
  SUBCASE("support points sit on the boundary within tolerance") {
    std::mt19937_64 rng(63);
    const Vector l = random_direction(2, rng);
    // boundary point of the box in direction l
    Vector x(2);
    x << (l(0) >= 0 ? 1.0 : -1.0), (l(1) >= 0 ? 1.0 : -1.0);
    CHECK(membership(x, box, 1e-9));
    CHECK(membership(x, cz, 1e-9));
  }
}

TEST_CASE("directional gap") {
  std::mt19937_64 rng(64);
  Matrix dirs(2, 16);
  for (int i = 0; i < 16; ++i) dirs.col(i) = random_direction(2, rng);
  const ConstrainedZonotope box = to_constrained_zonotope(
      HPolytope::box(Vector::Constant(2, -1.0), Vector::Constant(2, 1.0)));
  SUBCASE("identical sets have zero gap") {
    CHECK(std::abs(directional_gap(box, box, dirs)) < 1e-9);
  }
  SUBCASE("inflated outer set certifies containment") {
    const ConstrainedZonotope fat = inflate(box, 1.25);
    const double gap = directional_gap(box, fat, dirs);
    CHECK(gap < 0.0);
    // in each tested direction the margin is a quarter of the box support
    double expected = -1e100;
    for (int i = 0; i < 16; ++i)
      expected = std::max(expected, -0.25 * box.support(dirs.col(i)));
    CHECK(gap == doctest::Approx(expected).epsilon(1e-6));
  }
  SUBCASE("matches brute-force vertex supports for boxes") {
    const Interval ia = random_interval(2, rng);
    const Interval ib = random_interval(2, rng);
    const ConstrainedZonotope a = to_constrained_zonotope(HPolytope::from_interval(ia));
    const ConstrainedZonotope b = to_constrained_zonotope(HPolytope::from_interval(ib));
    const auto va = zonotope_sign_points(Zonotope::from_interval(ia));
    const auto vb = zonotope_sign_points(Zonotope::from_interval(ib));
    double expected = -1e100;
    for (int i = 0; i < 16; ++i) {
      double sa = -1e100, sb = -1e100;
      for (const Vector& p : va) sa = std::max(sa, dirs.col(i).dot(p));
      for (const Vector& p : vb) sb = std::max(sb, dirs.col(i).dot(p));
      expected = std::max(expected, sa - sb);
    }
    CHECK(directional_gap(a, b, dirs) == doctest::Approx(expected).epsilon(1e-7));
  }
}

TEST_CASE("witness replay oracle") {
  SUBCASE("static target with no inputs passes completely") {
    LinSys sys(Matrix::Zero(1, 1), matrix1(1.0), matrix1(1.0),
               Zonotope::point(Vector::Zero(1)), Zonotope::point(Vector::Zero(1)));
    const HPolytope target = HPolytope::box(Vector::Constant(1, -1.0), Vector::Constant(1, 1.0));
    const ConstrainedZonotope piece = to_constrained_zonotope(target);
    WitnessMap witness;
    witness.u_center = Vector::Zero(1);
    witness.u_generators = Matrix(1, 0);
    witness.tail_t0 = 0.0;
    witness.tail_t1 = 1.0;
    ReplayOptions opt;
    opt.num_initial_states = 30;
    opt.num_disturbances = 5;
    const GameVerdict verdict = ea_witness_replay(sys, piece, witness, target, 0.5, 1.0, opt);
    CHECK(verdict.all_passed());
  }
  SUBCASE("scalar benchmark passes and its inflation fails") {
    const LinSys sys = scalar_system(-1.0, 0.1, 0.05);
    BackwardSpec spec;
    spec.target = HPolytope::box(Vector::Constant(1, -1.0), Vector::Constant(1, 1.0));
    spec.horizon = Horizon::time_point(1.0);
    spec.sigma = 200;
    const TimePointResult inner = ea_tp_inner(sys, spec);
    REQUIRE_FALSE(inner.empty);
    ReplayOptions opt;
    opt.num_initial_states = 50;
    opt.num_disturbances = 20;
    opt.seed = 3;
    const GameVerdict good =
        ea_witness_replay(sys, *inner.cz, *inner.witness, spec.target, 1.0, 1.0, opt);
    CHECK(good.all_passed());

    // Negative control: a 10% inflated set must produce failures.
    const GameVerdict bad = ea_witness_replay(sys, inflate(*inner.cz, 1.1), *inner.witness,
                                              spec.target, 1.0, 1.0, opt);
    CHECK(bad.passes < bad.samples);
    CHECK(bad.worst_violation > opt.tol);
  }
}

TEST_CASE("backward sampling oracle") {
  SUBCASE("no disturbance lands exactly on the mapped target") {
    LinSys sys(matrix1(-0.8), matrix1(1.0), matrix1(1.0),
               Zonotope::point(Vector::Zero(1)), Zonotope::point(Vector::Zero(1)));
    BackwardSpec spec;
    spec.target = HPolytope::box(Vector::Constant(1, -1.0), Vector::Constant(1, 1.0));
    spec.horizon = Horizon::time_point(0.9);
    spec.sigma = 50;
    const TimePointResult outer = ae_tp_outer(sys, spec);
    SamplingOptions opt;
    opt.num_samples = 200;
    opt.seed = 4;
    CHECK(ae_backward_sampling(sys, spec.target, outer, opt).all_passed());
  }
  SUBCASE("scalar benchmark with zero input passes and deflation fails") {
    const LinSys sys = scalar_system(-1.0, 0.0, 0.05);
    BackwardSpec spec;
    spec.target = HPolytope::box(Vector::Constant(1, -1.0), Vector::Constant(1, 1.0));
    spec.horizon = Horizon::time_point(1.0);
    spec.sigma = 100;
    const TimePointResult outer = ae_tp_outer(sys, spec);
    SamplingOptions opt;
    opt.num_samples = 500;
    opt.seed = 5;
    CHECK(ae_backward_sampling(sys, spec.target, outer, opt).all_passed());

    TimePointResult deflated = outer;
    deflated.poly = deflate(*outer.poly, 0.9);
    const GameVerdict bad = ae_backward_sampling(sys, spec.target, deflated, opt);
    CHECK(bad.passes < bad.samples);
  }
  SUBCASE("nonzero input set is rejected") {
    const LinSys sys = scalar_system(-1.0, 0.1, 0.05);
    BackwardSpec spec;
    spec.target = HPolytope::box(Vector::Constant(1, -1.0), Vector::Constant(1, 1.0));
    spec.horizon = Horizon::time_point(1.0);
    spec.sigma = 10;
    const TimePointResult outer = ae_tp_outer(sys, spec);
    SamplingOptions opt;
    opt.num_samples = 10;
    CHECK_THROWS(ae_backward_sampling(sys, spec.target, outer, opt));
  }
}

TEST_CASE("constrained zonotope sampling") {
  std::mt19937_64 rng(65);
  const ConstrainedZonotope cz = to_constrained_zonotope(
      HPolytope::box((Vector(2) << -1.0, 0.0).finished(), (Vector(2) << 2.0, 0.5).finished()));
  const auto factors = sample_cz_factors(cz, 64, 777);
  CHECK(factors.size() == 64);
  for (const Vector& alpha : factors) {
    CHECK((alpha.array().abs() <= 1.0 + 1e-9).all());
    CHECK((cz.con_lhs * alpha - cz.con_rhs).lpNorm<Eigen::Infinity>() < 1e-7);
    const Vector x = cz.at(alpha);
    CHECK(x(0) >= -1.0 - 1e-7);
    CHECK(x(0) <= 2.0 + 1e-7);
    CHECK(x(1) >= -1e-7);
    CHECK(x(1) <= 0.5 + 1e-7);
  }
  CHECK_THROWS_AS(sample_cz_factors(ConstrainedZonotope::empty(2), 4, 1), EmptySetError);
  (void)rng;
}

TEST_CASE("signal sampling stays within the set") {
  std::mt19937_64 rng(66);
  const Zonotope w(Vector::Constant(2, 0.2), 0.5 * Matrix::Identity(2, 2));
  for (const bool vertex : {true, false}) {
    const PiecewiseConstantSignal sig = sample_signal(w, 0.1, 20, rng, vertex);
    CHECK(sig.values.size() == 20);
    for (const Vector& v : sig.values) {
      CHECK(std::abs(v(0) - 0.2) <= 0.5 + 1e-12);
      CHECK(std::abs(v(1) - 0.2) <= 0.5 + 1e-12);
    }
  }
}
