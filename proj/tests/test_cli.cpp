#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "reach/runner.hpp"
#include "reach/serialization.hpp"
#include "reach/systems.hpp"
#include "test_common.hpp"

using namespace reach;
using namespace reach::testing;

namespace {

Json scalar_config(const std::string& algorithm) {
  return Json{
      {"system",
       Json{{"A", Json::array({Json::array({-1.0})})},
            {"B", Json::array({Json::array({1.0})})},
            {"E", Json::array({Json::array({1.0})})},
            {"input", Json{{"lo", Json::array({-0.1})}, {"hi", Json::array({0.1})}}},
            {"disturbance", Json{{"lo", Json::array({-0.05})}, {"hi", Json::array({0.05})}}}}},
      {"target", Json{{"lo", Json::array({-1.0})}, {"hi", Json::array({1.0})}}},
      {"algorithm", algorithm},
      {"horizon", Json{{"t", 1.0}}},
      {"steps", 200},
      {"seed", 7}};
}

} // namespace

TEST_CASE("builtin pursuit-evasion reproduces the printed sets") {
  const BenchmarkCase bc = builtin_system("pursuit-evasion");
  CHECK(bc.sys.dim() == 4);
  const Interval u = bc.sys.U.bounding_box();
  CHECK(u.lo(0) == doctest::Approx(-0.5));
  CHECK(u.hi(0) == doctest::Approx(0.1));
  CHECK(u.lo(1) == doctest::Approx(-0.1));
  CHECK(u.hi(1) == doctest::Approx(0.5));
  const Interval w = bc.sys.W.bounding_box();
  CHECK(w.lo(0) == doctest::Approx(-0.1));
  CHECK(w.hi(0) == doctest::Approx(0.5));
  CHECK(bc.sys.A(0, 1) == 1.0);
  CHECK(bc.sys.E(1, 0) == -1.0);
  const Interval box = bounding_box(bc.spec.target);
  CHECK(box.hi(3) == doctest::Approx(0.5));
  CHECK(bc.spec.horizon.t_end == doctest::Approx(1.0));
}

TEST_CASE("builtin quadrotor-6d reproduces the printed model") {
  const double g = 9.81, k = 0.89 / 1.4;
  for (const auto& [zeta, phi] : std::vector<std::pair<double, double>>{
           {1.0, 10.0}, {1.0, 1.0}, {2.0, 1.0}}) {
    const BenchmarkCase bc = builtin_system("quadrotor-6d", {{"zeta", zeta}, {"phi", phi}});
    CHECK(bc.sys.dim() == 6);
    CHECK(bc.sys.A(2, 4) == doctest::Approx(g));
    CHECK(bc.sys.A(5, 4) == doctest::Approx(-70.0));
    CHECK(bc.sys.A(5, 5) == doctest::Approx(-17.0));
    CHECK(bc.sys.B(3, 0) == doctest::Approx(k));
    CHECK(bc.sys.B(5, 1) == doctest::Approx(55.0));
    CHECK(bc.sys.U.c(0) == doctest::Approx(g / k));
    CHECK(bc.sys.U.G(0, 0) == doctest::Approx(zeta * 1.5));
    CHECK(bc.sys.U.G(1, 1) == doctest::Approx(M_PI / 6.0));
    CHECK(bc.sys.W.G(0, 0) == doctest::Approx(0.2760 * phi));
    CHECK(bc.sys.W.G(1, 1) == doctest::Approx(0.3668));
    CHECK(bc.spec.target.num_constraints() == 15);
    CHECK(bc.spec.target.d(11) == doctest::Approx(M_PI / 15.0));
    CHECK(bc.spec.horizon.t_end == doctest::Approx(0.5));
  }
}

TEST_CASE("builtin quadrotor-12d assembles the terminal-set benchmark") {
  const BenchmarkCase bc = builtin_system("quadrotor-12d", {{"zeta", 0.5}, {"phi", 0.0}});
  CHECK(bc.sys.dim() == 12);
  CHECK(bc.sys.E(3, 0) == 1.0);
  CHECK(bc.sys.E(4, 1) == 1.0);
  CHECK(bc.sys.E(5, 2) == 1.0);
  CHECK(bc.sys.U.dim() == 4);
  const Interval u = bc.sys.U.bounding_box();
  CHECK(u.lo(0) == doctest::Approx(-9.81));
  CHECK(u.hi(0) == doctest::Approx(2.38));
  CHECK(bc.spec.target.num_constraints() == 24);
  CHECK_FALSE(is_empty(bc.spec.target));
  CHECK_NOTHROW(bounding_box(bc.spec.target));
  CHECK_FALSE(bc.provenance.empty());
}

TEST_CASE("builtin platoon scales with the truck count") {
  const BenchmarkCase bc = builtin_system("platoon", {{"theta", 5.0}}, "ae");
  CHECK(bc.sys.dim() == 15);
  CHECK(bc.sys.B.cols() == 5);
  CHECK(bc.sys.E.cols() == 1);
  const Interval u = bc.sys.U.bounding_box();
  CHECK(u.lo(0) == doctest::Approx(-5.0));
  CHECK(u.hi(0) == doctest::Approx(1.0));
  const Interval w = bc.sys.W.bounding_box();
  CHECK(w.hi(0) == doctest::Approx(0.5));
  CHECK(bc.spec.target.num_constraints() == 35);

  const BenchmarkCase ea = builtin_system("platoon", {{"theta", 2.0}}, "ea");
  CHECK(ea.spec.target.d(0) == doctest::Approx(20.0));
  CHECK_FALSE(is_empty(ea.spec.target));

  CHECK_THROWS(builtin_system("platoon", {{"theta", 0.0}}));
  CHECK_THROWS(builtin_system("no-such-benchmark"));
}

TEST_CASE("set serialization round-trips bit-identically") {
  std::mt19937_64 rng(71);
  const Zonotope z = random_zonotope(3, 4, rng);
  const Json jz = to_json(z);
  CHECK(to_json(zonotope_from_json(jz)).dump() == jz.dump());

  const HPolytope p = HPolytope::from_interval(random_interval(2, rng));
  const Json jp = to_json(p);
  CHECK(to_json(hpolytope_from_json(jp)).dump() == jp.dump());

  const ConstrainedZonotope cz = to_constrained_zonotope(p);
  const Json jc = to_json(cz);
  CHECK(to_json(conzono_from_json(jc)).dump() == jc.dump());

  const Interval iv = random_interval(4, rng);
  CHECK(to_json(interval_from_json(to_json(iv))).dump() == to_json(iv).dump());

  const IntervalMatrix im = IntervalMatrix::symmetric(Matrix::Ones(2, 2));
  CHECK(to_json(interval_matrix_from_json(to_json(im))).dump() == to_json(im).dump());

  const Ball b(0.25, 3);
  CHECK(to_json(ball_from_json(to_json(b))).dump() == to_json(b).dump());
}

TEST_CASE("config parsing validates the schema") {
  CHECK_THROWS(parse_run_config(Json{{"algorithm", "ae-tp-outer"}}));          // no system
  CHECK_THROWS(parse_run_config(Json{{"system", "pursuit-evasion"}}));         // no algorithm
  CHECK_THROWS(parse_run_config(
      Json{{"system", "pursuit-evasion"}, {"algorithm", "warp-drive"}}));      // bad name
  Json bad_inline = scalar_config("ae-tp-outer");
  bad_inline["system"].erase("disturbance");
  CHECK_THROWS(parse_run_config(bad_inline));
  Json no_horizon = scalar_config("ae-tp-outer");
  no_horizon.erase("horizon");
  CHECK_THROWS(parse_run_config(no_horizon));

  const RunConfig cfg = parse_run_config(scalar_config("ae-tp-outer"));
  CHECK(cfg.sigma.value() == 200);
  CHECK(cfg.seed == 7);
  CHECK(cfg.inline_sys.has_value());
}

TEST_CASE("projection of the unit box with four angles is the square") {
  const HPolytope box = HPolytope::box(Vector::Constant(2, -1.0), Vector::Constant(2, 1.0));
  const Polygon2D poly = project2d(box, 0, 1, 4);
  REQUIRE_FALSE(poly.empty);
  REQUIRE(poly.vertices.size() == 4);
  CHECK(polygon_area(poly) == doctest::Approx(4.0).epsilon(1e-9));
  for (const auto& v : poly.vertices) {
    CHECK(std::abs(std::abs(v[0]) - 1.0) < 1e-9);
    CHECK(std::abs(std::abs(v[1]) - 1.0) < 1e-9);
  }
}

TEST_CASE("projection converges on a rotated box") {
  const auto rotated_box = [](double angle) {
    Matrix r(2, 2);
    r << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
    return linear_map(r,
                      HPolytope::box(Vector::Constant(2, -1.0), Vector::Constant(2, 1.0)));
  };
  SUBCASE("45 degrees, sampled normals aligned") {
    const Polygon2D poly = project2d(rotated_box(M_PI / 4.0), 0, 1, 256);
    CHECK(polygon_area(poly) >= 4.0 - 1e-9);
    CHECK(polygon_area(poly) / 4.0 <= 1.01);
  }
  SUBCASE("30 degrees, normals between samples") {
    const HPolytope box = rotated_box(M_PI / 6.0);
    double prev = 1e100;
    for (int angles : {32, 128, 512, 2048}) {
      const double area = polygon_area(project2d(box, 0, 1, angles));
      CHECK(area >= 4.0 - 1e-9); // always an outer approximation
      CHECK(area <= prev + 1e-12);
      prev = area;
    }
    CHECK(prev / 4.0 <= 1.005);
  }
}

TEST_CASE("projection of an empty set is flagged") {
  const Polygon2D poly =
      project2d([](const Vector&) { return -std::numeric_limits<double>::infinity(); }, 0,
                1, 8, 2);
  CHECK(poly.empty);
  CHECK(poly.vertices.empty());
}

TEST_CASE("run dispatches every algorithm") {
  for (const std::string algo : {"ae-tp-outer", "ae-tp-inner", "ea-tp-outer",
                                 "ea-tp-inner", "ae-ti-outer", "ea-ti-inner"}) {
    Json j = scalar_config(algo);
    if (algo.find("-ti-") != std::string::npos) {
      j["horizon"] = Json{{"t0", 0.0}, {"t_end", 1.0}};
      j["steps"] = 50;
    }
    const RunReport report = run(parse_run_config(j));
    CHECK(report.json.at("result").at("kind").get<std::string>().size() > 0);
    CHECK_FALSE(report.empty_result);
  }
}

TEST_CASE("empty results are reported distinctly") {
  Json j = scalar_config("ae-tp-outer");
  j["system"]["input"] = Json{{"lo", Json::array({-5.0})}, {"hi", Json::array({5.0})}};
  const RunReport report = run(parse_run_config(j));
  CHECK(report.empty_result);
  CHECK(report.json.at("result").at("empty").get<bool>());
}

TEST_CASE("identical configs and seeds give identical reports modulo timings") {
  Json j = scalar_config("ea-tp-inner");
  j["validate"] = true;
  Json a = run(parse_run_config(j)).json;
  Json b = run(parse_run_config(j)).json;
  a.erase("timings");
  b.erase("timings");
  a["result"].erase("diagnostics");
  b["result"].erase("diagnostics");
  CHECK(a.dump() == b.dump());
}

TEST_CASE("validation attaches the scalar analytic verdict") {
  Json j = scalar_config("ae-tp-outer");
  j["validate"] = true;
  j["steps"] = 1000;
  const RunReport report = run(parse_run_config(j));
  const Json& oracle = report.json.at("oracle").at("analytic_1d");
  CHECK(oracle.at("max_abs_error").get<double>() < 1e-3);
}

TEST_CASE("run writes result files") {
  const std::filesystem::path dir = std::filesystem::temp_directory_path() / "reach_test_out";
  std::filesystem::remove_all(dir);
  Json j = scalar_config("ae-tp-outer");
  j["projections"] = Json::array({Json::array({0, 0})});
  // projecting a 1D set is rejected; use the builtin 4D benchmark instead
  j = Json{{"system", "pursuit-evasion"},
           {"algorithm", "ae-tp-outer"},
           {"horizon", Json{{"t", 1.0}}},
           {"steps", 20},
           {"projections", Json::array({Json::array({0, 1}), Json::array({2, 3})})},
           {"projection_angles", 64},
           {"output", dir.string()}};
  const RunReport report = run(parse_run_config(j));
  CHECK_FALSE(report.empty_result);
  CHECK(std::filesystem::exists(dir / "result.json"));
  CHECK(std::filesystem::exists(dir / "projection_0_1.csv"));
  CHECK(std::filesystem::exists(dir / "projection_2_3.csv"));
  std::ifstream in(dir / "result.json");
  Json parsed;
  in >> parsed;
  CHECK(parsed.at("schema_version").get<int>() == 1);
  std::filesystem::remove_all(dir);
}

TEST_CASE("in-process platoon bench rows and slope fit") {
  const BenchResult bench = bench_scaling("ae-tp-outer", {1, 2, 3}, 100.0, "", "");
  REQUIRE(bench.rows.size() == 3);
  CHECK(bench.rows[0].n == 3);
  CHECK(bench.rows[1].n == 6);
  for (const BenchRow& row : bench.rows) {
    CHECK((row.status == "ok" || row.status == "empty"));
    CHECK(row.seconds > 0.0);
  }
  CHECK(bench.csv.rfind("n,m,seconds,status\n", 0) == 0);
}
