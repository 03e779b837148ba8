#include "reach/runner.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <limits>

namespace reach {
namespace {

namespace fs = std::filesystem;
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kSchemaVersion = 1;

double wall_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

const std::vector<std::string> kAlgorithms = {"ae-tp-outer", "ae-tp-inner", "ae-ti-outer",
                                              "ea-tp-outer", "ea-tp-inner", "ea-ti-inner"};

bool is_time_point_algorithm(const std::string& algo) {
  return algo.find("-tp-") != std::string::npos;
}

Zonotope zonotope_from_config(const Json& j, const std::string& what) {
  if (j.contains("lo") && j.contains("hi")) {
    return Zonotope::from_interval(
        Interval(vector_from_json(j.at("lo")), vector_from_json(j.at("hi"))));
  }
  if (j.contains("center")) {
    Vector c = vector_from_json(j.at("center"));
    Matrix g = j.contains("generators") ? matrix_from_json(j.at("generators"))
                                        : Matrix(c.size(), 0);
    if (g.size() == 0) g = Matrix(c.size(), 0);
    return Zonotope(std::move(c), std::move(g));
  }
  throw std::invalid_argument("config: " + what +
                              " must give center/generators or lo/hi bounds");
}

HPolytope target_from_config(const Json& j) {
  if (j.contains("lo") && j.contains("hi"))
    return HPolytope::box(vector_from_json(j.at("lo")), vector_from_json(j.at("hi")));
  if (j.contains("con_lhs") && j.contains("con_rhs"))
    return HPolytope(matrix_from_json(j.at("con_lhs")), vector_from_json(j.at("con_rhs")));
  throw std::invalid_argument("config: target must give con_lhs/con_rhs or lo/hi");
}

Json verdict_to_json(const GameVerdict& v) {
  Json j{{"samples", v.samples},
         {"passes", v.passes},
         {"worst_violation", v.worst_violation},
         {"all_passed", v.all_passed()}};
  if (!v.stage_log.empty()) j["log"] = v.stage_log;
  return j;
}

struct DispatchOutcome {
  std::optional<TimePointResult> tp;
  std::optional<TimeIntervalResult> ti;
  double seconds = 0.0;
};

DispatchOutcome dispatch(const std::string& algo, const LinSys& sys,
                         const BackwardSpec& spec) {
  DispatchOutcome out;
  const double start = wall_seconds();
  if (algo == "ae-tp-outer") out.tp = ae_tp_outer(sys, spec);
  else if (algo == "ae-tp-inner") out.tp = ae_tp_inner(sys, spec);
  else if (algo == "ea-tp-outer") out.tp = ea_tp_outer(sys, spec);
  else if (algo == "ea-tp-inner") out.tp = ea_tp_inner(sys, spec);
  else if (algo == "ae-ti-outer") out.ti = ae_ti_outer(sys, spec);
  else if (algo == "ea-ti-inner") out.ti = ea_ti_inner(sys, spec);
  else throw std::invalid_argument("unknown algorithm: " + algo);
  out.seconds = wall_seconds() - start;
  return out;
}

SupportFn support_fn(const ConstrainedZonotope& cz) {
  return [cz](const Vector& l) { return cz.support(l); };
}

SupportFn support_fn(const HPolytope& p) {
  return [p](const Vector& l) { return support(p, l); };
}

// Sutherland-Hodgman clip of a convex polygon against u . y <= b.
std::vector<std::array<double, 2>> clip_polygon(
    const std::vector<std::array<double, 2>>& poly, double ux, double uy, double b) {
  std::vector<std::array<double, 2>> out;
  const size_t n = poly.size();
  for (size_t i = 0; i < n; ++i) {
    const auto& p = poly[i];
    const auto& q = poly[(i + 1) % n];
    const double dp = ux * p[0] + uy * p[1] - b;
    const double dq = ux * q[0] + uy * q[1] - b;
    if (dp <= 0.0) out.push_back(p);
    if ((dp < 0.0 && dq > 0.0) || (dp > 0.0 && dq < 0.0)) {
      const double s = dp / (dp - dq);
      out.push_back({p[0] + s * (q[0] - p[0]), p[1] + s * (q[1] - p[1])});
    }
  }
  return out;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

Json analytic_validation(const LinSys& sys, const BackwardSpec& spec,
                         const TimePointResult& res, SolutionKind kind) {
  const Zonotope bu = sys.input_set();
  const Zonotope ew = sys.disturbance_set();
  const Interval u_iv = bu.bounding_box();
  const Interval w_iv = ew.bounding_box();
  const Interval x_iv = bounding_box(spec.target);
  const auto exact =
      analytic_1d_brs(sys.A(0, 0), u_iv, w_iv, x_iv, res.t, kind);

  Json j;
  j["oracle"] = "analytic-1d";
  if (!exact) {
    j["exact_empty"] = true;
    j["computed_empty"] = res.empty;
    j["agrees"] = res.empty;
    return j;
  }
  Vector e1(1);
  e1 << 1.0;
  double hi = kInf, lo = -kInf;
  if (res.poly) {
    hi = support(*res.poly, e1);
    lo = -support(*res.poly, -e1);
  } else if (res.cz) {
    hi = res.cz->support(e1);
    lo = -res.cz->support(-e1);
  }
  j["exact"] = Json{{"lo", exact->lo(0)}, {"hi", exact->hi(0)}};
  j["computed"] = Json{{"lo", lo}, {"hi", hi}};
  j["max_abs_error"] =
      std::max(std::abs(lo - exact->lo(0)), std::abs(hi - exact->hi(0)));
  return j;
}

} // namespace

RunConfig parse_run_config(const Json& j) {
  RunConfig cfg;
  cfg.raw = j;
  if (j.contains("schema_version") && j.at("schema_version").get<int>() != kSchemaVersion)
    throw std::invalid_argument("config: unsupported schema_version");

  if (!j.contains("system")) throw std::invalid_argument("config: missing 'system'");
  if (j.at("system").is_string()) {
    cfg.system_name = j.at("system").get<std::string>();
  } else {
    const Json& s = j.at("system");
    for (const char* key : {"A", "B", "E", "input", "disturbance"})
      if (!s.contains(key))
        throw std::invalid_argument(std::string("config: inline system missing '") + key +
                                    "'");
    cfg.inline_sys = LinSys(matrix_from_json(s.at("A")), matrix_from_json(s.at("B")),
                            matrix_from_json(s.at("E")),
                            zonotope_from_config(s.at("input"), "input"),
                            zonotope_from_config(s.at("disturbance"), "disturbance"));
  }

  if (j.contains("params"))
    for (const auto& [key, value] : j.at("params").items())
      cfg.params[key] = value.get<double>();

  if (j.contains("target")) cfg.target = target_from_config(j.at("target"));
  if (cfg.inline_sys && !cfg.target)
    throw std::invalid_argument("config: inline system requires 'target'");

  if (!j.contains("algorithm")) throw std::invalid_argument("config: missing 'algorithm'");
  cfg.algorithm = j.at("algorithm").get<std::string>();
  if (std::find(kAlgorithms.begin(), kAlgorithms.end(), cfg.algorithm) == kAlgorithms.end())
    throw std::invalid_argument("config: unknown algorithm '" + cfg.algorithm + "'");

  if (j.contains("horizon")) {
    const Json& h = j.at("horizon");
    if (h.contains("t"))
      cfg.horizon = Horizon::time_point(h.at("t").get<double>());
    else if (h.contains("t_end"))
      cfg.horizon = Horizon::time_interval(h.value("t0", 0.0), h.at("t_end").get<double>());
    else
      throw std::invalid_argument("config: horizon needs 't' or 't0'/'t_end'");
  } else if (cfg.inline_sys) {
    throw std::invalid_argument("config: inline system requires 'horizon'");
  }

  if (j.contains("steps")) {
    cfg.sigma = j.at("steps").get<int>();
    if (*cfg.sigma < 1) throw std::invalid_argument("config: steps must be >= 1");
  }
  if (j.contains("truncation_order") && !j.at("truncation_order").is_string())
    cfg.eta = j.at("truncation_order").get<int>();
  if (j.contains("max_order")) cfg.max_order = j.at("max_order").get<double>();
  if (j.contains("directions")) {
    // Stored as an array of direction vectors; used as columns.
    const Matrix rows = matrix_from_json(j.at("directions"));
    cfg.directions = rows.transpose();
  }
  cfg.seed = j.value("seed", 0);
  cfg.validate = j.value("validate", false);
  if (j.contains("projections"))
    for (const auto& pair : j.at("projections")) {
      if (pair.size() != 2) throw std::invalid_argument("config: projection pairs are [i, j]");
      cfg.projections.push_back({pair.at(0).get<int>(), pair.at(1).get<int>()});
    }
  cfg.projection_angles = j.value("projection_angles", 128);
  cfg.out_dir = j.value("output", "");
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  Json j;
  in >> j;
  return parse_run_config(j);
}

Polygon2D project2d(const SupportFn& rho, int dim_i, int dim_j, int n_angles,
                    int ambient_dim) {
  require(dim_i >= 0 && dim_j >= 0 && dim_i < ambient_dim && dim_j < ambient_dim &&
              dim_i != dim_j,
          "project2d: bad dimension pair");
  if (n_angles < 3) throw std::invalid_argument("project2d: need at least 3 angles");

  std::vector<double> ux(n_angles), uy(n_angles), val(n_angles);
  double scale = 1.0;
  for (int l = 0; l < n_angles; ++l) {
    const double angle = 2.0 * M_PI * l / n_angles;
    ux[l] = std::cos(angle);
    uy[l] = std::sin(angle);
    Vector dir = Vector::Zero(ambient_dim);
    dir(dim_i) = ux[l];
    dir(dim_j) = uy[l];
    val[l] = rho(dir);
    if (val[l] == -kInf) return Polygon2D{{}, true};
    if (val[l] == kInf)
      throw UnboundedSetError("project2d: unbounded in a sampled direction");
    scale = std::max(scale, std::abs(val[l]));
  }

  const double r = 4.0 * scale + 1.0;
  std::vector<std::array<double, 2>> poly{{r, r}, {-r, r}, {-r, -r}, {r, -r}};
  for (int l = 0; l < n_angles && !poly.empty(); ++l)
    poly = clip_polygon(poly, ux[l], uy[l], val[l]);
  Polygon2D out;
  out.vertices = std::move(poly);
  out.empty = out.vertices.empty();
  return out;
}

Polygon2D project2d(const ConstrainedZonotope& set, int dim_i, int dim_j, int n_angles) {
  return project2d(support_fn(set), dim_i, dim_j, n_angles, set.dim());
}

Polygon2D project2d(const HPolytope& set, int dim_i, int dim_j, int n_angles) {
  return project2d(support_fn(set), dim_i, dim_j, n_angles, set.dim());
}

double polygon_area(const Polygon2D& poly) {
  const auto& v = poly.vertices;
  double twice = 0.0;
  for (size_t i = 0; i < v.size(); ++i) {
    const auto& p = v[i];
    const auto& q = v[(i + 1) % v.size()];
    twice += p[0] * q[1] - q[0] * p[1];
  }
  return 0.5 * std::abs(twice);
}

RunReport run(const RunConfig& cfg) {
  const double t_start = wall_seconds();
  LinSys sys;
  BackwardSpec spec;
  std::string provenance;

  if (!cfg.system_name.empty()) {
    const std::string variant = cfg.algorithm.rfind("ea", 0) == 0 ? "ea" : "ae";
    BenchmarkCase bc = builtin_system(cfg.system_name, cfg.params, variant);
    sys = std::move(bc.sys);
    spec = std::move(bc.spec);
    provenance = std::move(bc.provenance);
  } else {
    sys = *cfg.inline_sys;
  }
  if (cfg.target) spec.target = *cfg.target;
  if (cfg.horizon) spec.horizon = *cfg.horizon;
  if (cfg.sigma) spec.sigma = *cfg.sigma;
  if (cfg.eta) spec.eta = *cfg.eta;
  if (cfg.max_order) spec.max_order = *cfg.max_order;
  if (cfg.directions.size() > 0) spec.directions = cfg.directions;

  // Adapt the horizon form to the algorithm when the config did not pin it.
  if (is_time_point_algorithm(cfg.algorithm) && !spec.horizon.is_time_point)
    spec.horizon = Horizon::time_point(spec.horizon.t_end);
  if (!is_time_point_algorithm(cfg.algorithm) && spec.horizon.is_time_point)
    spec.horizon = Horizon::time_interval(0.0, spec.horizon.t_end);

  const DispatchOutcome outcome = dispatch(cfg.algorithm, sys, spec);

  RunReport report;
  Json& j = report.json;
  j["schema_version"] = kSchemaVersion;
  j["config"] = cfg.raw;
  if (!provenance.empty()) j["provenance"] = provenance;

  Json timings;
  timings["algorithm_seconds"] = outcome.seconds;
  const StageLog& log = outcome.tp ? outcome.tp->log : outcome.ti->log;
  for (const auto& [name, value] : log.entries)
    if (name.find("seconds") != std::string::npos) timings[name] = value;

  if (outcome.tp) {
    j["result"] = to_json(*outcome.tp);
    report.empty_result = outcome.tp->empty;
  } else {
    j["result"] = to_json(*outcome.ti);
    report.empty_result = true;
    for (const PieceResult& pr : outcome.ti->pieces)
      if (!pr.empty()) report.empty_result = false;
  }

  // Projections: one CSV per dimension pair, one polygon block per piece.
  Json projections = Json::array();
  std::vector<std::pair<std::string, std::string>> csv_files;
  for (const auto& dims : cfg.projections) {
    Json entry;
    entry["dims"] = Json::array({dims[0], dims[1]});
    const std::string file =
        "projection_" + std::to_string(dims[0]) + "_" + std::to_string(dims[1]) + ".csv";
    entry["file"] = file;
    std::string csv = "piece,x,y\n";
    Json polys = Json::array();
    auto add_polygon = [&](int piece, const Polygon2D& poly) {
      for (const auto& v : poly.vertices)
        csv += std::to_string(piece) + "," + std::to_string(v[0]) + "," +
               std::to_string(v[1]) + "\n";
      polys.push_back(Json{{"piece", piece},
                           {"vertices", poly.vertices.size()},
                           {"empty", poly.empty}});
    };
    if (outcome.tp && !outcome.tp->empty) {
      if (outcome.tp->poly)
        add_polygon(0, project2d(*outcome.tp->poly, dims[0], dims[1], cfg.projection_angles));
      else
        add_polygon(0, project2d(*outcome.tp->cz, dims[0], dims[1], cfg.projection_angles));
    } else if (outcome.tp) {
      polys.push_back(Json{{"piece", 0}, {"vertices", 0}, {"empty", true}});
    } else {
      for (size_t k = 0; k < outcome.ti->pieces.size(); ++k) {
        const PieceResult& pr = outcome.ti->pieces[k];
        if (pr.empty())
          polys.push_back(Json{{"piece", k}, {"vertices", 0}, {"empty", true}});
        else
          add_polygon(static_cast<int>(k),
                      project2d(*pr.set, dims[0], dims[1], cfg.projection_angles));
      }
    }
    entry["polygons"] = std::move(polys);
    projections.push_back(std::move(entry));
    csv_files.emplace_back(file, std::move(csv));
  }
  if (!projections.empty()) j["projections"] = projections;

  if (cfg.validate) {
    Json oracle = Json::object();
    if (sys.dim() == 1 && outcome.tp) {
      oracle["analytic_1d"] =
          analytic_validation(sys, spec, *outcome.tp, outcome.tp->kind);
    }
    if (outcome.tp && outcome.tp->kind == SolutionKind::EAInner && !outcome.tp->empty &&
        outcome.tp->witness) {
      ReplayOptions opt;
      opt.num_initial_states = 50;
      opt.num_disturbances = 20;
      opt.seed = cfg.seed;
      oracle["witness_replay"] = verdict_to_json(ea_witness_replay(
          sys, *outcome.tp->cz, *outcome.tp->witness, spec.target, outcome.tp->t,
          outcome.tp->t, opt));
    }
    if (outcome.ti && outcome.ti->kind == SolutionKind::EAInner) {
      Json piece_verdicts = Json::array();
      ReplayOptions opt;
      opt.num_initial_states = 20;
      opt.num_disturbances = 10;
      opt.seed = cfg.seed;
      for (size_t k = 0; k < outcome.ti->pieces.size(); k += 10) {
        const PieceResult& pr = outcome.ti->pieces[k];
        if (pr.empty() || !pr.witness) continue;
        Json v = verdict_to_json(ea_witness_replay(
            sys, *pr.set, *pr.witness, spec.target,
            outcome.ti->grid.point(static_cast<int>(k)),
            outcome.ti->grid.point(static_cast<int>(k) + 1), opt));
        v["piece"] = k;
        piece_verdicts.push_back(std::move(v));
      }
      oracle["witness_replay"] = std::move(piece_verdicts);
    }
    const Zonotope bu = sys.input_set();
    const bool u_zero = bu.c.lpNorm<Eigen::Infinity>() <= 1e-14 &&
                        (bu.num_generators() == 0 ||
                         bu.G.lpNorm<Eigen::Infinity>() <= 1e-14);
    if (u_zero && ((outcome.tp && outcome.tp->kind == SolutionKind::AEOuter &&
                    !outcome.tp->empty) ||
                   (outcome.ti && outcome.ti->kind == SolutionKind::AEOuter))) {
      SamplingOptions opt;
      opt.num_samples = 2000;
      opt.seed = cfg.seed;
      oracle["backward_sampling"] =
          outcome.tp ? verdict_to_json(ae_backward_sampling(sys, spec.target, *outcome.tp, opt))
                     : verdict_to_json(ae_backward_sampling(sys, spec.target, *outcome.ti, opt));
    }
    j["oracle"] = std::move(oracle);
  }

  timings["total_seconds"] = wall_seconds() - t_start;
  j["timings"] = std::move(timings);

  if (!cfg.out_dir.empty()) {
    fs::create_directories(cfg.out_dir);
    write_file(fs::path(cfg.out_dir) / "result.json", j.dump(2) + "\n");
    for (const auto& [file, csv] : csv_files)
      write_file(fs::path(cfg.out_dir) / file, csv);
  }
  return report;
}

namespace {

struct ChildRun {
  double seconds = 0.0;
  std::string status;
};

ChildRun run_child(const std::string& exe, const std::string& cfg_path,
                   const std::string& out_dir, double timeout_s) {
  const double start = wall_seconds();
  const pid_t pid = fork();
  if (pid < 0) throw std::runtime_error("bench: fork failed");
  if (pid == 0) {
    execl(exe.c_str(), exe.c_str(), "run", cfg_path.c_str(), "--out", out_dir.c_str(),
          static_cast<char*>(nullptr));
    _exit(127);
  }
  ChildRun out;
  while (true) {
    int status = 0;
    const pid_t done = waitpid(pid, &status, WNOHANG);
    if (done == pid) {
      out.seconds = wall_seconds() - start;
      const int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
      out.status = code == 0 ? "ok" : (code == 2 ? "empty" : "error");
      return out;
    }
    if (wall_seconds() - start > timeout_s) {
      kill(pid, SIGKILL);
      waitpid(pid, &status, 0);
      out.seconds = wall_seconds() - start;
      out.status = "timeout";
      return out;
    }
    usleep(10000);
  }
}

} // namespace

BenchResult bench_scaling(const std::string& algorithm, const std::vector<int>& thetas,
                          double timeout_s, const std::string& exe_path,
                          const std::string& out_dir) {
  BenchResult result;
  if (!out_dir.empty()) fs::create_directories(out_dir);

  for (const int theta : thetas) {
    BenchRow row;
    row.n = 3 * theta;
    row.m = theta;
    Json cfg_json{{"system", "platoon"},
                  {"params", Json{{"theta", theta}}},
                  {"algorithm", algorithm}};
    if (!exe_path.empty()) {
      const fs::path cfg_path =
          fs::path(out_dir.empty() ? "." : out_dir) / ("bench_" + std::to_string(theta) + ".json");
      write_file(cfg_path, cfg_json.dump(2) + "\n");
      const fs::path child_out =
          fs::path(out_dir.empty() ? "." : out_dir) / ("bench_" + std::to_string(theta));
      const ChildRun child = run_child(exe_path, cfg_path.string(), child_out.string(), timeout_s);
      row.seconds = child.seconds;
      row.status = child.status;
    } else {
      const double start = wall_seconds();
      try {
        RunConfig cfg = parse_run_config(cfg_json);
        const RunReport rep = run(cfg);
        row.status = rep.empty_result ? "empty" : "ok";
      } catch (const std::exception&) {
        row.status = "error";
      }
      row.seconds = wall_seconds() - start;
      if (row.seconds > timeout_s) row.status = "timeout";
    }
    result.rows.push_back(row);
  }

  // Log-log slope over completed rows.
  std::vector<std::array<double, 2>> pts;
  for (const BenchRow& row : result.rows)
    if ((row.status == "ok" || row.status == "empty") && row.seconds > 0.0)
      pts.push_back({std::log(double(row.n)), std::log(row.seconds)});
  if (pts.size() >= 2) {
    double mx = 0.0, my = 0.0;
    for (const auto& p : pts) {
      mx += p[0];
      my += p[1];
    }
    mx /= pts.size();
    my /= pts.size();
    double num = 0.0, den = 0.0;
    for (const auto& p : pts) {
      num += (p[0] - mx) * (p[1] - my);
      den += (p[0] - mx) * (p[0] - mx);
    }
    result.slope = den > 0.0 ? num / den : 0.0;
  }

  result.csv = "n,m,seconds,status\n";
  for (const BenchRow& row : result.rows)
    result.csv += std::to_string(row.n) + "," + std::to_string(row.m) + "," +
                  std::to_string(row.seconds) + "," + row.status + "\n";
  if (!out_dir.empty()) write_file(fs::path(out_dir) / "bench.csv", result.csv);
  return result;
}

} // namespace reach
