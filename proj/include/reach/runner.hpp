#ifndef REACH_RUNNER_HPP_
#define REACH_RUNNER_HPP_

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "reach/oracle.hpp"
#include "reach/serialization.hpp"
#include "reach/systems.hpp"

namespace reach {

/// Parsed and validated run configuration (schema version 1).
struct RunConfig {
  std::string system_name;                 // builtin name; empty for inline systems
  std::map<std::string, double> params;    // builtin parameters (zeta, phi, theta)
  std::optional<LinSys> inline_sys;
  std::optional<HPolytope> target;         // required for inline, override for builtin
  std::string algorithm;                   // ae-tp-outer | ae-tp-inner | ae-ti-outer |
                                           // ea-tp-outer | ea-tp-inner | ea-ti-inner
  std::optional<Horizon> horizon;
  std::optional<int> sigma;
  std::optional<int> eta;                  // absent = auto
  std::optional<double> max_order;
  Matrix directions;                       // extra support directions (columns)
  std::uint64_t seed = 0;
  bool validate = false;
  std::vector<std::array<int, 2>> projections;
  int projection_angles = 128;
  std::string out_dir;
  Json raw;                                // config echo for the report
};

RunConfig parse_run_config(const Json& j);
RunConfig load_run_config(const std::string& path);

struct RunReport {
  Json json;
  bool empty_result = false;
};

/// Dispatches to the requested algorithm, times the stages, serializes sets
/// and projections, and (on request) attaches oracle verdicts. Writes
/// result.json and projection CSVs when out_dir is set.
RunReport run(const RunConfig& cfg);

struct Polygon2D {
  std::vector<std::array<double, 2>> vertices; // closed polygon, ccw
  bool empty = false;
};

/// Support-function sampling of the (i, j) projection over n_angles uniform
/// directions; outer approximation of the true projection.
Polygon2D project2d(const SupportFn& rho, int dim_i, int dim_j, int n_angles,
                    int ambient_dim);
Polygon2D project2d(const ConstrainedZonotope& set, int dim_i, int dim_j, int n_angles);
Polygon2D project2d(const HPolytope& set, int dim_i, int dim_j, int n_angles);

double polygon_area(const Polygon2D& poly);

struct BenchRow {
  int n = 0;
  int m = 0;
  double seconds = 0.0;
  std::string status; // "ok", "empty", "timeout", "error"
};

struct BenchResult {
  std::vector<BenchRow> rows;
  double slope = 0.0; // fitted log-log slope over completed rows
  std::string csv;
};

/// Runs the platoon benchmark over the given truck counts with a per-run
/// timeout. When exe_path is set each run executes in a child process (so a
/// timeout kills it); otherwise runs happen in-process and the timeout only
/// labels overlong rows.
BenchResult bench_scaling(const std::string& algorithm, const std::vector<int>& thetas,
                          double timeout_s, const std::string& exe_path,
                          const std::string& out_dir);

} // namespace reach

#endif // REACH_RUNNER_HPP_
