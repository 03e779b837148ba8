#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "reach/runner.hpp"
#include "reach/serialization.hpp"

namespace {

std::vector<int> parse_sizes(const std::string& csv) {
  std::vector<int> out;
  size_t pos = 0;
  while (pos < csv.size()) {
    const size_t comma = csv.find(',', pos);
    const std::string tok = csv.substr(pos, comma == std::string::npos ? comma : comma - pos);
    out.push_back(std::stoi(tok));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

int cmd_run(const std::string& config_path, bool validate, std::optional<std::uint64_t> seed,
            const std::string& out_dir) {
  reach::RunConfig cfg = reach::load_run_config(config_path);
  if (validate) cfg.validate = true;
  if (seed) cfg.seed = *seed;
  if (!out_dir.empty()) cfg.out_dir = out_dir;
  const reach::RunReport report = reach::run(cfg);
  if (cfg.out_dir.empty())
    std::cout << report.json.dump(2) << "\n";
  else
    std::cout << "result written to " << cfg.out_dir << "/result.json\n";
  if (report.empty_result) {
    std::cerr << "result is empty\n";
    return 2;
  }
  return 0;
}

int cmd_bench(const std::string& algo, const std::string& sizes, double timeout,
              const std::string& out_dir, const char* argv0) {
  std::string exe;
  std::error_code ec;
  const auto self = std::filesystem::read_symlink("/proc/self/exe", ec);
  exe = ec ? argv0 : self.string();
  const reach::BenchResult bench =
      reach::bench_scaling(algo, parse_sizes(sizes), timeout, exe, out_dir);
  std::cout << bench.csv;
  std::cout << "log-log slope: " << bench.slope << "\n";
  return 0;
}

int cmd_project(const std::string& result_path, const std::string& dims_csv, int angles,
                const std::string& out_dir) {
  std::ifstream in(result_path);
  if (!in) throw std::runtime_error("cannot open " + result_path);
  reach::Json j;
  in >> j;
  const std::vector<int> dims = parse_sizes(dims_csv);
  if (dims.size() != 2) throw std::invalid_argument("--dims expects i,j");

  const reach::Json& result = j.at("result");
  std::string csv = "piece,x,y\n";
  reach::Json index = reach::Json::array();
  auto emit = [&](int piece, const reach::Json& set_json) {
    reach::Polygon2D poly;
    if (set_json.at("type") == "hpolytope")
      poly = reach::project2d(reach::hpolytope_from_json(set_json), dims[0], dims[1], angles);
    else
      poly = reach::project2d(reach::conzono_from_json(set_json), dims[0], dims[1], angles);
    for (const auto& v : poly.vertices)
      csv += std::to_string(piece) + "," + std::to_string(v[0]) + "," +
             std::to_string(v[1]) + "\n";
    index.push_back(reach::Json{
        {"piece", piece}, {"vertices", poly.vertices.size()}, {"empty", poly.empty}});
  };
  if (result.contains("set")) {
    emit(0, result.at("set"));
  } else if (result.contains("pieces")) {
    for (const auto& piece : result.at("pieces")) {
      if (piece.value("empty", true))
        index.push_back(reach::Json{
            {"piece", piece.at("k").get<int>()}, {"vertices", 0}, {"empty", true}});
      else
        emit(piece.at("k").get<int>(), piece.at("set"));
    }
  } else {
    throw std::runtime_error("result.json has no sets (empty result?)");
  }

  const std::string file =
      "projection_" + std::to_string(dims[0]) + "_" + std::to_string(dims[1]) + ".csv";
  const std::filesystem::path dir = out_dir.empty() ? "." : out_dir;
  std::filesystem::create_directories(dir);
  std::ofstream csv_out(dir / file);
  csv_out << csv;
  std::ofstream index_out(dir / (file + ".index.json"));
  index_out << index.dump(2) << "\n";
  std::cout << "wrote " << (dir / file).string() << "\n";
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"backward reachable set computation for perturbed LTI systems"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  bool validate = false;
  std::optional<std::uint64_t> seed;
  CLI::App* run_cmd = app.add_subcommand("run", "run one analysis from a JSON config");
  run_cmd->add_option("config", config_path, "config JSON path")->required();
  run_cmd->add_flag("--validate", validate, "attach oracle verdicts to the report");
  run_cmd->add_option("--seed", seed, "override the config seed");
  run_cmd->add_option("--out", out_dir, "output directory (result.json, CSVs)");

  std::string bench_target = "platoon", bench_algo = "ae-tp-outer", bench_sizes = "5,17,33";
  double bench_timeout = 100.0;
  std::string bench_out;
  CLI::App* bench_cmd = app.add_subcommand("bench", "scalability benchmark");
  bench_cmd->add_option("target", bench_target, "benchmark family (platoon)");
  bench_cmd->add_option("--algo", bench_algo, "algorithm to time");
  bench_cmd->add_option("--sizes", bench_sizes, "comma-separated truck counts");
  bench_cmd->add_option("--timeout", bench_timeout, "per-run timeout in seconds");
  bench_cmd->add_option("--out", bench_out, "output directory (bench.csv)");

  std::string project_result, project_dims = "0,1", project_out;
  int project_angles = 128;
  CLI::App* project_cmd = app.add_subcommand("project", "export 2D projections of a result");
  project_cmd->add_option("result", project_result, "result.json path")->required();
  project_cmd->add_option("--dims", project_dims, "dimension pair i,j");
  project_cmd->add_option("--angles", project_angles, "support directions per polygon");
  project_cmd->add_option("--out", project_out, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) return cmd_run(config_path, validate, seed, out_dir);
    if (bench_cmd->parsed()) {
      if (bench_target != "platoon")
        throw std::invalid_argument("unknown bench target: " + bench_target);
      return cmd_bench(bench_algo, bench_sizes, bench_timeout, bench_out, argv[0]);
    }
    if (project_cmd->parsed())
      return cmd_project(project_result, project_dims, project_angles, project_out);
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
  return 0;
}
