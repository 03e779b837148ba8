#ifndef REACH_SYSTEMS_HPP_
#define REACH_SYSTEMS_HPP_

#include <map>
#include <string>

#include "reach/backward.hpp"

namespace reach {

/// A named benchmark: system, default analysis spec, and a provenance note
/// for matrices sourced from bundled data files.
struct BenchmarkCase {
  LinSys sys;
  BackwardSpec spec;
  std::string provenance;
};

/// Builtin benchmarks:
///  - "pursuit-evasion": 4D double-integrator game, tau = [0, 1]
///  - "quadrotor-6d":    longitudinal quadrotor model (params zeta, phi),
///                       tau = [0, 0.5]
///  - "quadrotor-12d":   hover-linearized quadrotor, terminal-set target
///                       (params zeta, phi), tau = [0, 1]; A, B from data file
///  - "platoon":         truck platoon (params theta >= 1, target_variant
///                       "ae"/"ea"), t = 2; dynamics template from data file
BenchmarkCase builtin_system(const std::string& name,
                             const std::map<std::string, double>& params = {},
                             const std::string& target_variant = "");

/// Directory containing the bundled benchmark data files: REACH_DATA_DIR,
/// ./data, or the source-tree default, first hit wins.
std::string data_directory();

} // namespace reach

#endif // REACH_SYSTEMS_HPP_
