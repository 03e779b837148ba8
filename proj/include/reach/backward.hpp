#ifndef REACH_BACKWARD_HPP_
#define REACH_BACKWARD_HPP_

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "reach/conzono.hpp"
#include "reach/linflow.hpp"
#include "reach/polytope.hpp"
#include "reach/types.hpp"
#include "reach/zonotope.hpp"

namespace reach {

/// Perturbed LTI system x' = A x + B u + E w with u in U and w in W.
struct LinSys {
  Matrix A; // n x n
  Matrix B; // n x m
  Matrix E; // n x r
  Zonotope U;
  Zonotope W;

  LinSys() = default;
  LinSys(Matrix a, Matrix b, Matrix e, Zonotope u, Zonotope w);

  int dim() const { return static_cast<int>(A.rows()); }
  /// B U and E W mapped into the state space.
  Zonotope input_set() const { return linear_map(B, U); }
  Zonotope disturbance_set() const { return linear_map(E, W); }
};

/// Replaces W by the zero point set; all algorithms then compute the
/// unperturbed sets without code branching.
LinSys unperturbed_mode(const LinSys& sys);

struct Horizon {
  double t0 = 0.0;
  double t_end = 0.0;
  bool is_time_point = true;

  static Horizon time_point(double t);
  static Horizon time_interval(double t0, double t_end);
};

struct BackwardSpec {
  HPolytope target; // X_end, bounded and nonempty
  Horizon horizon;
  int sigma = 100;
  int eta = 0;              // 0 = automatic from the remainder tolerance
  double eta_tol = 1e-10;
  Matrix directions;        // extra support directions (columns), appended to [I -I]
  double max_order = 20.0;  // order cap for outer particular solutions
};

enum class SolutionKind { AEOuter, AEInner, EAOuter, EAInner };

struct StageLog {
  std::vector<std::pair<std::string, double>> entries;
  void add(std::string name, double value) { entries.emplace_back(std::move(name), value); }
};

/// Factor-column bookkeeping that decodes a sampled point of an EA inner
/// approximation into the certifying piecewise-constant input trajectory.
struct WitnessBlock {
  int col_start = 0;
  int cols = 0;
  double slot_t0 = 0.0;
  double slot_t1 = 0.0;
};

struct WitnessMap {
  Vector u_center;
  Matrix u_generators;
  std::vector<WitnessBlock> blocks;
  double tail_t0 = -1.0; // tail slot (time-interval pieces) holds the center input
  double tail_t1 = -1.0;

  /// Input value at time t for the given piece factor vector.
  Vector input_at(const Vector& factors, double t) const;
};

struct TimePointResult {
  SolutionKind kind = SolutionKind::AEOuter;
  double t = 0.0;
  std::optional<HPolytope> poly;          // AEOuter representation
  std::optional<ConstrainedZonotope> cz;  // all other kinds
  bool empty = false;
  std::string empty_stage;
  std::optional<WitnessMap> witness; // EAInner only
  StageLog log;
};

struct PieceResult {
  std::optional<ConstrainedZonotope> set; // nullopt encodes an empty piece
  std::string empty_stage;
  std::optional<WitnessMap> witness;
  bool empty() const { return !set.has_value(); }
};

/// Union over tau_k represented implicitly by the per-step pieces.
struct TimeIntervalResult {
  SolutionKind kind = SolutionKind::AEOuter;
  StepGrid grid;
  std::vector<PieceResult> pieces;
  StageLog log;
};

// Time-point solutions. Outer AE stays a polytope end to end; the other
// three pass through the constrained-zonotope conversion exactly once.
TimePointResult ae_tp_outer(const LinSys& sys, const BackwardSpec& spec);
TimePointResult ae_tp_inner(const LinSys& sys, const BackwardSpec& spec);
TimePointResult ea_tp_outer(const LinSys& sys, const BackwardSpec& spec);
TimePointResult ea_tp_inner(const LinSys& sys, const BackwardSpec& spec);

// Time-interval solutions.
TimeIntervalResult ae_ti_outer(const LinSys& sys, const BackwardSpec& spec);
TimeIntervalResult ea_ti_inner(const LinSys& sys, const BackwardSpec& spec);

/// [I -I] plus any user-supplied columns.
Matrix default_directions(int n, const Matrix& extra);

} // namespace reach

#endif // REACH_BACKWARD_HPP_
