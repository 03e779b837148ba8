#ifndef REACH_LP_HPP_
#define REACH_LP_HPP_

#include <memory>

#include "reach/types.hpp"

namespace reach {

inline constexpr double kFeasTol = 1e-9;
inline constexpr double kOptTol = 1e-9;

enum class LPStatus { Optimal, Infeasible, Unbounded };

/// maximize objective'x  s.t.  ineq_lhs*x <= ineq_rhs,  eq_lhs*x == eq_rhs
///
/// Row counts of each lhs/rhs pair must match and both lhs column counts
/// must equal the objective length. Zero-row matrices are allowed (use
/// Matrix(0, n)).
struct LPProblem {
  Vector objective;
  Matrix ineq_lhs;
  Vector ineq_rhs;
  Matrix eq_lhs;
  Vector eq_rhs;

  static LPProblem maximize(const Vector& objective);
  int num_vars() const { return static_cast<int>(objective.size()); }
  void validate() const;
};

struct LPOutcome {
  LPStatus status = LPStatus::Infeasible;
  double value = 0.0;   // defined iff Optimal
  Vector point;         // defined iff Optimal
};

class LPSolver {
public:
  virtual ~LPSolver() = default;
  virtual LPOutcome solve(const LPProblem& p) const = 0;
};

/// Dense primal simplex with Bland's rule. Two phases, bounded-variable
/// pivoting; singleton inequality rows are absorbed into variable bounds
/// before the tableau is built. Deterministic for identical inputs.
class SimplexSolver final : public LPSolver {
public:
  LPOutcome solve(const LPProblem& p) const override;
};

/// Backend chosen by REACH_LP_BACKEND ("simplex"/"builtin"/empty select the
/// built-in solver; anything else throws).
const LPSolver& default_solver();

LPOutcome solve_lp(const LPProblem& p);

} // namespace reach

#endif // REACH_LP_HPP_
