#include "reach/lp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <string>
#include <vector>

namespace reach {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPivotTol = 1e-11;

enum class VarState { Basic, AtLower, AtUpper, Free };

// Bounded-variable two-phase primal simplex on
//   max c'x  s.t.  A x = b,  lo <= x <= up,
// with an explicit dense basis inverse updated per pivot. Bland's rule on
// both the entering and the leaving variable keeps the iteration finite and
// deterministic.
class Tableau {
public:
  // slack_col[i] >= 0 marks a +1-coefficient slack usable as start basis of
  // row i when its residual is nonnegative.
  Tableau(Matrix A, Vector b, Vector lo, Vector up, std::vector<int> slack_col)
      : A_(std::move(A)), b_(std::move(b)), lo_(std::move(lo)), up_(std::move(up)),
        slack_col_(std::move(slack_col)) {
    m_ = static_cast<int>(A_.rows());
    n_ = static_cast<int>(A_.cols());
    n_total_ = n_;
    art_start_ = n_;
  }

  // Returns false when infeasible.
  bool phase1() {
    state_.assign(n_, VarState::AtLower);
    xval_ = Vector::Zero(n_);
    for (int j = 0; j < n_; ++j) {
      if (std::isfinite(lo_(j))) {
        state_[j] = VarState::AtLower;
        xval_(j) = lo_(j);
      } else if (std::isfinite(up_(j))) {
        state_[j] = VarState::AtUpper;
        xval_(j) = up_(j);
      } else {
        state_[j] = VarState::Free;
        xval_(j) = 0.0;
      }
    }
    if (m_ == 0) return true;

    const Vector resid = b_ - A_ * xval_;
    std::vector<int> art_rows;
    basis_.assign(m_, -1);
    for (int i = 0; i < m_; ++i) {
      if (slack_col_[i] >= 0 && resid(i) >= 0.0) {
        basis_[i] = slack_col_[i];
      } else {
        art_rows.push_back(i);
      }
    }
    const int na = static_cast<int>(art_rows.size());
    Matrix Afull(m_, n_ + na);
    Afull.leftCols(n_) = A_;
    Afull.rightCols(na).setZero();
    lo_.conservativeResize(n_ + na);
    up_.conservativeResize(n_ + na);
    for (int a = 0; a < na; ++a) {
      const int i = art_rows[a];
      const double s = resid(i) >= 0.0 ? 1.0 : -1.0;
      Afull(i, n_ + a) = s;
      basis_[i] = n_ + a;
      lo_(n_ + a) = 0.0;
      up_(n_ + a) = kInf;
      state_.push_back(VarState::Basic);
    }
    A_ = std::move(Afull);
    n_total_ = n_ + na;
    xval_.conservativeResize(n_total_);
    xval_.tail(na).setZero();

    Binv_ = Matrix::Identity(m_, m_);
    xb_ = Vector(m_);
    for (int i = 0; i < m_; ++i) {
      if (basis_[i] >= art_start_) {
        Binv_(i, i) = A_(i, basis_[i]); // +-1
        xb_(i) = std::abs(resid(i));
      } else {
        state_[basis_[i]] = VarState::Basic;
        xb_(i) = resid(i); // slack started at lower bound 0
      }
    }

    if (na > 0) {
      Vector cost = Vector::Zero(n_total_);
      cost.tail(na).setConstant(-1.0);
      if (!iterate(cost, /*phase1=*/true))
        throw NumericalFailure("simplex: unbounded phase-1 subproblem");
      if (artificialResidual() > 1e-7 * std::max(1.0, b_.lpNorm<Eigen::Infinity>()))
        return false;
      driveOutArtificials();
    }
    return true;
  }

  // Returns false when unbounded.
  bool phase2(const Vector& c) {
    Vector cost = Vector::Zero(n_total_);
    cost.head(static_cast<Eigen::Index>(c.size())) = c;
    for (int j = art_start_; j < n_total_; ++j) {
      // Artificials may not re-enter.
      lo_(j) = 0.0;
      up_(j) = 0.0;
      if (state_[j] != VarState::Basic) {
        state_[j] = VarState::AtLower;
        xval_(j) = 0.0;
      }
    }
    return iterate(cost, /*phase1=*/false);
  }

  Vector solution(int num_orig) const {
    Vector x(num_orig);
    for (int j = 0; j < num_orig; ++j) x(j) = value(j);
    return x;
  }

  // Refactorizes once more and reports the worst row-relative residual.
  double polishedResidual() {
    if (m_ == 0) return 0.0;
    refactor();
    Vector x(n_total_);
    for (int j = 0; j < n_total_; ++j) x(j) = value(j);
    const Vector resid = A_ * x - b_;
    double worst = 0.0;
    for (int i = 0; i < m_; ++i) {
      const double scale = 1.0 + A_.row(i).cwiseAbs().dot(x.cwiseAbs()) + std::abs(b_(i));
      worst = std::max(worst, std::abs(resid(i)) / scale);
    }
    return worst;
  }

private:
  double value(int j) const {
    if (state_[j] == VarState::Basic) {
      for (int i = 0; i < m_; ++i)
        if (basis_[i] == j) return xb_(i);
    }
    return xval_(j);
  }

  double nonbasicValue(int j) const {
    switch (state_[j]) {
      case VarState::AtLower: return lo_(j);
      case VarState::AtUpper: return up_(j);
      default: return 0.0;
    }
  }

  double artificialResidual() const {
    double s = 0.0;
    for (int i = 0; i < m_; ++i)
      if (basis_[i] >= art_start_) s += std::abs(xb_(i));
    return s;
  }

  void driveOutArtificials() {
    for (int i = 0; i < m_; ++i) {
      if (basis_[i] < art_start_) continue;
      int enter = -1;
      Eigen::RowVectorXd row = Binv_.row(i) * A_.leftCols(art_start_);
      for (int j = 0; j < art_start_; ++j) {
        if (state_[j] == VarState::Basic || lo_(j) == up_(j)) continue;
        if (std::abs(row(j)) > 1e-9) { enter = j; break; }
      }
      if (enter < 0) {
        // Dependent row: pin its artificial at zero and keep it basic.
        lo_(basis_[i]) = 0.0;
        up_(basis_[i]) = 0.0;
        continue;
      }
      Vector w = Binv_ * A_.col(enter);
      pivot(i, enter, w, 0.0, +1);
    }
  }

  bool iterate(const Vector& cost, bool phase1) {
    const int iter_cap = 2000 + 200 * (n_total_ + m_);
    // Dantzig pricing by default; a run of degenerate pivots switches to
    // Bland's rule, whose anti-cycling guarantee keeps the iteration finite.
    int degenerate_run = 0;
    for (int iter = 0; iter < iter_cap; ++iter) {
      if (iter > 0 && iter % 128 == 0) refactor();
      const bool bland = degenerate_run > 40;

      Vector y;
      if (m_ > 0) {
        Vector cb(m_);
        for (int i = 0; i < m_; ++i) cb(i) = cost(basis_[i]);
        y = Binv_.transpose() * cb;
      }

      int enter = -1;
      int dir = 0;
      double best_score = kOptTol;
      for (int j = 0; j < n_total_; ++j) {
        if (state_[j] == VarState::Basic || lo_(j) == up_(j)) continue;
        const double d = cost(j) - (m_ > 0 ? y.dot(A_.col(j)) : 0.0);
        int cand_dir = 0;
        if ((state_[j] == VarState::AtLower || state_[j] == VarState::Free) && d > kOptTol)
          cand_dir = +1;
        else if ((state_[j] == VarState::AtUpper || state_[j] == VarState::Free) &&
                 d < -kOptTol)
          cand_dir = -1;
        if (cand_dir == 0) continue;
        if (bland) {
          enter = j;
          dir = cand_dir;
          break;
        }
        if (std::abs(d) > best_score) {
          best_score = std::abs(d);
          enter = j;
          dir = cand_dir;
        }
      }
      if (enter < 0) return true; // optimal for this phase

      const Vector w = m_ > 0 ? Vector(Binv_ * A_.col(enter)) : Vector(0);
      const double cur = nonbasicValue(enter);

      // Step to the entering variable's opposite bound (bound flip) ...
      double t_flip = kInf;
      if (dir > 0 && std::isfinite(up_(enter))) t_flip = up_(enter) - cur;
      if (dir < 0 && std::isfinite(lo_(enter))) t_flip = cur - lo_(enter);

      // ... or to the first basic variable hitting one of its bounds.
      double t_best = t_flip;
      int leave_row = -1;
      for (int i = 0; i < m_; ++i) {
        const double delta = -dir * w(i); // basic value moves by delta * t
        double t = kInf;
        if (delta > kPivotTol) {
          if (std::isfinite(up_(basis_[i]))) t = (up_(basis_[i]) - xb_(i)) / delta;
        } else if (delta < -kPivotTol) {
          if (std::isfinite(lo_(basis_[i]))) t = (xb_(i) - lo_(basis_[i])) / (-delta);
        }
        if (t == kInf) continue;
        if (t < 0.0) t = 0.0;
        const bool better = t < t_best - 1e-12;
        const bool tie = t <= t_best + 1e-12 && leave_row >= 0 && basis_[i] < basis_[leave_row];
        if (better || tie) {
          t_best = t;
          leave_row = i;
        }
      }

      if (!std::isfinite(t_best)) {
        if (phase1) throw NumericalFailure("simplex: unbounded phase-1 subproblem");
        return false;
      }
      degenerate_run = t_best <= 1e-12 ? degenerate_run + 1 : 0;

      if (leave_row < 0) {
        for (int i = 0; i < m_; ++i) xb_(i) -= dir * t_best * w(i);
        state_[enter] = dir > 0 ? VarState::AtUpper : VarState::AtLower;
        xval_(enter) = nonbasicValue(enter);
      } else {
        pivot(leave_row, enter, w, t_best, dir);
      }
    }
    throw NumericalFailure("simplex: iteration cap exceeded");
  }

  void pivot(int row, int enter, const Vector& w, double t, int dir) {
    const double piv = w(row);
    if (std::abs(piv) < kPivotTol) throw NumericalFailure("simplex: tiny pivot element");

    const double enter_val = nonbasicValue(enter) + dir * t;
    for (int i = 0; i < m_; ++i) xb_(i) -= dir * t * w(i);

    const int leaving = basis_[row];
    const double leave_val = xb_(row);
    // The leaving variable rests on whichever bound it reached; snap exactly.
    if (std::isfinite(lo_(leaving)) &&
        (!std::isfinite(up_(leaving)) ||
         std::abs(leave_val - lo_(leaving)) <= std::abs(leave_val - up_(leaving)))) {
      state_[leaving] = VarState::AtLower;
      xval_(leaving) = lo_(leaving);
    } else if (std::isfinite(up_(leaving))) {
      state_[leaving] = VarState::AtUpper;
      xval_(leaving) = up_(leaving);
    } else {
      state_[leaving] = VarState::Free;
      xval_(leaving) = leave_val;
    }

    basis_[row] = enter;
    state_[enter] = VarState::Basic;
    xb_(row) = enter_val;

    Eigen::RowVectorXd prow = Binv_.row(row) / piv;
    for (int i = 0; i < m_; ++i) {
      if (i == row) continue;
      const double f = w(i);
      if (f != 0.0) Binv_.row(i) -= f * prow;
    }
    Binv_.row(row) = prow;
  }

  void refactor() {
    if (m_ == 0) return;
    Matrix B(m_, m_);
    for (int i = 0; i < m_; ++i) B.col(i) = A_.col(basis_[i]);
    Eigen::FullPivLU<Matrix> lu(B);
    if (!lu.isInvertible()) return; // keep the product-form inverse
    Binv_ = lu.inverse();
    Vector rhs = b_;
    for (int j = 0; j < n_total_; ++j) {
      if (state_[j] == VarState::Basic) continue;
      const double v = nonbasicValue(j);
      if (v != 0.0) rhs -= A_.col(j) * v;
    }
    xb_ = Binv_ * rhs;
  }

  Matrix A_;
  Vector b_, lo_, up_;
  std::vector<int> slack_col_;
  Matrix Binv_;
  Vector xb_, xval_;
  std::vector<int> basis_;
  std::vector<VarState> state_;
  int m_ = 0, n_ = 0, n_total_ = 0, art_start_ = 0;
};

bool allFinite(const Matrix& m) { return m.size() == 0 || m.allFinite(); }
bool allFinite(const Vector& v) { return v.size() == 0 || v.allFinite(); }

} // namespace

LPProblem LPProblem::maximize(const Vector& objective) {
  LPProblem p;
  p.objective = objective;
  const auto n = objective.size();
  p.ineq_lhs = Matrix(0, n);
  p.ineq_rhs = Vector(0);
  p.eq_lhs = Matrix(0, n);
  p.eq_rhs = Vector(0);
  return p;
}

void LPProblem::validate() const {
  const auto n = objective.size();
  require(ineq_lhs.rows() == ineq_rhs.size(), "LPProblem: inequality row count mismatch");
  require(eq_lhs.rows() == eq_rhs.size(), "LPProblem: equality row count mismatch");
  require(ineq_lhs.rows() == 0 || ineq_lhs.cols() == n, "LPProblem: inequality column count");
  require(eq_lhs.rows() == 0 || eq_lhs.cols() == n, "LPProblem: equality column count");
  if (!allFinite(objective) || !allFinite(ineq_lhs) || !allFinite(ineq_rhs) ||
      !allFinite(eq_lhs) || !allFinite(eq_rhs))
    throw std::invalid_argument("LPProblem: non-finite coefficient");
}

LPOutcome SimplexSolver::solve(const LPProblem& p) const {
  p.validate();
  const int n = p.num_vars();

  const double rhs_scale =
      std::max({1.0,
                p.ineq_rhs.size() ? p.ineq_rhs.lpNorm<Eigen::Infinity>() : 0.0,
                p.eq_rhs.size() ? p.eq_rhs.lpNorm<Eigen::Infinity>() : 0.0});

  if (n == 0) {
    const bool ineq_ok = p.ineq_rhs.size() == 0 || (p.ineq_rhs.array() >= -kFeasTol).all();
    const bool eq_ok = p.eq_rhs.size() == 0 || p.eq_rhs.lpNorm<Eigen::Infinity>() <= kFeasTol;
    LPOutcome out;
    out.status = (ineq_ok && eq_ok) ? LPStatus::Optimal : LPStatus::Infeasible;
    out.value = 0.0;
    out.point = Vector(0);
    return out;
  }

  // Presolve: singleton inequality rows become variable bounds.
  Vector lo = Vector::Constant(n, -kInf);
  Vector up = Vector::Constant(n, kInf);
  std::vector<int> general_rows;
  for (int i = 0; i < p.ineq_lhs.rows(); ++i) {
    int nz = -1;
    bool singleton = true;
    for (int j = 0; j < n; ++j) {
      if (p.ineq_lhs(i, j) != 0.0) {
        if (nz >= 0) {
          singleton = false;
          break;
        }
        nz = j;
      }
    }
    if (singleton && nz < 0) {
      if (p.ineq_rhs(i) < -kFeasTol * rhs_scale)
        return LPOutcome{LPStatus::Infeasible, 0.0, Vector()};
      continue;
    }
    if (singleton) {
      const double a = p.ineq_lhs(i, nz);
      const double bound = p.ineq_rhs(i) / a;
      if (a > 0.0) up(nz) = std::min(up(nz), bound);
      else lo(nz) = std::max(lo(nz), bound);
    } else {
      general_rows.push_back(i);
    }
  }
  for (int j = 0; j < n; ++j) {
    if (lo(j) > up(j) + kFeasTol) return LPOutcome{LPStatus::Infeasible, 0.0, Vector()};
    if (lo(j) > up(j)) lo(j) = up(j) = 0.5 * (lo(j) + up(j));
  }

  const int mg = static_cast<int>(general_rows.size());
  const int me = static_cast<int>(p.eq_lhs.rows());
  const int m = mg + me;
  Matrix A = Matrix::Zero(m, n + mg);
  Vector b(m);
  std::vector<int> slack_col(m, -1);
  for (int i = 0; i < mg; ++i) {
    A.block(i, 0, 1, n) = p.ineq_lhs.row(general_rows[i]);
    A(i, n + i) = 1.0;
    slack_col[i] = n + i;
    b(i) = p.ineq_rhs(general_rows[i]);
  }
  for (int i = 0; i < me; ++i) {
    A.block(mg + i, 0, 1, n) = p.eq_lhs.row(i);
    b(mg + i) = p.eq_rhs(i);
  }
  Vector lo_all(n + mg), up_all(n + mg);
  lo_all.head(n) = lo;
  up_all.head(n) = up;
  lo_all.tail(mg).setZero();
  up_all.tail(mg).setConstant(kInf);

  Tableau tab(std::move(A), std::move(b), std::move(lo_all), std::move(up_all),
              std::move(slack_col));
  if (!tab.phase1()) return LPOutcome{LPStatus::Infeasible, 0.0, Vector()};

  if (!tab.phase2(p.objective)) return LPOutcome{LPStatus::Unbounded, 0.0, Vector()};

  if (tab.polishedResidual() > 1e-7)
    throw NumericalFailure("simplex: could not certify a feasible optimum");
  Vector x = tab.solution(n);

  LPOutcome out;
  out.status = LPStatus::Optimal;
  out.point = x;
  out.value = p.objective.dot(x);
  return out;
}

const LPSolver& default_solver() {
  static const SimplexSolver simplex;
  static const LPSolver* selected = [] {
    const char* env = std::getenv("REACH_LP_BACKEND");
    const std::string name = env ? env : "";
    if (name.empty() || name == "simplex" || name == "builtin")
      return static_cast<const LPSolver*>(&simplex);
    throw std::invalid_argument("REACH_LP_BACKEND=" + name +
                                " is not available (backends: simplex)");
  }();
  return *selected;
}

LPOutcome solve_lp(const LPProblem& p) { return default_solver().solve(p); }

} // namespace reach
