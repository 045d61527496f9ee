#include "mot/simplex.hpp"

#include "mot/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace mot {

std::string_view to_string(LpStatus s) {
  switch (s) {
    case LpStatus::optimal: return "optimal";
    case LpStatus::infeasible: return "infeasible";
    case LpStatus::unbounded: return "unbounded";
    case LpStatus::iteration_limit: return "iteration_limit";
  }
  return "unknown";
}

namespace {

constexpr double kPivotTolerance = 1e-9;

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class PhaseResult { optimal, unbounded, iteration_limit };

class Tableau {
 public:
  Tableau(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, const SimplexOptions& options)
      : m_(A.rows()), n_(A.cols()), options_(options) {
    // Row equilibration, then flip rows so the right-hand side is nonnegative.
    row_factor_.resize(m_);
    t_ = RowMatrix::Zero(m_ + 1, n_ + m_ + 1);
    for (Eigen::Index i = 0; i < m_; ++i) {
      const double norm = A.row(i).cwiseAbs().maxCoeff();
      double f = norm > 0.0 ? 1.0 / norm : 1.0;
      if (b(i) * f < 0.0) f = -f;
      row_factor_(i) = f;
      t_.row(i).head(n_) = f * A.row(i);
      t_(i, n_ + i) = 1.0;
      t_(i, rhs()) = f * b(i);
    }
    rhs_scale_ = std::max(1.0, t_.col(rhs()).cwiseAbs().sum());
    basis_.resize(static_cast<std::size_t>(m_));
    for (Eigen::Index i = 0; i < m_; ++i) basis_[static_cast<std::size_t>(i)] = n_ + i;
  }

  Eigen::Index rhs() const { return n_ + m_; }

  // Phase-one objective: sum of artificials.
  void load_phase_one() {
    t_.row(m_).setZero();
    for (Eigen::Index i = 0; i < m_; ++i) {
      t_.row(m_).head(n_) -= t_.row(i).head(n_);
      t_(m_, rhs()) -= t_(i, rhs());
    }
    cost_scale_ = 1.0;
    stop_at_zero_ = true;
  }

  void load_phase_two(const Eigen::VectorXd& c) {
    t_.row(m_).setZero();
    t_.row(m_).head(n_) = c.transpose();
    for (Eigen::Index i = 0; i < m_; ++i) {
      const Eigen::Index j = basis_[static_cast<std::size_t>(i)];
      const double cb = j < n_ ? c(j) : 0.0;
      if (cb != 0.0) t_.row(m_) -= cb * t_.row(i);
    }
    cost_scale_ = std::max(1.0, c.cwiseAbs().maxCoeff());
    stop_at_zero_ = false;
  }

  // Dantzig pricing until a run of pivots stops improving the objective,
  // then Bland's rule until the objective drops below its value at the
  // switch. A basis therefore never recurs.
  PhaseResult run(Eigen::Index allowed_columns) {
    int streak = 0;
    bool bland = false;
    double bland_start = 0.0;
    while (true) {
      const Eigen::Index e = entering(allowed_columns, bland);
      if (e < 0) return PhaseResult::optimal;
      if (pivots_ >= options_.max_pivots) return PhaseResult::iteration_limit;
      const Eigen::Index r = leaving(e, bland);
      if (r < 0) return PhaseResult::unbounded;
      const double before = objective();
      pivot(r, e);
      clean_rhs();
      if (stop_at_zero_ && objective() <= options_.tolerance * rhs_scale_) return PhaseResult::optimal;
      const double progress_tol = options_.tolerance * cost_scale_ * rhs_scale_;
      if (bland) {
        if (objective() < bland_start - progress_tol) {
          bland = false;
          streak = 0;
        }
      } else if (objective() < before - progress_tol) {
        streak = 0;
      } else if (++streak >= options_.degenerate_streak) {
        bland = true;
        bland_start = objective();
      }
    }
  }

  // Current value of the loaded objective.
  double objective() const { return -t_(m_, rhs()); }

  double phase_one_residual() const { return objective(); }
  double rhs_scale() const { return rhs_scale_; }

  // Pivots basic artificials out of the basis where possible; returns the
  // number of rows left with an artificial (linearly dependent rows).
  Eigen::Index drive_out_artificials() {
    Eigen::Index redundant = 0;
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (basis_[static_cast<std::size_t>(i)] < n_) continue;
      Eigen::Index best = -1;
      double best_abs = options_.tolerance;
      for (Eigen::Index j = 0; j < n_; ++j) {
        const double a = std::abs(t_(i, j));
        if (a > best_abs) {
          best_abs = a;
          best = j;
        }
      }
      if (best < 0) {
        // dependent row: zero it so later pivots leave it untouched
        t_.row(i).head(n_).setZero();
        t_(i, rhs()) = 0.0;
        ++redundant;
        continue;
      }
      t_(i, rhs()) = 0.0;
      pivot(i, best);
    }
    return redundant;
  }

  Eigen::VectorXd primal() const {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n_);
    for (Eigen::Index i = 0; i < m_; ++i) {
      const Eigen::Index j = basis_[static_cast<std::size_t>(i)];
      if (j < n_) x(j) = std::max(0.0, t_(i, rhs()));
    }
    return x;
  }

  // Multipliers of the original rows from the reduced costs of the
  // artificial columns (cost zero): d_{n+i} = -y'_i.
  Eigen::VectorXd duals() const {
    Eigen::VectorXd y(m_);
    for (Eigen::Index i = 0; i < m_; ++i) y(i) = -t_(m_, n_ + i) * row_factor_(i);
    return y;
  }

  std::int64_t pivots() const { return pivots_; }

 private:
  Eigen::Index entering(Eigen::Index allowed, bool bland) const {
    const double tol = options_.tolerance * cost_scale_;
    Eigen::Index best = -1;
    double best_value = -tol;
    for (Eigen::Index j = 0; j < allowed; ++j) {
      const double d = t_(m_, j);
      if (d < best_value) {
        if (bland) return j;
        best_value = d;
        best = j;
      }
    }
    return best;
  }

  // Harris two-pass ratio test: bound the step with a small feasibility
  // allowance, then take the largest pivot element within that bound. Under
  // Bland's rule the exact minimum ratio is kept, ties to the lowest basic index.
  Eigen::Index leaving(Eigen::Index e, bool bland) const {
    const double piv_tol = kPivotTolerance * std::max(1.0, t_.col(e).head(m_).cwiseAbs().maxCoeff());
    double bound = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < m_; ++i) {
      const double a = t_(i, e);
      if (a <= piv_tol) continue;
      const double slack = bland ? 0.0 : options_.tolerance;
      bound = std::min(bound, (std::max(0.0, t_(i, rhs())) + slack) / a);
    }
    if (!std::isfinite(bound)) return -1;
    Eigen::Index best = -1;
    for (Eigen::Index i = 0; i < m_; ++i) {
      const double a = t_(i, e);
      if (a <= piv_tol) continue;
      const double ratio = std::max(0.0, t_(i, rhs())) / a;
      if (ratio > bound * (1.0 + 1e-12) + 1e-15) continue;
      if (best < 0) {
        best = i;
      } else if (bland) {
        if (basis_[static_cast<std::size_t>(i)] < basis_[static_cast<std::size_t>(best)]) best = i;
      } else if (a > t_(best, e)) {
        best = i;
      }
    }
    return best;
  }

  // Entries that drift slightly negative are reset to zero.
  void clean_rhs() {
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (t_(i, rhs()) < 0.0 && t_(i, rhs()) > -options_.tolerance) t_(i, rhs()) = 0.0;
    }
  }

  void pivot(Eigen::Index r, Eigen::Index e) {
    t_.row(r) /= t_(r, e);
    const Eigen::RowVectorXd prow = t_.row(r);
    for (Eigen::Index i = 0; i <= m_; ++i) {
      if (i == r) continue;
      const double f = t_(i, e);
      if (f != 0.0) {
        t_.row(i) -= f * prow;
        t_(i, e) = 0.0;
      }
    }
    basis_[static_cast<std::size_t>(r)] = e;
    ++pivots_;
  }

  Eigen::Index m_;
  Eigen::Index n_;
  SimplexOptions options_;
  RowMatrix t_;
  Eigen::VectorXd row_factor_;
  std::vector<Eigen::Index> basis_;
  std::int64_t pivots_ = 0;
  double cost_scale_ = 1.0;
  double rhs_scale_ = 1.0;
  bool stop_at_zero_ = false;
};

}  // namespace

LpResult solve_lp(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, const Eigen::VectorXd& c,
                  const SimplexOptions& options) {
  if (A.rows() != b.size() || A.cols() != c.size()) {
    throw ShapeMismatch("linear program dimensions disagree");
  }
  LpResult result;
  Tableau tableau(A, b, options);

  tableau.load_phase_one();
  const PhaseResult one = tableau.run(A.cols());
  result.pivots = tableau.pivots();
  if (one == PhaseResult::iteration_limit) {
    result.status = LpStatus::iteration_limit;
    return result;
  }
  if (tableau.phase_one_residual() > options.tolerance * tableau.rhs_scale() * 10.0) {
    result.status = LpStatus::infeasible;
    return result;
  }
  result.redundant_rows = tableau.drive_out_artificials();

  tableau.load_phase_two(c);
  const PhaseResult two = tableau.run(A.cols());
  result.pivots = tableau.pivots();
  result.x = tableau.primal();
  result.y = tableau.duals();
  result.objective = c.dot(result.x);
  switch (two) {
    case PhaseResult::optimal: result.status = LpStatus::optimal; break;
    case PhaseResult::unbounded: result.status = LpStatus::unbounded; break;
    case PhaseResult::iteration_limit: result.status = LpStatus::iteration_limit; break;
  }
  return result;
}

}  // namespace mot
