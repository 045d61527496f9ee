#ifndef MOT_SIMPLEX_HPP
#define MOT_SIMPLEX_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <string_view>

namespace mot {

enum class LpStatus { optimal, infeasible, unbounded, iteration_limit };

std::string_view to_string(LpStatus s);

struct SimplexOptions {
  std::int64_t max_pivots = 1'000'000;
  /// Relative tolerance for pivots, reduced costs and feasibility.
  double tolerance = 1e-9;
  /// Consecutive degenerate pivots before switching to Bland's rule.
  int degenerate_streak = 25;
};

struct LpResult {
  LpStatus status = LpStatus::infeasible;
  Eigen::VectorXd x;
  /// Equality-row multipliers: A^T y <= c with y^T b = objective at optimum.
  Eigen::VectorXd y;
  double objective = 0.0;
  std::int64_t pivots = 0;
  /// Rows found linearly dependent on the others after phase one.
  Eigen::Index redundant_rows = 0;
};

/// min c^T x  s.t.  A x = b, x >= 0.
///
/// Dense two-phase tableau simplex with one artificial per row. Pricing is
/// Dantzig's rule; a run of degenerate pivots switches to Bland's rule until
/// the objective moves again. Rank-deficient A is fine: rows whose artificial
/// cannot be driven out after phase one are reported as redundant.
LpResult solve_lp(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, const Eigen::VectorXd& c,
                  const SimplexOptions& options = {});

}  // namespace mot

#endif  // MOT_SIMPLEX_HPP
