#ifndef MOT_PRIMAL_HPP
#define MOT_PRIMAL_HPP

#include "mot/cost.hpp"
#include "mot/coupling.hpp"
#include "mot/measures.hpp"
#include "mot/simplex.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace mot {

/// Equality-form LP over path masses q >= 0:
///   rows [marginal_offset[i], marginal_offset[i] + |mu_i|)   sum_{x_i = a} q = mu_i(a)
///   rows [martingale_offset[i], ... + #prefixes of length i+1)
///        sum_{tails} q (x_{i+2} - x_{i+1}) = 0        (zero-based i < n-1)
struct LinearProgram {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  Eigen::VectorXd c;
  std::vector<Eigen::Index> marginal_offset;
  std::vector<Eigen::Index> martingale_offset;

  Eigen::Index rows() const { return A.rows(); }
  Eigen::Index cols() const { return A.cols(); }
};

struct PrimalOptions {
  /// Maximum number of LP variables (paths).
  Eigen::Index max_variables = 200'000;
  /// Maximum dense tableau entries; the dense solver's real memory bound.
  Eigen::Index max_tableau_entries = 60'000'000;
  SimplexOptions simplex;
};

LinearProgram assemble_lp(const Eigen::VectorXd& cost, const MarginalSequence& ms,
                          const PrimalOptions& options = {});
LinearProgram assemble_lp(const CostSpec& cost, const MarginalSequence& ms,
                          const PrimalOptions& options = {});

struct LpStats {
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  std::int64_t pivots = 0;
  Eigen::Index redundant_rows = 0;
};

struct PrimalSolution {
  double value = 0.0;
  Coupling coupling;
  LpStatus status = LpStatus::infeasible;
  /// Row multipliers of the minimization LP (for the max problem: of the
  /// negated-cost LP).
  Eigen::VectorXd duals;
  LpStats stats;
};

/// inf over martingale couplings of E_Q[c].
PrimalSolution solve_primal(const Eigen::VectorXd& cost, const MarginalSequence& ms,
                            const PrimalOptions& options = {});
PrimalSolution solve_primal(const CostSpec& cost, const MarginalSequence& ms,
                            const PrimalOptions& options = {});

/// sup over martingale couplings of E_Q[c] (solved as the inf of -c).
PrimalSolution solve_primal_max(const Eigen::VectorXd& cost, const MarginalSequence& ms,
                                const PrimalOptions& options = {});
PrimalSolution solve_primal_max(const CostSpec& cost, const MarginalSequence& ms,
                                const PrimalOptions& options = {});

inline constexpr Eigen::Index kBruteForceMaxPaths = 64;

/// Independent oracle: minimum of c over every vertex of the coupling
/// polytope, enumerated as the linearly independent column subsets on which
/// Aq = b has a strictly positive solution. Throws CapExceeded beyond 64
/// paths or `max_nodes` search nodes, and InvalidArgument when no feasible
/// vertex exists.
double brute_force_value(const Eigen::VectorXd& cost, const MarginalSequence& ms,
                         std::int64_t max_nodes = 20'000'000);

/// Semi-static strategy: u[i] on the atoms of mu_{i+1} for every marginal,
/// deltas[j] on the length-(j+1) prefix grid for j < n-1.
struct SemistaticStrategy {
  std::vector<Eigen::VectorXd> u;
  std::vector<Eigen::VectorXd> deltas;
};

/// Psi(x) = sum u_i(x_i) + sum_j Delta_j(x_1..x_j)(x_{j+1} - x_j) on every path.
Eigen::VectorXd semistatic_payoff(const SemistaticStrategy& s, const MarginalSequence& ms);

/// Checks Psi <= c (1e-9) on the whole grid and returns sum_i E_{mu_i}[u_i].
/// Throws InvalidArgument on a violation.
double semistatic_value_check(const Eigen::VectorXd& cost, const MarginalSequence& ms,
                              const SemistaticStrategy& s);

/// Reads (u_i, Delta_j) off the row multipliers of the minimization LP.
SemistaticStrategy semistatic_from_duals(const LinearProgram& lp, const Eigen::VectorXd& duals,
                                         const MarginalSequence& ms);

}  // namespace mot

#endif  // MOT_PRIMAL_HPP
