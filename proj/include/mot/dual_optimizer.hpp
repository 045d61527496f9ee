#ifndef MOT_DUAL_OPTIMIZER_HPP
#define MOT_DUAL_OPTIMIZER_HPP

#include "mot/cascade.hpp"
#include "mot/cost.hpp"
#include "mot/measures.hpp"
#include "mot/primal.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mot {

/// diminishing: step / (|g| sqrt(k+1)); adaptive_moment: bias-corrected
/// first/second moment scaling; polyak: (target - value) / |g|^2 against the
/// known primal value.
enum class StepRule { diminishing, adaptive_moment, polyak };

std::string_view to_string(StepRule r);

struct AscentConfig {
  Variant variant = Variant::proposition;
  int max_iters = 5000;
  /// Step length in units of the cost range (max c - min c over the grid).
  double initial_step = 0.05;
  StepRule step_rule = StepRule::adaptive_moment;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  /// Stop once |primal - dual| / (1 + |primal|) falls below this.
  double target_gap = 1e-4;
  /// Stopping threshold on the supergradient norm when no primal is known.
  double grad_tolerance = 1e-7;
  /// Iterations without a new best value before the step is halved.
  int patience = 100;
  std::uint64_t seed = 0;
  /// Primal value to close the gap against; enables gap-based stopping.
  std::optional<double> primal_value;

  void validate() const;
};

enum class AscentStatus { converged_gap, converged_gradient, iteration_limit };

std::string_view to_string(AscentStatus s);

struct TraceRow {
  int iter = 0;
  double dual_value = 0.0;
  double best_value = 0.0;
  double grad_norm = 0.0;
  double elapsed_ms = 0.0;
};

struct AscentTrace {
  std::vector<TraceRow> rows;
  AscentStatus status = AscentStatus::iteration_limit;
};

struct AscentResult {
  DualCertificate certificate;
  AscentTrace trace;
};

/// |primal - dual| / (1 + |primal|).
double relative_gap(double primal, double dual);

/// Supergradient ascent of the lower dual (proposition or remark_b) from
/// u = 0, with zero-mean projection of every u_i after each step. Returns
/// the best certificate seen.
AscentResult ascend(const Eigen::VectorXd& cost, const MarginalSequence& ms,
                    const AscentConfig& config);
AscentResult ascend(const CostSpec& cost, const MarginalSequence& ms, const AscentConfig& config);

/// Subgradient descent of the remark_a objective; bounds the sup problem
/// from above. config.variant is ignored.
AscentResult descend_upper(const Eigen::VectorXd& cost, const MarginalSequence& ms,
                           const AscentConfig& config);
AscentResult descend_upper(const CostSpec& cost, const MarginalSequence& ms,
                           const AscentConfig& config);

struct CertifyRun {
  std::string label;
  double value = 0.0;
  double gap = 0.0;
  AscentStatus status = AscentStatus::iteration_limit;
  int iterations = 0;
  /// Weak duality held at every iterate of the run.
  bool weak_duality = true;
};

struct CertifyReport {
  bool feasible = false;
  std::string infeasibility;
  SequenceReport sequence;

  double primal_min = 0.0;
  double primal_max = 0.0;
  LpStats lp_min;
  LpStats lp_max;

  CertifyRun proposition;
  CertifyRun remark_b;
  CertifyRun upper;

  /// Optimized-u sub-hedge checks under the minimizing coupling, plus the
  /// u = 0 check.
  SubhedgeReport subhedge_optimized;
  SubhedgeReport subhedge_zero;
  SubhedgeReport subhedge_remark_b;
  /// Super-hedge check of the remark_a certificate under the maximizing coupling.
  SubhedgeReport superhedge_upper;

  double target_gap = 0.0;

  /// Certificates kept for export.
  std::optional<DualCertificate> proposition_certificate;
  std::optional<DualCertificate> remark_b_certificate;
  std::optional<DualCertificate> upper_certificate;
  std::optional<Coupling> min_coupling;
  std::optional<Coupling> max_coupling;

  bool gaps_closed() const;
  bool hedges_ok() const;
  bool pass() const { return feasible && gaps_closed() && hedges_ok(); }
};

/// Both primal LPs, both lower ascents, the upper descent and the hedge
/// checks, with gaps judged against config.target_gap.
CertifyReport certify(const Eigen::VectorXd& cost, const MarginalSequence& ms,
                      const AscentConfig& config, const PrimalOptions& lp_options = {});
CertifyReport certify(const CostSpec& cost, const MarginalSequence& ms,
                      const AscentConfig& config, const PrimalOptions& lp_options = {});

}  // namespace mot

#endif  // MOT_DUAL_OPTIMIZER_HPP
