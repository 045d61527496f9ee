#include "mot/dual_optimizer.hpp"

#include "mot/errors.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <utility>

namespace mot {

std::string_view to_string(StepRule r) {
  switch (r) {
    case StepRule::diminishing: return "diminishing";
    case StepRule::adaptive_moment: return "adaptive_moment";
    case StepRule::polyak: return "polyak";
  }
  return "unknown";
}

std::string_view to_string(AscentStatus s) {
  switch (s) {
    case AscentStatus::converged_gap: return "converged_gap";
    case AscentStatus::converged_gradient: return "converged_gradient";
    case AscentStatus::iteration_limit: return "iteration_limit";
  }
  return "unknown";
}

void AscentConfig::validate() const {
  if (!(initial_step > 0.0)) throw InvalidArgument("initial_step must be positive");
  if (max_iters < 1) throw InvalidArgument("max_iters must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0)) {
    throw InvalidArgument("moment decay parameters must lie in [0, 1)");
  }
  if (!(epsilon > 0.0)) throw InvalidArgument("epsilon must be positive");
  if (!(target_gap >= 0.0)) throw InvalidArgument("target_gap must be nonnegative");
  if (patience < 1) throw InvalidArgument("patience must be positive");
  if (step_rule == StepRule::polyak && !primal_value) {
    throw InvalidArgument("the polyak step rule needs a primal value");
  }
}

double relative_gap(double primal, double dual) {
  return std::abs(primal - dual) / (1.0 + std::abs(primal));
}

namespace {

double gradient_norm(const std::vector<Eigen::VectorXd>& g) {
  double s = 0.0;
  for (const auto& gi : g) s += gi.squaredNorm();
  return std::sqrt(s);
}

// Maximizes sense * objective; sense = -1 turns the remark_a minimization
// into the same ascent loop.
AscentResult optimize(const Eigen::VectorXd& cost, const MarginalSequence& ms,
                      const AscentConfig& config, Variant variant) {
  config.validate();
  require_feasible(ms);
  const double sense = is_upper(variant) ? -1.0 : 1.0;
  const auto start = std::chrono::steady_clock::now();

  const double range = cost.size() > 0 ? cost.maxCoeff() - cost.minCoeff() : 0.0;
  const double unit = range > 0.0 ? range : 1.0;

  DualVariables u = DualVariables::zeros(ms);
  DualVariables best_u = u;
  double best = -std::numeric_limits<double>::infinity();

  std::vector<Eigen::VectorXd> first(u.u.size()), second(u.u.size());
  for (std::size_t k = 0; k < u.u.size(); ++k) {
    first[k] = Eigen::VectorXd::Zero(u.u[k].size());
    second[k] = Eigen::VectorXd::Zero(u.u[k].size());
  }

  double step = config.initial_step * unit;
  int since_best = 0;
  int moment_steps = 0;

  AscentResult result;
  result.trace.status = AscentStatus::iteration_limit;
  for (int iter = 0; iter < config.max_iters; ++iter) {
    DualEvaluation eval = evaluate_dual(variant, cost, ms, u);
    const double score = sense * eval.value;
    const double gnorm = gradient_norm(eval.gradient);

    if (score > best) {
      best = score;
      best_u = u;
      since_best = 0;
    } else if (++since_best >= config.patience) {
      // plateau: restart from the best point with a shorter step
      step *= 0.5;
      since_best = 0;
      u = best_u;
      moment_steps = 0;
      for (std::size_t k = 0; k < u.u.size(); ++k) {
        first[k].setZero();
        second[k].setZero();
      }
    }

    const double elapsed =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    result.trace.rows.push_back({iter, eval.value, sense * best, gnorm, elapsed});

    if (config.primal_value && relative_gap(*config.primal_value, sense * best) <= config.target_gap) {
      result.trace.status = AscentStatus::converged_gap;
      break;
    }
    if (gnorm < config.grad_tolerance) {
      result.trace.status = AscentStatus::converged_gradient;
      break;
    }
    if (config.step_rule == StepRule::polyak) {
      const double shortfall = sense * *config.primal_value - score;
      const double scale = gnorm > 0.0 ? std::max(0.0, shortfall) / (gnorm * gnorm) : 0.0;
      for (std::size_t k = 0; k < u.u.size(); ++k) {
        u.u[k].values += scale * sense * eval.gradient[k];
      }
    } else if (config.step_rule == StepRule::adaptive_moment) {
      ++moment_steps;
      const double c1 = 1.0 - std::pow(config.beta1, moment_steps);
      const double c2 = 1.0 - std::pow(config.beta2, moment_steps);
      for (std::size_t k = 0; k < u.u.size(); ++k) {
        const Eigen::VectorXd g = sense * eval.gradient[k];
        first[k] = config.beta1 * first[k] + (1.0 - config.beta1) * g;
        second[k] = config.beta2 * second[k] + (1.0 - config.beta2) * g.cwiseAbs2();
        u.u[k].values.array() += step * (first[k].array() / c1) /
                                 ((second[k].array() / c2).sqrt() + config.epsilon);
      }
    } else {
      const double scale = gnorm > 0.0 ? step / (gnorm * std::sqrt(iter + 1.0)) : 0.0;
      for (std::size_t k = 0; k < u.u.size(); ++k) {
        u.u[k].values += scale * sense * eval.gradient[k];
      }
    }
    project_zero_mean(u, ms);
  }

  result.certificate.variant = variant;
  result.certificate.dual_variables = std::move(best_u);
  result.certificate.dual_value = sense * best;
  if (config.primal_value) {
    result.certificate.gap_vs_primal = relative_gap(*config.primal_value, sense * best);
  }
  return result;
}

}  // namespace

AscentResult ascend(const Eigen::VectorXd& cost, const MarginalSequence& ms,
                    const AscentConfig& config) {
  if (is_upper(config.variant)) {
    throw InvalidArgument("ascend maximizes a lower-bound cascade; use descend_upper for remark_a");
  }
  return optimize(cost, ms, config, config.variant);
}

AscentResult ascend(const CostSpec& cost, const MarginalSequence& ms, const AscentConfig& config) {
  return ascend(cost.tabulate(ms), ms, config);
}

AscentResult descend_upper(const Eigen::VectorXd& cost, const MarginalSequence& ms,
                           const AscentConfig& config) {
  return optimize(cost, ms, config, Variant::remark_a);
}

AscentResult descend_upper(const CostSpec& cost, const MarginalSequence& ms,
                           const AscentConfig& config) {
  return descend_upper(cost.tabulate(ms), ms, config);
}

bool CertifyReport::gaps_closed() const {
  return proposition.gap <= target_gap && remark_b.gap <= target_gap && upper.gap <= target_gap;
}

bool CertifyReport::hedges_ok() const {
  return subhedge_optimized.ok && subhedge_zero.ok && subhedge_remark_b.ok && superhedge_upper.ok;
}

namespace {

CertifyRun summarize(std::string label, const AscentResult& r, double primal, bool upper) {
  CertifyRun run;
  run.label = std::move(label);
  run.value = r.certificate.dual_value;
  run.gap = relative_gap(primal, run.value);
  run.status = r.trace.status;
  run.iterations = static_cast<int>(r.trace.rows.size());
  constexpr double kWeakDualityTolerance = 1e-8;
  for (const auto& row : r.trace.rows) {
    const bool violated = upper ? row.dual_value < primal - kWeakDualityTolerance
                                : row.dual_value > primal + kWeakDualityTolerance;
    if (violated) run.weak_duality = false;
  }
  return run;
}

}  // namespace

CertifyReport certify(const Eigen::VectorXd& cost, const MarginalSequence& ms,
                      const AscentConfig& config, const PrimalOptions& lp_options) {
  CertifyReport report;
  report.target_gap = config.target_gap;
  report.sequence = validate_sequence(ms);
  if (!report.sequence.ok()) {
    try {
      require_feasible(ms);
    } catch (const InvalidArgument& e) {
      report.infeasibility = e.what();
    }
    return report;
  }

  const PrimalSolution lo = solve_primal(cost, ms, lp_options);
  const PrimalSolution hi = solve_primal_max(cost, ms, lp_options);
  report.lp_min = lo.stats;
  report.lp_max = hi.stats;
  if (lo.status != LpStatus::optimal || hi.status != LpStatus::optimal) {
    report.infeasibility = "primal LP status: " + std::string(to_string(lo.status)) + " / " +
                           std::string(to_string(hi.status));
    return report;
  }
  report.feasible = true;
  report.primal_min = lo.value;
  report.primal_max = hi.value;
  report.min_coupling = lo.coupling;
  report.max_coupling = hi.coupling;

  AscentConfig lower = config;
  lower.primal_value = lo.value;
  lower.variant = Variant::proposition;
  const AscentResult prop = ascend(cost, ms, lower);
  lower.variant = Variant::remark_b;
  const AscentResult tilde = ascend(cost, ms, lower);
  AscentConfig upper = config;
  upper.primal_value = hi.value;
  const AscentResult up = descend_upper(cost, ms, upper);

  report.proposition = summarize("proposition", prop, lo.value, false);
  report.remark_b = summarize("remark_b", tilde, lo.value, false);
  report.upper = summarize("remark_a", up, hi.value, true);
  report.proposition_certificate = prop.certificate;
  report.remark_b_certificate = tilde.certificate;
  report.upper_certificate = up.certificate;

  report.subhedge_optimized =
      verify_subhedge(cost, ms, prop.certificate.dual_variables, lo.coupling, Variant::proposition);
  report.subhedge_zero =
      verify_subhedge(cost, ms, DualVariables::zeros(ms), lo.coupling, Variant::proposition);
  report.subhedge_remark_b =
      verify_subhedge(cost, ms, tilde.certificate.dual_variables, lo.coupling, Variant::remark_b);
  report.superhedge_upper =
      verify_subhedge(cost, ms, up.certificate.dual_variables, hi.coupling, Variant::remark_a);
  return report;
}

CertifyReport certify(const CostSpec& cost, const MarginalSequence& ms,
                      const AscentConfig& config, const PrimalOptions& lp_options) {
  return certify(cost.tabulate(ms), ms, config, lp_options);
}

}  // namespace mot
