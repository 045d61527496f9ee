#ifndef MOT_CASCADE_HPP
#define MOT_CASCADE_HPP

#include "mot/cost.hpp"
#include "mot/coupling.hpp"
#include "mot/envelope.hpp"
#include "mot/measures.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string_view>
#include <vector>

namespace mot {

/// Which inductive cascade builds c_1 from the cost.
///
/// proposition: c_n = c - sum u_i, then convex envelopes in the last coordinate.
/// remark_a:    same c_n, concave envelopes; dual of the sup problem.
/// remark_b:    c_n = c, each step subtracts u_{i+1} from the section before
///              taking the convex envelope.
enum class Variant { proposition, remark_a, remark_b };

std::string_view to_string(Variant v);
std::optional<Variant> variant_from_string(std::string_view name);

/// The remark_a objective bounds the sup problem from above and is minimized.
constexpr bool is_upper(Variant v) { return v == Variant::remark_a; }

/// u_2, ..., u_n tabulated on the atoms of their marginals: u[k] belongs to
/// mu_{k+2}.
struct DualVariables {
  std::vector<GridFunction<double>> u;

  static DualVariables zeros(const MarginalSequence& ms);

  /// Throws ShapeMismatch unless each grid equals the matching atoms exactly.
  void check(const MarginalSequence& ms) const;
};

/// Envelope support of one section: the envelope at x_i equals
/// lambda * s(left) + (1 - lambda) * s(right), indices into atoms of mu_{i+1}.
struct SectionSupport {
  Eigen::Index left = 0;
  Eigen::Index right = 0;
  double lambda = 1.0;
};

struct CascadeTensors {
  Variant variant = Variant::proposition;
  /// levels[i - 1] tabulates c_i on supp mu_1 x ... x supp mu_i.
  std::vector<Eigen::VectorXd> levels;
  /// supports[i - 1][p] is the envelope support used for level-i prefix p.
  std::vector<std::vector<SectionSupport>> supports;

  const Eigen::VectorXd& level(std::size_t i) const { return levels[i - 1]; }
};

/// c_n(x) = c(x) - sum_{i>=2} u_i(x_i) on every path.
Eigen::VectorXd build_cn(const Eigen::VectorXd& cost, const MarginalSequence& ms,
                         const DualVariables& u);

/// Levels n-1, ..., 1 by envelopes of last-coordinate sections evaluated at
/// the previous coordinate. `variant` is proposition or remark_a.
CascadeTensors cascade_down(Eigen::VectorXd cn, const MarginalSequence& ms, Variant variant);

/// The remark_b cascade: T_n = c, u_{i+1} subtracted inside each envelope.
CascadeTensors cascade_down_tilde(const Eigen::VectorXd& cost, const MarginalSequence& ms,
                                  const DualVariables& u);

/// Dispatches on the variant.
CascadeTensors run_cascade(Variant variant, const Eigen::VectorXd& cost,
                           const MarginalSequence& ms, const DualVariables& u);

struct DualEvaluation {
  double value = 0.0;
  /// gradient[k] is d(value)/d u_{k+2} on the atoms of mu_{k+2}.
  std::vector<Eigen::VectorXd> gradient;
};

/// E_{mu_1}[c_1(S_1)] + sum_{i>=2} E_{mu_i}[u_i(S_i)] for the chosen cascade.
double dual_objective(Variant variant, const Eigen::VectorXd& cost, const MarginalSequence& ms,
                      const DualVariables& u);
double dual_objective(Variant variant, const CostSpec& cost, const MarginalSequence& ms,
                      const DualVariables& u);

/// A supergradient (remark_a: subgradient) of the dual objective in the u
/// tables, by pushing mu_1 mass down the envelope supports:
/// g_k(a) = mu_k(a) - (mass reaching level-k nodes whose last atom is a).
std::vector<Eigen::VectorXd> dual_subgradient(Variant variant, const Eigen::VectorXd& cost,
                                              const MarginalSequence& ms,
                                              const DualVariables& u);
std::vector<Eigen::VectorXd> dual_subgradient(Variant variant, const CostSpec& cost,
                                              const MarginalSequence& ms,
                                              const DualVariables& u);

/// Value and supergradient from a single cascade pass.
DualEvaluation evaluate_dual(Variant variant, const Eigen::VectorXd& cost,
                             const MarginalSequence& ms, const DualVariables& u);

struct SubhedgeEntry {
  double atom = 0.0;
  double mass = 0.0;
  /// E_Q[c_1(S_1) + sum u_i(S_i) | S_1 = atom]
  double hedge = 0.0;
  /// E_Q[c(S) | S_1 = atom]
  double payoff = 0.0;
  /// payoff - hedge for the lower variants, hedge - payoff for remark_a.
  double slack = 0.0;
};

struct SubhedgeReport {
  std::vector<SubhedgeEntry> entries;
  double min_slack = 0.0;
  bool ok = true;
};

inline constexpr double kSubhedgeTolerance = 1e-9;

/// Conditional (on S_1) sub-hedging check of the cascade strategy under Q.
/// For remark_a the strategy super-hedges and the inequality is reversed.
/// Throws InvalidArgument when Q is not a martingale coupling of ms.
SubhedgeReport verify_subhedge(const Eigen::VectorXd& cost, const MarginalSequence& ms,
                               const DualVariables& u, const Coupling& q,
                               Variant variant = Variant::proposition);

struct DualCertificate {
  Variant variant = Variant::proposition;
  DualVariables dual_variables;
  double dual_value = 0.0;
  std::optional<double> gap_vs_primal;
};

/// Shifts each u_i by its mu_i-mean so that E_{mu_i}[u_i] = 0.
void project_zero_mean(DualVariables& u, const MarginalSequence& ms);

}  // namespace mot

#endif  // MOT_CASCADE_HPP
