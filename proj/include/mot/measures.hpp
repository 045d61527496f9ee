#ifndef MOT_MEASURES_HPP
#define MOT_MEASURES_HPP

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <vector>

namespace mot {

/// Finitely supported probability measure on the real line.
///
/// Construction canonicalizes the input: atoms are sorted, duplicate atoms
/// are merged (weights summed) and zero-weight atoms are dropped, so the
/// stored atoms are strictly increasing and every weight is positive.
class DiscreteMeasure {
 public:
  /// Absolute tolerance on the total mass.
  static constexpr double kMassTolerance = 1e-12;

  DiscreteMeasure(std::vector<double> atoms, std::vector<double> weights);

  static DiscreteMeasure dirac(double x);

  const Eigen::VectorXd& atoms() const { return atoms_; }
  const Eigen::VectorXd& weights() const { return weights_; }
  Eigen::Index size() const { return atoms_.size(); }

  double mean() const { return atoms_.dot(weights_); }
  double min_atom() const { return atoms_(0); }
  double max_atom() const { return atoms_(atoms_.size() - 1); }

 private:
  Eigen::VectorXd atoms_;
  Eigen::VectorXd weights_;
};

/// U(k) = sum_j w_j |x_j - k|.
double potential(const DiscreteMeasure& mu, double k);

enum class OrderFailure { none, mean_mismatch, potential_violation };

struct ConvexOrderResult {
  bool ordered = false;
  OrderFailure failure = OrderFailure::none;
  /// Mean of nu minus mean of mu.
  double mean_gap = 0.0;
  /// Strike of the largest potential violation, set for potential_violation.
  std::optional<double> witness_k;
  /// potential(mu, k) - potential(nu, k) at the witness.
  double excess = 0.0;
};

inline constexpr double kMeanTolerance = 1e-9;
inline constexpr double kPotentialSlack = 1e-12;

/// Decides mu <=_c nu through equal means and potential dominance at every
/// atom of either measure (the potential difference is piecewise linear
/// with kinks only there).
ConvexOrderResult convex_order_check(const DiscreteMeasure& mu,
                                     const DiscreteMeasure& nu);

/// Equal-probability conditional-mean quantization of Lognormal(location, scale)
/// into m atoms of weight 1/m. Preserves the mean exp(location + scale^2/2).
DiscreteMeasure quantize_lognormal(double location, double scale, int m);

/// Ordered marginals mu_1, ..., mu_n with n >= 2. Construction only checks
/// the count; feasibility is the job of validate_sequence.
class MarginalSequence {
 public:
  explicit MarginalSequence(std::vector<DiscreteMeasure> marginals);

  std::size_t size() const { return marginals_.size(); }
  const DiscreteMeasure& operator[](std::size_t i) const { return marginals_[i]; }
  const std::vector<DiscreteMeasure>& marginals() const { return marginals_; }

  auto begin() const { return marginals_.begin(); }
  auto end() const { return marginals_.end(); }

  /// Atom counts per marginal.
  std::vector<Eigen::Index> shape() const;

 private:
  std::vector<DiscreteMeasure> marginals_;
};

struct PairStatus {
  /// Zero-based index of the first marginal of the pair.
  std::size_t first = 0;
  ConvexOrderResult order;
  /// [min, max] of the first marginal lies within that of the second.
  bool hull_nested = false;

  bool ok() const { return order.ordered && hull_nested; }
};

struct SequenceReport {
  std::vector<PairStatus> pairs;
  /// All marginals share the mean of the first within kMeanTolerance.
  bool common_mean = true;

  bool ok() const;
  /// First failing pair, if any.
  std::optional<std::size_t> first_failure() const;
};

SequenceReport validate_sequence(const MarginalSequence& ms);

/// Throws InvalidArgument carrying the first failure when the sequence is
/// not feasible. Solvers call this before doing any work.
void require_feasible(const MarginalSequence& ms);

}  // namespace mot

#endif  // MOT_MEASURES_HPP
