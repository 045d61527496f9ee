#ifndef MOT_COUPLING_HPP
#define MOT_COUPLING_HPP

#include "mot/measures.hpp"

#include <Eigen/Dense>

#include <string>

namespace mot {

/// Probability mass per path of supp mu_1 x ... x supp mu_n (product-grid
/// layout), representing a candidate martingale coupling.
struct Coupling {
  Eigen::VectorXd q;
};

struct CouplingCheck {
  double mass_error = 0.0;
  double marginal_error = 0.0;
  /// Largest |sum_tail q (x_{i+1} - x_i)| / (prefix mass * grid span).
  double martingale_error = 0.0;
  double min_entry = 0.0;
  std::string message;

  bool ok() const { return message.empty(); }
};

inline constexpr double kCouplingMassTolerance = 1e-9;
inline constexpr double kCouplingMarginalTolerance = 1e-8;
inline constexpr double kCouplingMartingaleTolerance = 1e-8;

/// Checks nonnegativity, total mass, every marginal and the martingale
/// condition at every prefix carrying mass above 1e-12.
CouplingCheck validate_coupling(const MarginalSequence& ms, const Coupling& coupling);

/// Sum of q * c over the grid.
double expected_cost(const Coupling& coupling, const Eigen::VectorXd& cost);

}  // namespace mot

#endif  // MOT_COUPLING_HPP
