#ifndef MOT_COST_HPP
#define MOT_COST_HPP

#include "mot/measures.hpp"

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace mot {

enum class CostForm {
  squared_increment,  ///< sum_i (x_{i+1} - x_i)^2
  abs_increment,      ///< sum_i |x_{i+1} - x_i|
  terminal_call,      ///< (x_n - K)_+
  basket,             ///< (mean_i x_i - K)_+
  constant,           ///< kappa
  custom_table,       ///< explicit tensor on the product grid
};

std::string_view to_string(CostForm form);
std::optional<CostForm> cost_form_from_string(std::string_view name);

/// n-variate payoff, either a named closed form or a tensor on the product
/// grid (row-major, last coordinate fastest).
class CostSpec {
 public:
  static CostSpec squared_increment();
  static CostSpec abs_increment();
  static CostSpec terminal_call(double strike);
  static CostSpec basket(double strike);
  static CostSpec constant(double value);
  static CostSpec table(Eigen::VectorXd values);
  /// Tabulates an arbitrary callable on the product grid of `ms`.
  static CostSpec from_function(const MarginalSequence& ms,
                                const std::function<double(std::span<const double>)>& f);

  CostForm form() const { return form_; }
  /// Strike for the call forms, kappa for constant.
  double parameter() const { return parameter_; }
  const std::optional<Eigen::VectorXd>& table_values() const { return table_; }

  /// Closed-form evaluation at one path. Throws for custom_table.
  double evaluate(std::span<const double> x) const;

  /// Values at every product-grid path. Throws ShapeMismatch when a custom
  /// table does not match the grid.
  Eigen::VectorXd tabulate(const MarginalSequence& ms) const;

 private:
  CostSpec(CostForm form, double parameter) : form_(form), parameter_(parameter) {}

  CostForm form_;
  double parameter_ = 0.0;
  std::optional<Eigen::VectorXd> table_;
};

/// Smallest K >= 0 with c(x) >= -K (1 + sum |x_i|) on the grid.
double growth_constant(const Eigen::VectorXd& cost, const MarginalSequence& ms);

/// True when the tabulated cost respects the declared lower growth bound.
bool check_growth(const Eigen::VectorXd& cost, const MarginalSequence& ms, double declared);

}  // namespace mot

#endif  // MOT_COST_HPP
