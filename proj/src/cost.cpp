#include "mot/cost.hpp"

#include "mot/errors.hpp"
#include "mot/product_grid.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <utility>

namespace mot {

namespace {

constexpr std::array<std::pair<CostForm, std::string_view>, 6> kNames{{
    {CostForm::squared_increment, "squared_increment"},
    {CostForm::abs_increment, "abs_increment"},
    {CostForm::terminal_call, "terminal_call"},
    {CostForm::basket, "basket"},
    {CostForm::constant, "constant"},
    {CostForm::custom_table, "custom_table"},
}};

// Calls f(path coordinates, flat index) for every path of the grid.
template <typename F>
void for_each_path(const MarginalSequence& ms, F&& f) {
  const ProductGrid grid(ms);
  std::vector<Eigen::Index> idx;
  std::vector<double> x(ms.size());
  for (Eigen::Index p = 0; p < grid.paths(); ++p) {
    grid.unravel(p, idx);
    for (std::size_t k = 0; k < ms.size(); ++k) x[k] = ms[k].atoms()(idx[k]);
    f(std::span<const double>(x), p);
  }
}

}  // namespace

std::string_view to_string(CostForm form) {
  for (const auto& [f, name] : kNames) {
    if (f == form) return name;
  }
  return "unknown";
}

std::optional<CostForm> cost_form_from_string(std::string_view name) {
  for (const auto& [f, n] : kNames) {
    if (n == name) return f;
  }
  return std::nullopt;
}

CostSpec CostSpec::squared_increment() { return {CostForm::squared_increment, 0.0}; }
CostSpec CostSpec::abs_increment() { return {CostForm::abs_increment, 0.0}; }
CostSpec CostSpec::terminal_call(double strike) { return {CostForm::terminal_call, strike}; }
CostSpec CostSpec::basket(double strike) { return {CostForm::basket, strike}; }
CostSpec CostSpec::constant(double value) { return {CostForm::constant, value}; }

CostSpec CostSpec::table(Eigen::VectorXd values) {
  if (!values.allFinite()) throw InvalidArgument("cost table must be finite");
  CostSpec c(CostForm::custom_table, 0.0);
  c.table_ = std::move(values);
  return c;
}

CostSpec CostSpec::from_function(const MarginalSequence& ms,
                                 const std::function<double(std::span<const double>)>& f) {
  Eigen::VectorXd values(ProductGrid(ms).paths());
  for_each_path(ms, [&](std::span<const double> x, Eigen::Index p) { values(p) = f(x); });
  return table(std::move(values));
}

double CostSpec::evaluate(std::span<const double> x) const {
  double acc = 0.0;
  switch (form_) {
    case CostForm::squared_increment:
      for (std::size_t i = 1; i < x.size(); ++i) acc += (x[i] - x[i - 1]) * (x[i] - x[i - 1]);
      return acc;
    case CostForm::abs_increment:
      for (std::size_t i = 1; i < x.size(); ++i) acc += std::abs(x[i] - x[i - 1]);
      return acc;
    case CostForm::terminal_call:
      return std::max(x.back() - parameter_, 0.0);
    case CostForm::basket:
      for (double xi : x) acc += xi;
      return std::max(acc / static_cast<double>(x.size()) - parameter_, 0.0);
    case CostForm::constant:
      return parameter_;
    case CostForm::custom_table:
      break;
  }
  throw InvalidArgument("custom_table costs have no closed form");
}

Eigen::VectorXd CostSpec::tabulate(const MarginalSequence& ms) const {
  const Eigen::Index paths = ProductGrid(ms).paths();
  if (form_ == CostForm::custom_table) {
    if (table_->size() != paths) {
      throw ShapeMismatch("cost table has " + std::to_string(table_->size()) +
                          " entries, product grid has " + std::to_string(paths));
    }
    return *table_;
  }
  Eigen::VectorXd values(paths);
  for_each_path(ms, [&](std::span<const double> x, Eigen::Index p) { values(p) = evaluate(x); });
  return values;
}

double growth_constant(const Eigen::VectorXd& cost, const MarginalSequence& ms) {
  if (cost.size() != ProductGrid(ms).paths()) throw ShapeMismatch("cost tensor shape");
  double k = 0.0;
  for_each_path(ms, [&](std::span<const double> x, Eigen::Index p) {
    double scale = 1.0;
    for (double xi : x) scale += std::abs(xi);
    k = std::max(k, -cost(p) / scale);
  });
  return k;
}

bool check_growth(const Eigen::VectorXd& cost, const MarginalSequence& ms, double declared) {
  return growth_constant(cost, ms) <= declared;
}

}  // namespace mot
