#include "mot/coupling.hpp"

#include "mot/errors.hpp"
#include "mot/product_grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mot {

CouplingCheck validate_coupling(const MarginalSequence& ms, const Coupling& coupling) {
  const ProductGrid grid(ms);
  const std::size_t n = ms.size();
  CouplingCheck check;
  std::ostringstream msg;
  if (coupling.q.size() != grid.paths()) {
    check.message = "coupling has " + std::to_string(coupling.q.size()) + " entries, expected " +
                    std::to_string(grid.paths());
    return check;
  }

  check.min_entry = coupling.q.minCoeff();
  if (check.min_entry < -1e-12) msg << "negative mass " << check.min_entry << "; ";
  check.mass_error = std::abs(coupling.q.sum() - 1.0);
  if (check.mass_error > kCouplingMassTolerance) msg << "total mass off by " << check.mass_error << "; ";

  double lo = ms[0].min_atom();
  double hi = ms[0].max_atom();
  for (const auto& mu : ms) {
    lo = std::min(lo, mu.min_atom());
    hi = std::max(hi, mu.max_atom());
  }
  const double span = hi > lo ? hi - lo : 1.0;

  // level_mass[i] holds the mass of every length-i prefix
  std::vector<Eigen::VectorXd> level_mass(n + 1);
  level_mass[n] = coupling.q;
  for (std::size_t i = n; i-- > 1;) {
    const Eigen::Index d = grid.dim(i);
    level_mass[i] = level_mass[i + 1].reshaped(d, grid.level_size(i)).colwise().sum().transpose();
  }

  for (std::size_t i = 0; i < n; ++i) {
    // marginal of coordinate i from the level-(i+1) prefix masses
    const Eigen::Index d = grid.dim(i);
    const Eigen::VectorXd marginal =
        level_mass[i + 1].reshaped(d, grid.level_size(i)).rowwise().sum();
    const double err = (marginal - ms[i].weights()).cwiseAbs().maxCoeff();
    check.marginal_error = std::max(check.marginal_error, err);
    if (err > kCouplingMarginalTolerance) msg << "marginal " << (i + 1) << " off by " << err << "; ";
  }

  for (std::size_t i = 1; i < n; ++i) {
    const Eigen::Index d = grid.dim(i);
    const Eigen::VectorXd& next = ms[i].atoms();
    for (Eigen::Index p = 0; p < grid.level_size(i); ++p) {
      const double mass = level_mass[i](p);
      if (mass <= 1e-12) continue;
      const double x = ms[i - 1].atoms()(p % grid.dim(i - 1));
      const double drift = (level_mass[i + 1].segment(p * d, d).array() * (next.array() - x)).sum();
      const double err = std::abs(drift) / (mass * span);
      check.martingale_error = std::max(check.martingale_error, err);
    }
  }
  if (check.martingale_error > kCouplingMartingaleTolerance) {
    msg << "martingale condition violated by " << check.martingale_error << "; ";
  }
  check.message = msg.str();
  return check;
}

double expected_cost(const Coupling& coupling, const Eigen::VectorXd& cost) {
  if (coupling.q.size() != cost.size()) throw ShapeMismatch("coupling and cost differ in size");
  return coupling.q.dot(cost);
}

}  // namespace mot
