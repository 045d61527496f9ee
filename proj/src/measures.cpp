#include "mot/measures.hpp"

#include "mot/errors.hpp"

#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/erf.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <utility>

namespace mot {

DiscreteMeasure::DiscreteMeasure(std::vector<double> atoms, std::vector<double> weights) {
  if (atoms.empty()) {
    throw InvalidArgument("measure must have at least one atom");
  }
  if (atoms.size() != weights.size()) {
    throw InvalidArgument("atoms and weights differ in length");
  }
  double total = 0.0;
  for (std::size_t j = 0; j < atoms.size(); ++j) {
    if (!std::isfinite(atoms[j]) || !std::isfinite(weights[j])) {
      throw InvalidArgument("measure entries must be finite");
    }
    if (weights[j] < 0.0) {
      throw InvalidArgument("negative weight at position " + std::to_string(j));
    }
    total += weights[j];
  }
  if (std::abs(total - 1.0) > kMassTolerance) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "weights sum to " << total << ", expected 1";
    throw InvalidArgument(msg.str());
  }

  std::vector<std::size_t> order(atoms.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return atoms[a] < atoms[b]; });

  std::vector<std::pair<double, double>> merged;
  for (std::size_t idx : order) {
    if (!merged.empty() && merged.back().first == atoms[idx]) {
      merged.back().second += weights[idx];
    } else {
      merged.emplace_back(atoms[idx], weights[idx]);
    }
  }
  std::erase_if(merged, [](const auto& aw) { return aw.second == 0.0; });

  atoms_.resize(static_cast<Eigen::Index>(merged.size()));
  weights_.resize(atoms_.size());
  for (Eigen::Index j = 0; j < atoms_.size(); ++j) {
    atoms_(j) = merged[static_cast<std::size_t>(j)].first;
    weights_(j) = merged[static_cast<std::size_t>(j)].second;
  }
}

DiscreteMeasure DiscreteMeasure::dirac(double x) { return DiscreteMeasure({x}, {1.0}); }

double potential(const DiscreteMeasure& mu, double k) {
  return ((mu.atoms().array() - k).abs() * mu.weights().array()).sum();
}

ConvexOrderResult convex_order_check(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  ConvexOrderResult result;
  result.mean_gap = nu.mean() - mu.mean();
  if (std::abs(result.mean_gap) > kMeanTolerance) {
    result.failure = OrderFailure::mean_mismatch;
    return result;
  }

  auto check_at = [&](double k) {
    const double excess = potential(mu, k) - potential(nu, k);
    if (excess > kPotentialSlack && excess > result.excess) {
      result.excess = excess;
      result.witness_k = k;
    }
  };
  for (double k : mu.atoms()) check_at(k);
  for (double k : nu.atoms()) check_at(k);

  if (result.witness_k) {
    result.failure = OrderFailure::potential_violation;
    return result;
  }
  result.ordered = true;
  return result;
}

namespace {

// P(a < Z < b) for standard normal Z, computed on the tail that keeps
// relative precision.
double normal_mass(double a, double b) {
  using boost::math::erfc;
  const double r = 1.0 / std::sqrt(2.0);
  auto lower = [&](double x) {
    if (x == -std::numeric_limits<double>::infinity()) return 0.0;
    if (x == std::numeric_limits<double>::infinity()) return 1.0;
    return 0.5 * erfc(-x * r);
  };
  auto upper = [&](double x) {
    if (x == -std::numeric_limits<double>::infinity()) return 1.0;
    if (x == std::numeric_limits<double>::infinity()) return 0.0;
    return 0.5 * erfc(x * r);
  };
  if (a >= 0.0) return upper(a) - upper(b);
  return lower(b) - lower(a);
}

}  // namespace

DiscreteMeasure quantize_lognormal(double location, double scale, int m) {
  if (m < 1) throw InvalidArgument("quantize_lognormal: m must be positive");
  if (!(scale >= 0.0) || !std::isfinite(scale) || !std::isfinite(location)) {
    throw InvalidArgument("quantize_lognormal: scale must be finite and nonnegative");
  }
  const double mean = std::exp(location + 0.5 * scale * scale);
  const std::size_t count = static_cast<std::size_t>(m);
  std::vector<double> weights(count, 1.0 / m);
  std::vector<double> atoms(count, mean);
  if (scale > 0.0 && m > 1) {
    const boost::math::normal standard;
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> z(count + 1);
    z.front() = -inf;
    z.back() = inf;
    for (std::size_t k = 1; k < count; ++k) {
      z[k] = boost::math::quantile(standard, static_cast<double>(k) / m);
    }
    // E[X | z_k < log-score < z_{k+1}] = m * exp(loc + s^2/2) * P(z_k - s < Z < z_{k+1} - s)
    for (std::size_t k = 0; k < count; ++k) {
      atoms[k] = m * mean * normal_mass(z[k] - scale, z[k + 1] - scale);
    }
  }
  return DiscreteMeasure(std::move(atoms), std::move(weights));
}

MarginalSequence::MarginalSequence(std::vector<DiscreteMeasure> marginals)
    : marginals_(std::move(marginals)) {
  if (marginals_.size() < 2) {
    throw InvalidArgument("a marginal sequence needs at least two measures");
  }
}

std::vector<Eigen::Index> MarginalSequence::shape() const {
  std::vector<Eigen::Index> dims;
  dims.reserve(marginals_.size());
  for (const auto& mu : marginals_) dims.push_back(mu.size());
  return dims;
}

bool SequenceReport::ok() const {
  return common_mean &&
         std::all_of(pairs.begin(), pairs.end(), [](const PairStatus& p) { return p.ok(); });
}

std::optional<std::size_t> SequenceReport::first_failure() const {
  for (const auto& p : pairs) {
    if (!p.ok()) return p.first;
  }
  return std::nullopt;
}

SequenceReport validate_sequence(const MarginalSequence& ms) {
  SequenceReport report;
  const double base = ms[0].mean();
  for (std::size_t i = 0; i < ms.size(); ++i) {
    if (std::abs(ms[i].mean() - base) > kMeanTolerance) report.common_mean = false;
  }
  for (std::size_t i = 0; i + 1 < ms.size(); ++i) {
    PairStatus status;
    status.first = i;
    status.order = convex_order_check(ms[i], ms[i + 1]);
    status.hull_nested = ms[i + 1].min_atom() <= ms[i].min_atom() &&
                         ms[i].max_atom() <= ms[i + 1].max_atom();
    report.pairs.push_back(status);
  }
  return report;
}

void require_feasible(const MarginalSequence& ms) {
  const auto report = validate_sequence(ms);
  if (report.ok()) return;
  std::ostringstream msg;
  msg.precision(12);
  if (auto i = report.first_failure()) {
    const auto& p = report.pairs[*i];
    msg << "marginals " << (*i + 1) << " and " << (*i + 2) << " are not in convex order";
    if (p.order.failure == OrderFailure::mean_mismatch) {
      msg << " (mean mismatch " << p.order.mean_gap << ")";
    } else if (p.order.witness_k) {
      msg << " (potential violated at k = " << *p.order.witness_k << ")";
    } else if (!p.hull_nested) {
      msg << " (supports not nested)";
    }
  } else {
    msg << "marginals do not share a common mean";
  }
  throw InvalidArgument(msg.str());
}

}  // namespace mot
