// Reference computations that share no code with the library.
#ifndef MOT_TESTS_ORACLES_HPP
#define MOT_TESTS_ORACLES_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

namespace mot::testing {

/// Convex envelope at t as the supremum of affine minorants. In one
/// dimension the supremum is attained by a line through two data points.
inline double envelope_by_minorants(const Eigen::VectorXd& x, const Eigen::VectorXd& f, double t) {
  const Eigen::Index n = x.size();
  if (n == 1) return f(0);
  double best = -std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index k = j + 1; k < n; ++k) {
      const double slope = (f(k) - f(j)) / (x(k) - x(j));
      bool minorant = true;
      for (Eigen::Index i = 0; i < n && minorant; ++i) {
        const double line = f(j) + slope * (x(i) - x(j));
        minorant = line <= f(i) + 1e-12 * (1.0 + std::abs(f(i)));
      }
      if (minorant) best = std::max(best, f(j) + slope * (t - x(j)));
    }
  }
  return best;
}

/// Convex envelope at t as the cheapest two-point convex combination.
inline double envelope_by_chords(const Eigen::VectorXd& x, const Eigen::VectorXd& f, double t) {
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    if (x(j) == t) best = std::min(best, f(j));
    for (Eigen::Index k = j + 1; k < x.size(); ++k) {
      if (x(j) <= t && t <= x(k)) {
        const double lambda = (x(k) - t) / (x(k) - x(j));
        best = std::min(best, lambda * f(j) + (1.0 - lambda) * f(k));
      }
    }
  }
  return best;
}

/// Composite Simpson rule on [a, b] with `panels` (even) subintervals.
inline double simpson(const std::function<double(double)>& g, double a, double b, int panels) {
  const double h = (b - a) / panels;
  double s = g(a) + g(b);
  for (int i = 1; i < panels; ++i) s += (i % 2 ? 4.0 : 2.0) * g(a + i * h);
  return s * h / 3.0;
}

/// m * E[X ; X in k-th equal-probability slice] for X = exp(location + scale Z),
/// integrating x * density in the log variable between normal quantiles
/// found by bisection on erfc.
inline double lognormal_slice_mean(double location, double scale, int m, int k) {
  auto cdf = [](double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); };
  auto quantile = [&](double p) {
    if (p <= 0.0) return -12.0;
    if (p >= 1.0) return 12.0;
    double lo = -12.0, hi = 12.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (cdf(mid) < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  };
  const double za = quantile(static_cast<double>(k) / m);
  const double zb = quantile(static_cast<double>(k + 1) / m);
  const double pi = std::acos(-1.0);
  auto integrand = [&](double z) {
    return std::exp(location + scale * z) * std::exp(-0.5 * z * z) / std::sqrt(2.0 * pi);
  };
  return m * simpson(integrand, za, zb, 20000);
}

/// Central difference of a scalar function along one coordinate.
template <typename F>
double central_difference(F&& f, double h) {
  return (f(h) - f(-h)) / (2.0 * h);
}

}  // namespace mot::testing

#endif  // MOT_TESTS_ORACLES_HPP
