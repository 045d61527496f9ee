#ifndef MOT_ENVELOPE_HPP
#define MOT_ENVELOPE_HPP

#include "mot/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace mot {

/// Real function tabulated on a strictly increasing grid, read between grid
/// points as the piecewise-linear interpolant.
template <typename Scalar>
struct GridFunction {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Vector grid;
  Vector values;

  GridFunction() = default;
  GridFunction(Vector g, Vector v) : grid(std::move(g)), values(std::move(v)) { validate(); }

  Eigen::Index size() const { return grid.size(); }

  void validate() const {
    if (grid.size() < 1) throw InvalidArgument("grid function needs at least one point");
    if (grid.size() != values.size()) throw ShapeMismatch("grid and values differ in length");
    for (Eigen::Index j = 1; j < grid.size(); ++j) {
      if (!(grid(j - 1) < grid(j))) {
        throw InvalidArgument("grid must be strictly increasing (position " + std::to_string(j) +
                              ")");
      }
    }
  }
};

enum class Orientation { lower, upper };

/// Knots of the lower (convex envelope) or upper (concave envelope) hull.
template <typename Scalar>
struct EnvelopeResult {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Vector hull_grid;
  Vector hull_values;
  /// Position of each knot in the source grid.
  std::vector<Eigen::Index> hull_index;
  Orientation orientation = Orientation::lower;

  Eigen::Index size() const { return hull_grid.size(); }
};

/// Convex-combination representation of an envelope value:
/// t = lambda * x_left + (1 - lambda) * x_right, left/right index hull knots.
template <typename Scalar>
struct EnvelopeWeights {
  Eigen::Index left = 0;
  Eigen::Index right = 0;
  Scalar lambda = Scalar(1);
};

/// Consecutive hull slopes closer than this are treated as collinear.
inline constexpr double kSlopeTolerance = 1e-12;
/// Relative clamp tolerance for evaluation at the hull boundary.
inline constexpr double kClampTolerance = 1e-9;

namespace detail {

/// Monotone-chain scan over presorted points; fills `hull` with the indices
/// of the lower hull of (x_j, sign * v_j).
template <typename Scalar>
void hull_scan(const Scalar* x, const Scalar* v, Eigen::Index n, Scalar sign,
               std::vector<Eigen::Index>& hull) {
  hull.clear();
  auto slope = [&](Eigen::Index a, Eigen::Index b) {
    return sign * (v[b] - v[a]) / (x[b] - x[a]);
  };
  for (Eigen::Index j = 0; j < n; ++j) {
    while (hull.size() >= 2) {
      const Eigen::Index a = hull[hull.size() - 2];
      const Eigen::Index b = hull.back();
      // keep b only if the slope strictly increases through it
      if (slope(b, j) - slope(a, b) > Scalar(kSlopeTolerance)) break;
      hull.pop_back();
    }
    hull.push_back(j);
  }
}

template <typename Scalar>
EnvelopeResult<Scalar> monotone_chain(const GridFunction<Scalar>& f, Orientation orientation) {
  f.validate();
  const Scalar sign = orientation == Orientation::lower ? Scalar(1) : Scalar(-1);
  std::vector<Eigen::Index> hull;
  hull.reserve(static_cast<std::size_t>(f.size()));
  hull_scan(f.grid.data(), f.values.data(), f.size(), sign, hull);

  EnvelopeResult<Scalar> e;
  e.orientation = orientation;
  e.hull_index = hull;
  e.hull_grid.resize(static_cast<Eigen::Index>(hull.size()));
  e.hull_values.resize(e.hull_grid.size());
  for (std::size_t k = 0; k < hull.size(); ++k) {
    e.hull_grid(static_cast<Eigen::Index>(k)) = f.grid(hull[k]);
    e.hull_values(static_cast<Eigen::Index>(k)) = f.values(hull[k]);
  }
  return e;
}

template <typename Scalar>
Scalar clamp_epsilon(Scalar first, Scalar last) {
  const Scalar span = last - first;
  if (span > Scalar(0)) return Scalar(kClampTolerance) * span;
  return Scalar(kClampTolerance) * std::max(Scalar(1), std::abs(first));
}

}  // namespace detail

/// Lower convex hull of {(grid_j, values_j)}: the convex envelope of f on
/// [grid_first, grid_last]. Linear in the grid length.
template <typename Scalar>
EnvelopeResult<Scalar> convex_envelope(const GridFunction<Scalar>& f) {
  return detail::monotone_chain(f, Orientation::lower);
}

/// Upper hull: the smallest concave function above f.
template <typename Scalar>
EnvelopeResult<Scalar> concave_envelope(const GridFunction<Scalar>& f) {
  return detail::monotone_chain(f, Orientation::upper);
}

namespace detail {

/// Locates t among sorted knots, clamping within the boundary tolerance.
template <typename Scalar>
EnvelopeWeights<Scalar> locate(const Scalar* knots, Eigen::Index n, Scalar t) {
  const Scalar first = knots[0];
  const Scalar last = knots[n - 1];
  const Scalar eps = clamp_epsilon(first, last);
  if (t < first - eps || t > last + eps || std::isnan(t)) {
    throw OutOfDomain("envelope evaluated at " + std::to_string(t) + " outside [" +
                      std::to_string(first) + ", " + std::to_string(last) + "]");
  }
  t = std::clamp(t, first, last);

  const Scalar* pos = std::lower_bound(knots, knots + n, t);
  const Eigen::Index r = pos - knots;
  if (r < n && *pos == t) return {r, r, Scalar(1)};
  // first < t < last here, so 0 < r < n
  const Eigen::Index l = r - 1;
  const Scalar lambda = (knots[r] - t) / (knots[r] - knots[l]);
  return {l, r, lambda};
}

}  // namespace detail

template <typename Scalar>
EnvelopeWeights<Scalar> envelope_weights(const EnvelopeResult<Scalar>& e, Scalar t) {
  return detail::locate(e.hull_grid.data(), e.size(), t);
}

/// Piecewise-linear evaluation of the hull; exact at knots.
template <typename Scalar>
Scalar eval_envelope(const EnvelopeResult<Scalar>& e, Scalar t) {
  const auto w = envelope_weights(e, t);
  if (w.left == w.right) return e.hull_values(w.left);
  return w.lambda * e.hull_values(w.left) + (Scalar(1) - w.lambda) * e.hull_values(w.right);
}

/// f**(t) = sup_m { m t - f*(m) } with f*(m) = max_j { grid_j m - values_j },
/// the outer sup restricted to the hull segment slopes.
template <typename Scalar>
Scalar biconjugate_eval(const GridFunction<Scalar>& f, Scalar t) {
  const auto hull = convex_envelope(f);
  const Scalar first = f.grid(0);
  const Scalar last = f.grid(f.size() - 1);
  const Scalar eps = detail::clamp_epsilon(first, last);
  if (t < first - eps || t > last + eps || std::isnan(t)) {
    throw OutOfDomain("biconjugate evaluated at " + std::to_string(t) + " outside the grid");
  }
  t = std::clamp(t, first, last);
  if (hull.size() == 1) return f.values(0);

  Scalar best = -std::numeric_limits<Scalar>::infinity();
  for (Eigen::Index k = 0; k + 1 < hull.size(); ++k) {
    const Scalar m = (hull.hull_values(k + 1) - hull.hull_values(k)) /
                     (hull.hull_grid(k + 1) - hull.hull_grid(k));
    const Scalar conjugate = (m * f.grid - f.values).maxCoeff();
    best = std::max(best, m * t - conjugate);
  }
  return best;
}

/// The hull knots as a grid function.
template <typename Scalar>
GridFunction<Scalar> as_grid_function(const EnvelopeResult<Scalar>& e) {
  return GridFunction<Scalar>(e.hull_grid, e.hull_values);
}

}  // namespace mot

#endif  // MOT_ENVELOPE_HPP
