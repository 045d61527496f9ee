// Random instance generators shared by the unit and acceptance suites.
#ifndef MOT_TESTS_GENERATORS_HPP
#define MOT_TESTS_GENERATORS_HPP

#include "mot/cascade.hpp"
#include "mot/cost.hpp"
#include "mot/envelope.hpp"
#include "mot/measures.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <string>
#include <vector>

namespace mot::testing {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline int uniform_int(Rng& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

/// Atoms on a lattice of spacing `step` keyed by integer position.
using LatticeMeasure = std::map<int, double>;

inline DiscreteMeasure to_measure(const LatticeMeasure& m, double step) {
  std::vector<double> atoms, weights;
  double total = 0.0;
  for (const auto& [k, w] : m) total += w;
  for (const auto& [k, w] : m) {
    atoms.push_back(k * step);
    weights.push_back(w / total);
  }
  return DiscreteMeasure(std::move(atoms), std::move(weights));
}

/// Mean-preserving spread: moves a fraction of the mass at lattice point x
/// to x - a and x + b in proportions b : a.
inline void spread(LatticeMeasure& m, Rng& rng, int max_reach) {
  auto it = m.begin();
  std::advance(it, uniform_int(rng, 0, static_cast<int>(m.size()) - 1));
  const int x = it->first;
  const double w = it->second * (uniform_int(rng, 0, 1) == 0 ? 1.0 : uniform(rng, 0.3, 0.9));
  const int a = uniform_int(rng, 1, max_reach);
  const int b = uniform_int(rng, 1, max_reach);
  it->second -= w;
  if (it->second <= 1e-15) m.erase(it);
  m[x - a] += w * b / (a + b);
  m[x + b] += w * a / (a + b);
}

struct RandomInstanceOptions {
  int n = 2;
  int min_first = 1;
  int max_first = 4;
  int max_atoms = 15;
  int max_reach = 2;
  int spreads = 3;
  double step = 0.5;
};

/// Marginals built by repeated mean-preserving spreads, so consecutive
/// measures are in convex order by construction.
inline MarginalSequence random_marginals(Rng& rng, const RandomInstanceOptions& o) {
  LatticeMeasure m;
  const int first = uniform_int(rng, o.min_first, o.max_first);
  while (static_cast<int>(m.size()) < first) m[uniform_int(rng, -o.max_first, o.max_first)] = uniform(rng, 0.2, 1.0);
  double total = 0.0;
  for (const auto& [k, w] : m) total += w;
  for (auto& [k, w] : m) w /= total;

  std::vector<DiscreteMeasure> out{to_measure(m, o.step)};
  for (int i = 1; i < o.n; ++i) {
    const int count = uniform_int(rng, 1, o.spreads);
    for (int s = 0; s < count; ++s) {
      LatticeMeasure trial = m;
      spread(trial, rng, o.max_reach);
      if (static_cast<int>(trial.size()) <= o.max_atoms) m = std::move(trial);
    }
    out.push_back(to_measure(m, o.step));
  }
  return MarginalSequence(std::move(out));
}

inline CostSpec random_named_cost(Rng& rng, const MarginalSequence& ms) {
  const double lo = ms[0].min_atom();
  const double hi = ms[0].max_atom();
  switch (uniform_int(rng, 0, 3)) {
    case 0: return CostSpec::squared_increment();
    case 1: return CostSpec::abs_increment();
    case 2: return CostSpec::terminal_call(uniform(rng, lo - 0.5, hi + 0.5));
    default: return CostSpec::basket(uniform(rng, lo - 0.5, hi + 0.5));
  }
}

/// Cost with random entries, shifted so it stays bounded.
inline Eigen::VectorXd random_table(Rng& rng, Eigen::Index size, double scale = 1.0) {
  Eigen::VectorXd v(size);
  for (Eigen::Index j = 0; j < size; ++j) v(j) = uniform(rng, -scale, scale);
  return v;
}

inline DualVariables random_duals(Rng& rng, const MarginalSequence& ms, double scale = 1.0) {
  DualVariables u = DualVariables::zeros(ms);
  for (auto& f : u.u) {
    for (Eigen::Index j = 0; j < f.size(); ++j) f.values(j) = uniform(rng, -scale, scale);
  }
  return u;
}

inline GridFunction<double> random_grid_function(Rng& rng, int length, double scale = 1.0) {
  std::vector<double> xs;
  double x = uniform(rng, -2.0, 0.0);
  for (int j = 0; j < length; ++j) {
    xs.push_back(x);
    x += uniform(rng, 0.01, 0.5);
  }
  Eigen::VectorXd grid = Eigen::Map<Eigen::VectorXd>(xs.data(), length);
  Eigen::VectorXd values(length);
  for (int j = 0; j < length; ++j) values(j) = uniform(rng, -scale, scale);
  return GridFunction<double>(grid, values);
}

}  // namespace mot::testing

#endif  // MOT_TESTS_GENERATORS_HPP
