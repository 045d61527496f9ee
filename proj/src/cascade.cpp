#include "mot/cascade.hpp"

#include "mot/errors.hpp"
#include "mot/product_grid.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <utility>

namespace mot {

namespace {

constexpr std::array<std::pair<Variant, std::string_view>, 3> kVariantNames{{
    {Variant::proposition, "proposition"},
    {Variant::remark_a, "remark_a"},
    {Variant::remark_b, "remark_b"},
}};

void check_cost(const Eigen::VectorXd& cost, const ProductGrid& grid) {
  if (cost.size() != grid.paths()) {
    throw ShapeMismatch("cost tensor has " + std::to_string(cost.size()) +
                        " entries, product grid has " + std::to_string(grid.paths()));
  }
}

// Computes level i (1-based) from level i+1: for every level-i prefix p,
// envelope of the section upper[p, .] (minus `shift` when given) on the atoms
// of mu_{i+1}, evaluated at the last coordinate of p.
void descend_level(const Eigen::VectorXd& upper, const Eigen::VectorXd* shift,
                   const Eigen::VectorXd& section_atoms, const Eigen::VectorXd& eval_atoms,
                   Orientation orientation, Eigen::VectorXd& out,
                   std::vector<SectionSupport>& supports) {
  const Eigen::Index d = section_atoms.size();
  const Eigen::Index prefixes = upper.size() / d;
  const double sign = orientation == Orientation::lower ? 1.0 : -1.0;
  out.resize(prefixes);
  supports.resize(static_cast<std::size_t>(prefixes));

  std::vector<double> section(static_cast<std::size_t>(d));
  std::vector<double> knots;
  std::vector<Eigen::Index> hull;
  knots.reserve(static_cast<std::size_t>(d));
  hull.reserve(static_cast<std::size_t>(d));

  for (Eigen::Index p = 0; p < prefixes; ++p) {
    const double* s = upper.data() + p * d;
    if (shift != nullptr) {
      for (Eigen::Index a = 0; a < d; ++a) section[a] = s[a] - (*shift)(a);
      s = section.data();
    }
    detail::hull_scan(section_atoms.data(), s, d, sign, hull);
    knots.clear();
    for (Eigen::Index k : hull) knots.push_back(section_atoms(k));

    const double x = eval_atoms(p % eval_atoms.size());
    const auto w = detail::locate(knots.data(), static_cast<Eigen::Index>(knots.size()), x);
    SectionSupport& sup = supports[static_cast<std::size_t>(p)];
    sup.left = hull[static_cast<std::size_t>(w.left)];
    sup.right = hull[static_cast<std::size_t>(w.right)];
    sup.lambda = w.lambda;
    out(p) = sup.left == sup.right ? s[sup.left]
                                   : w.lambda * s[sup.left] + (1.0 - w.lambda) * s[sup.right];
  }
}

// Sum of mu_1-weighted c_1 and the marginal terms of u.
double objective_from_levels(const CascadeTensors& t, const MarginalSequence& ms,
                             const DualVariables& u) {
  double value = ms[0].weights().dot(t.level(1));
  for (std::size_t k = 0; k < u.u.size(); ++k) value += ms[k + 1].weights().dot(u.u[k].values);
  return value;
}

std::vector<Eigen::VectorXd> gradient_from_levels(const CascadeTensors& t,
                                                  const MarginalSequence& ms) {
  const ProductGrid grid(ms);
  const std::size_t n = ms.size();
  std::vector<Eigen::VectorXd> gradient(n - 1);
  Eigen::VectorXd mass = ms[0].weights();
  for (std::size_t i = 1; i < n; ++i) {
    const Eigen::Index d = grid.dim(i);
    Eigen::VectorXd next = Eigen::VectorXd::Zero(grid.level_size(i + 1));
    const auto& sup = t.supports[i - 1];
    for (Eigen::Index p = 0; p < mass.size(); ++p) {
      const double m = mass(p);
      const SectionSupport& s = sup[static_cast<std::size_t>(p)];
      next(p * d + s.left) += s.lambda * m;
      if (s.right != s.left) next(p * d + s.right) += (1.0 - s.lambda) * m;
    }
    gradient[i - 1] = ms[i].weights() - next.reshaped(d, grid.level_size(i)).rowwise().sum();
    mass = std::move(next);
  }
  return gradient;
}

}  // namespace

std::string_view to_string(Variant v) {
  for (const auto& [var, name] : kVariantNames) {
    if (var == v) return name;
  }
  return "unknown";
}

std::optional<Variant> variant_from_string(std::string_view name) {
  for (const auto& [var, n] : kVariantNames) {
    if (n == name) return var;
  }
  return std::nullopt;
}

DualVariables DualVariables::zeros(const MarginalSequence& ms) {
  DualVariables u;
  for (std::size_t i = 1; i < ms.size(); ++i) {
    u.u.emplace_back(ms[i].atoms(), Eigen::VectorXd::Zero(ms[i].size()));
  }
  return u;
}

void DualVariables::check(const MarginalSequence& ms) const {
  if (u.size() + 1 != ms.size()) {
    throw ShapeMismatch("expected " + std::to_string(ms.size() - 1) + " dual functions, got " +
                        std::to_string(u.size()));
  }
  for (std::size_t k = 0; k < u.size(); ++k) {
    const auto& atoms = ms[k + 1].atoms();
    if (u[k].grid.size() != atoms.size() || u[k].values.size() != atoms.size() ||
        u[k].grid != atoms) {
      throw ShapeMismatch("dual function u_" + std::to_string(k + 2) +
                          " is not tabulated on the atoms of its marginal");
    }
  }
}

Eigen::VectorXd build_cn(const Eigen::VectorXd& cost, const MarginalSequence& ms,
                         const DualVariables& u) {
  const ProductGrid grid(ms);
  check_cost(cost, grid);
  u.check(ms);
  Eigen::VectorXd cn = cost;
  const std::size_t n = ms.size();
  for (std::size_t k = 1; k < n; ++k) {
    // u_{k+1} varies with coordinate k: blocks of `inner` consecutive paths
    const Eigen::Index inner = grid.paths() / grid.level_size(k + 1);
    const Eigen::Index d = grid.dim(k);
    const Eigen::VectorXd& values = u.u[k - 1].values;
    for (Eigen::Index block = 0; block < grid.paths() / inner; ++block) {
      cn.segment(block * inner, inner).array() -= values(block % d);
    }
  }
  return cn;
}

CascadeTensors cascade_down(Eigen::VectorXd cn, const MarginalSequence& ms, Variant variant) {
  if (variant == Variant::remark_b) {
    throw InvalidArgument("cascade_down handles proposition and remark_a; use cascade_down_tilde");
  }
  const ProductGrid grid(ms);
  check_cost(cn, grid);
  const std::size_t n = ms.size();
  const Orientation orientation =
      variant == Variant::remark_a ? Orientation::upper : Orientation::lower;

  CascadeTensors t;
  t.variant = variant;
  t.levels.resize(n);
  t.supports.resize(n - 1);
  t.levels[n - 1] = std::move(cn);
  for (std::size_t i = n - 1; i >= 1; --i) {
    descend_level(t.levels[i], nullptr, ms[i].atoms(), ms[i - 1].atoms(), orientation,
                  t.levels[i - 1], t.supports[i - 1]);
  }
  return t;
}

CascadeTensors cascade_down_tilde(const Eigen::VectorXd& cost, const MarginalSequence& ms,
                                  const DualVariables& u) {
  const ProductGrid grid(ms);
  check_cost(cost, grid);
  u.check(ms);
  const std::size_t n = ms.size();

  CascadeTensors t;
  t.variant = Variant::remark_b;
  t.levels.resize(n);
  t.supports.resize(n - 1);
  t.levels[n - 1] = cost;
  for (std::size_t i = n - 1; i >= 1; --i) {
    descend_level(t.levels[i], &u.u[i - 1].values, ms[i].atoms(), ms[i - 1].atoms(),
                  Orientation::lower, t.levels[i - 1], t.supports[i - 1]);
  }
  return t;
}

CascadeTensors run_cascade(Variant variant, const Eigen::VectorXd& cost,
                           const MarginalSequence& ms, const DualVariables& u) {
  if (variant == Variant::remark_b) return cascade_down_tilde(cost, ms, u);
  return cascade_down(build_cn(cost, ms, u), ms, variant);
}

double dual_objective(Variant variant, const Eigen::VectorXd& cost, const MarginalSequence& ms,
                      const DualVariables& u) {
  return objective_from_levels(run_cascade(variant, cost, ms, u), ms, u);
}

double dual_objective(Variant variant, const CostSpec& cost, const MarginalSequence& ms,
                      const DualVariables& u) {
  return dual_objective(variant, cost.tabulate(ms), ms, u);
}

std::vector<Eigen::VectorXd> dual_subgradient(Variant variant, const Eigen::VectorXd& cost,
                                              const MarginalSequence& ms,
                                              const DualVariables& u) {
  return gradient_from_levels(run_cascade(variant, cost, ms, u), ms);
}

std::vector<Eigen::VectorXd> dual_subgradient(Variant variant, const CostSpec& cost,
                                              const MarginalSequence& ms,
                                              const DualVariables& u) {
  return dual_subgradient(variant, cost.tabulate(ms), ms, u);
}

DualEvaluation evaluate_dual(Variant variant, const Eigen::VectorXd& cost,
                             const MarginalSequence& ms, const DualVariables& u) {
  const CascadeTensors t = run_cascade(variant, cost, ms, u);
  return {objective_from_levels(t, ms, u), gradient_from_levels(t, ms)};
}

SubhedgeReport verify_subhedge(const Eigen::VectorXd& cost, const MarginalSequence& ms,
                               const DualVariables& u, const Coupling& q, Variant variant) {
  const CouplingCheck check = validate_coupling(ms, q);
  if (!check.ok()) throw InvalidArgument("coupling is not a martingale coupling: " + check.message);

  const ProductGrid grid(ms);
  const CascadeTensors t = run_cascade(variant, cost, ms, u);
  const Eigen::VectorXd& c1 = t.level(1);
  const Eigen::Index per_atom = grid.paths() / grid.dim(0);

  // sum_i u_i(x_i) along every path
  const Eigen::VectorXd hedge_terms = cost - build_cn(cost, ms, u);

  SubhedgeReport report;
  report.min_slack = std::numeric_limits<double>::infinity();
  for (Eigen::Index a = 0; a < grid.dim(0); ++a) {
    const auto block = q.q.segment(a * per_atom, per_atom);
    const double mass = block.sum();
    SubhedgeEntry e;
    e.atom = ms[0].atoms()(a);
    e.mass = mass;
    if (mass <= 0.0) continue;
    e.payoff = block.dot(cost.segment(a * per_atom, per_atom)) / mass;
    e.hedge = c1(a) + block.dot(hedge_terms.segment(a * per_atom, per_atom)) / mass;
    e.slack = is_upper(variant) ? e.hedge - e.payoff : e.payoff - e.hedge;
    report.min_slack = std::min(report.min_slack, e.slack);
    if (e.slack < -kSubhedgeTolerance) report.ok = false;
    report.entries.push_back(e);
  }
  return report;
}

void project_zero_mean(DualVariables& u, const MarginalSequence& ms) {
  for (std::size_t k = 0; k < u.u.size(); ++k) {
    const double m = ms[k + 1].weights().dot(u.u[k].values);
    u.u[k].values.array() -= m;
  }
}

}  // namespace mot
