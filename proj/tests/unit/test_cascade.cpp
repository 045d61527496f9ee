#include "mot/cascade.hpp"
#include "mot/errors.hpp"
#include "mot/primal.hpp"
#include "mot/product_grid.hpp"

#include "support/generators.hpp"
#include "support/instances.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

using namespace mot;
using namespace mot::testing;

namespace {

constexpr Variant kAll[] = {Variant::proposition, Variant::remark_a, Variant::remark_b};

MarginalSequence random_instance(Rng& rng, int n) {
  RandomInstanceOptions o;
  o.n = n;
  o.max_atoms = 8;
  return random_marginals(rng, o);
}

DualVariables combine(const DualVariables& a, const DualVariables& b, double lambda) {
  DualVariables out = a;
  for (std::size_t k = 0; k < out.u.size(); ++k) {
    out.u[k].values = lambda * a.u[k].values + (1 - lambda) * b.u[k].values;
  }
  return out;
}

}  // namespace

TEST(BuildCn, SubtractsDualFunctions) {
  const auto ms = unique_coupling_instance();
  const auto cost = CostSpec::squared_increment().tabulate(ms);
  DualVariables u = DualVariables::zeros(ms);
  EXPECT_EQ(build_cn(cost, ms, u), cost);
  u.u[0].values << -1.0, 1.0;
  const auto cn = build_cn(cost, ms, u);
  EXPECT_DOUBLE_EQ(cn(0), 2.0);
  EXPECT_DOUBLE_EQ(cn(1), 0.0);
}

TEST(DualVariables, ShapeChecks) {
  const auto ms = three_quarter_instance();
  DualVariables u = DualVariables::zeros(ms);
  EXPECT_NO_THROW(u.check(ms));
  u.u[0].grid(0) = -2.5;
  EXPECT_THROW(u.check(ms), ShapeMismatch);
  DualVariables none;
  EXPECT_THROW(none.check(ms), ShapeMismatch);
}

TEST(CascadeDown, HandValues) {
  const auto a = unique_coupling_instance();
  const auto ta = cascade_down(CostSpec::squared_increment().tabulate(a), a, Variant::proposition);
  ASSERT_EQ(ta.levels.size(), 2u);
  EXPECT_DOUBLE_EQ(ta.level(1)(0), 1.0);

  const auto b = three_quarter_instance();
  const auto tb = cascade_down(CostSpec::squared_increment().tabulate(b), b, Variant::proposition);
  EXPECT_DOUBLE_EQ(tb.level(1)(0), 3.0);
  EXPECT_DOUBLE_EQ(tb.level(1)(1), 3.0);
  EXPECT_THROW(cascade_down(CostSpec::squared_increment().tabulate(b), b, Variant::remark_b),
               InvalidArgument);
}

TEST(CascadeDown, KnotHitOnConvexSection) {
  // x_1 = 0 is an atom of mu_2, and the section y -> (y - x)^2 is convex
  const MarginalSequence ms({DiscreteMeasure::dirac(0.0), DiscreteMeasure({-1, 0, 2}, {0.4, 0.4, 0.2})});
  const auto t = cascade_down(CostSpec::squared_increment().tabulate(ms), ms, Variant::proposition);
  EXPECT_DOUBLE_EQ(t.level(1)(0), 0.0);
}

TEST(CascadeTilde, MatchesPropositionAtZero) {
  Rng rng(2);
  for (int trial = 0; trial < 30; ++trial) {
    const auto ms = random_instance(rng, 3);
    const auto cost = random_named_cost(rng, ms).tabulate(ms);
    const auto zero = DualVariables::zeros(ms);
    const auto a = run_cascade(Variant::proposition, cost, ms, zero);
    const auto b = run_cascade(Variant::remark_b, cost, ms, zero);
    for (std::size_t i = 1; i <= ms.size(); ++i) EXPECT_TRUE(a.level(i).isApprox(b.level(i), 1e-14));
  }
}

TEST(CascadeTilde, CoincidesWithPropositionForTwoMarginals) {
  Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const auto ms = random_instance(rng, 2);
    const auto cost = random_table(rng, ProductGrid(ms).paths());
    const auto u = random_duals(rng, ms);
    const auto a = run_cascade(Variant::proposition, cost, ms, u);
    const auto b = run_cascade(Variant::remark_b, cost, ms, u);
    EXPECT_LT((a.level(1) - b.level(1)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(DualObjective, HandValuesAtZero) {
  const auto a = unique_coupling_instance();
  const auto b = three_quarter_instance();
  for (Variant v : kAll) {
    EXPECT_NEAR(dual_objective(v, CostSpec::squared_increment(), a, DualVariables::zeros(a)), 1.0, 1e-12);
    EXPECT_NEAR(dual_objective(v, CostSpec::squared_increment(), b, DualVariables::zeros(b)), 3.0, 1e-12);
  }
}

TEST(DualObjective, RejectsInfeasibleMarginals) {
  const MarginalSequence ms({two_point(-2, 2), two_point(-1, 1)});
  EXPECT_THROW(dual_objective(Variant::proposition, CostSpec::squared_increment(), ms, DualVariables::zeros(ms)),
               Error);
}

TEST(DualObjective, WeakDuality) {
  Rng rng(8);
  for (int trial = 0; trial < 40; ++trial) {
    const auto ms = random_instance(rng, 2 + trial % 2);
    const auto cost = random_named_cost(rng, ms).tabulate(ms);
    const double lo = solve_primal(cost, ms).value;
    const double hi = solve_primal_max(cost, ms).value;
    for (int s = 0; s < 5; ++s) {
      const auto u = random_duals(rng, ms, 2.0);
      EXPECT_LE(dual_objective(Variant::proposition, cost, ms, u), lo + 1e-8);
      EXPECT_LE(dual_objective(Variant::remark_b, cost, ms, u), lo + 1e-8);
      EXPECT_GE(dual_objective(Variant::remark_a, cost, ms, u), hi - 1e-8);
    }
  }
}

TEST(DualObjective, ShiftInvariance) {
  Rng rng(9);
  for (int trial = 0; trial < 40; ++trial) {
    const auto ms = random_instance(rng, 2 + trial % 2);
    const auto cost = random_named_cost(rng, ms).tabulate(ms);
    const auto u = random_duals(rng, ms);
    for (Variant v : kAll) {
      const double base = dual_objective(v, cost, ms, u);
      for (std::size_t k = 0; k < u.u.size(); ++k) {
        DualVariables shifted = u;
        shifted.u[k].values.array() += uniform(rng, -3, 3);
        EXPECT_NEAR(dual_objective(v, cost, ms, shifted), base, 1e-10);
        DualVariables affine = u;
        affine.u[k].values.array() += uniform(rng, -3, 3) + uniform(rng, -2, 2) * affine.u[k].grid.array();
        EXPECT_NEAR(dual_objective(v, cost, ms, affine), base, 1e-9);
      }
    }
  }
}

TEST(DualObjective, MonotoneInCost) {
  Rng rng(10);
  for (int trial = 0; trial < 40; ++trial) {
    const auto ms = random_instance(rng, 2 + trial % 2);
    const auto cost = random_table(rng, ProductGrid(ms).paths());
    const Eigen::VectorXd raised = cost + random_table(rng, cost.size()).cwiseAbs();
    const auto u = random_duals(rng, ms);
    EXPECT_GE(dual_objective(Variant::proposition, raised, ms, u),
              dual_objective(Variant::proposition, cost, ms, u) - 1e-12);
  }
}

TEST(DualObjective, ConcaveInU) {
  Rng rng(12);
  for (int trial = 0; trial < 40; ++trial) {
    const auto ms = random_instance(rng, 2 + trial % 2);
    const auto cost = random_named_cost(rng, ms).tabulate(ms);
    const auto u = random_duals(rng, ms);
    const auto w = random_duals(rng, ms);
    const double lambda = uniform(rng, 0.05, 0.95);
    const auto mid = combine(u, w, lambda);
    for (Variant v : kAll) {
      const double chord = lambda * dual_objective(v, cost, ms, u) + (1 - lambda) * dual_objective(v, cost, ms, w);
      const double at_mid = dual_objective(v, cost, ms, mid);
      if (is_upper(v)) {
        EXPECT_LE(at_mid, chord + 1e-9);
      } else {
        EXPECT_GE(at_mid, chord - 1e-9);
      }
    }
  }
}

TEST(DualSubgradient, SupergradientInequality) {
  Rng rng(13);
  for (int trial = 0; trial < 40; ++trial) {
    const auto ms = random_instance(rng, 2 + trial % 2);
    const auto cost = random_named_cost(rng, ms).tabulate(ms);
    const auto u = random_duals(rng, ms);
    for (Variant v : kAll) {
      const auto eval = evaluate_dual(v, cost, ms, u);
      EXPECT_NEAR(eval.value, dual_objective(v, cost, ms, u), 1e-12);
      const auto w = random_duals(rng, ms);
      double linear = eval.value;
      for (std::size_t k = 0; k < u.u.size(); ++k) linear += eval.gradient[k].dot(w.u[k].values - u.u[k].values);
      const double fw = dual_objective(v, cost, ms, w);
      if (is_upper(v)) {
        EXPECT_GE(fw, linear - 1e-8);
      } else {
        EXPECT_LE(fw, linear + 1e-8);
      }
    }
  }
}

TEST(DualSubgradient, MatchesFiniteDifferences) {
  Rng rng(14);
  for (int trial = 0; trial < 10; ++trial) {
    const auto ms = random_instance(rng, 2 + trial % 2);
    const auto cost = random_table(rng, ProductGrid(ms).paths());
    const auto u = random_duals(rng, ms);
    for (Variant v : kAll) {
      const auto g = dual_subgradient(v, cost, ms, u);
      for (std::size_t k = 0; k < u.u.size(); ++k) {
        for (Eigen::Index a = 0; a < u.u[k].size(); ++a) {
          const double fd = central_difference(
              [&](double h) {
                DualVariables p = u;
                p.u[k].values(a) += h;
                return dual_objective(v, cost, ms, p);
              },
              1e-6);
          EXPECT_NEAR(g[k](a), fd, 1e-4);
        }
      }
    }
  }
}

TEST(DualSubgradient, SumsToZero) {
  Rng rng(15);
  const auto ms = random_instance(rng, 3);
  const auto cost = random_named_cost(rng, ms).tabulate(ms);
  const auto g = dual_subgradient(Variant::proposition, cost, ms, random_duals(rng, ms));
  for (const auto& gk : g) EXPECT_NEAR(gk.sum(), 0.0, 1e-12);
}

TEST(ProjectZeroMean, KeepsObjective) {
  Rng rng(16);
  for (int trial = 0; trial < 20; ++trial) {
    const auto ms = random_instance(rng, 3);
    const auto cost = random_named_cost(rng, ms).tabulate(ms);
    auto u = random_duals(rng, ms, 3.0);
    const double before = dual_objective(Variant::proposition, cost, ms, u);
    project_zero_mean(u, ms);
    for (std::size_t k = 0; k < u.u.size(); ++k) EXPECT_NEAR(ms[k + 1].weights().dot(u.u[k].values), 0.0, 1e-14);
    EXPECT_NEAR(dual_objective(Variant::proposition, cost, ms, u), before, 1e-10);
  }
}

TEST(Subhedge, UniqueCouplingIsTight) {
  const auto ms = unique_coupling_instance();
  const auto cost = CostSpec::squared_increment().tabulate(ms);
  const Coupling q{Eigen::VectorXd::Constant(2, 0.5)};
  const auto r = verify_subhedge(cost, ms, DualVariables::zeros(ms), q);
  ASSERT_EQ(r.entries.size(), 1u);
  EXPECT_NEAR(r.entries[0].slack, 0.0, 1e-15);
  EXPECT_NEAR(r.entries[0].payoff, 1.0, 1e-15);
  EXPECT_TRUE(r.ok);
}

TEST(Subhedge, HoldsUnderOptimalCoupling) {
  Rng rng(18);
  for (int trial = 0; trial < 30; ++trial) {
    const auto ms = random_instance(rng, 2 + trial % 2);
    const auto cost = random_named_cost(rng, ms).tabulate(ms);
    const auto lo = solve_primal(cost, ms);
    const auto hi = solve_primal_max(cost, ms);
    const auto u = random_duals(rng, ms);
    EXPECT_TRUE(verify_subhedge(cost, ms, DualVariables::zeros(ms), lo.coupling).ok);
    EXPECT_TRUE(verify_subhedge(cost, ms, u, lo.coupling, Variant::proposition).ok);
    EXPECT_TRUE(verify_subhedge(cost, ms, u, lo.coupling, Variant::remark_b).ok);
    EXPECT_TRUE(verify_subhedge(cost, ms, u, hi.coupling, Variant::remark_a).ok);
    EXPECT_GE(verify_subhedge(cost, ms, u, lo.coupling).min_slack, -1e-9);
  }
}

TEST(Subhedge, RejectsNonMartingaleCoupling) {
  const auto ms = three_quarter_instance();
  const auto cost = CostSpec::squared_increment().tabulate(ms);
  EXPECT_THROW(verify_subhedge(cost, ms, DualVariables::zeros(ms), Coupling{Eigen::VectorXd::Constant(4, 0.25)}),
               InvalidArgument);
}

TEST(Variant, Names) {
  for (Variant v : kAll) EXPECT_EQ(variant_from_string(to_string(v)), v);
  EXPECT_FALSE(variant_from_string("tilde").has_value());
}
