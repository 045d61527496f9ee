#include "mot/primal.hpp"

#include "mot/errors.hpp"
#include "mot/product_grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

namespace mot {

LinearProgram assemble_lp(const Eigen::VectorXd& cost, const MarginalSequence& ms,
                          const PrimalOptions& options) {
  const ProductGrid grid(ms);
  const std::size_t n = ms.size();
  const Eigen::Index paths = grid.paths();
  if (cost.size() != paths) throw ShapeMismatch("cost tensor does not match the product grid");
  if (paths > options.max_variables) {
    throw CapExceeded("product grid has " + std::to_string(paths) +
                      " paths, above the LP variable cap of " +
                      std::to_string(options.max_variables));
  }

  LinearProgram lp;
  Eigen::Index rows = 0;
  for (std::size_t i = 0; i < n; ++i) {
    lp.marginal_offset.push_back(rows);
    rows += grid.dim(i);
  }
  for (std::size_t i = 0; i + 1 < n; ++i) {
    lp.martingale_offset.push_back(rows);
    rows += grid.level_size(i + 1);
  }
  if (rows * (paths + rows + 1) > options.max_tableau_entries) {
    throw CapExceeded("LP with " + std::to_string(rows) + " rows and " + std::to_string(paths) +
                      " columns exceeds the tableau cap of " +
                      std::to_string(options.max_tableau_entries) + " entries");
  }

  lp.A = Eigen::MatrixXd::Zero(rows, paths);
  lp.b = Eigen::VectorXd::Zero(rows);
  lp.c = cost;
  for (std::size_t i = 0; i < n; ++i) {
    lp.b.segment(lp.marginal_offset[i], grid.dim(i)) = ms[i].weights();
  }

  std::vector<Eigen::Index> idx;
  for (Eigen::Index p = 0; p < paths; ++p) {
    grid.unravel(p, idx);
    for (std::size_t i = 0; i < n; ++i) lp.A(lp.marginal_offset[i] + idx[i], p) = 1.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const Eigen::Index prefix = p / (paths / grid.level_size(i + 1));
      lp.A(lp.martingale_offset[i] + prefix, p) =
          ms[i + 1].atoms()(idx[i + 1]) - ms[i].atoms()(idx[i]);
    }
  }
  return lp;
}

LinearProgram assemble_lp(const CostSpec& cost, const MarginalSequence& ms,
                          const PrimalOptions& options) {
  return assemble_lp(cost.tabulate(ms), ms, options);
}

namespace {

PrimalSolution solve(const LinearProgram& lp, const Eigen::VectorXd& objective,
                     const Eigen::VectorXd& cost, const PrimalOptions& options) {
  const LpResult r = solve_lp(lp.A, lp.b, objective, options.simplex);
  PrimalSolution s;
  s.status = r.status;
  s.stats = {lp.rows(), lp.cols(), r.pivots, r.redundant_rows};
  if (r.status == LpStatus::optimal) {
    s.coupling.q = r.x;
    s.value = cost.dot(r.x);
    s.duals = r.y;
  }
  return s;
}

}  // namespace

PrimalSolution solve_primal(const Eigen::VectorXd& cost, const MarginalSequence& ms,
                            const PrimalOptions& options) {
  const LinearProgram lp = assemble_lp(cost, ms, options);
  return solve(lp, lp.c, cost, options);
}

PrimalSolution solve_primal(const CostSpec& cost, const MarginalSequence& ms,
                            const PrimalOptions& options) {
  return solve_primal(cost.tabulate(ms), ms, options);
}

PrimalSolution solve_primal_max(const Eigen::VectorXd& cost, const MarginalSequence& ms,
                                const PrimalOptions& options) {
  const LinearProgram lp = assemble_lp(cost, ms, options);
  return solve(lp, -lp.c, cost, options);
}

PrimalSolution solve_primal_max(const CostSpec& cost, const MarginalSequence& ms,
                                const PrimalOptions& options) {
  return solve_primal_max(cost.tabulate(ms), ms, options);
}

namespace {

// Enumerates vertices through their supports: a vertex is the unique
// solution on a set of linearly independent columns with all entries > 0.
// Supports are grown one column at a time; each node branches on the
// available columns of the most constrained row whose sign pattern the
// chosen columns cannot yet satisfy, excluding earlier candidates so that
// every support is reached once. A support whose span contains b ends its
// branch, since any larger independent set would carry zero entries.
class VertexEnumerator {
 public:
  VertexEnumerator(const LinearProgram& lp, std::int64_t budget)
      : lp_(lp), budget_(budget), tol_(1e-9 * std::max(1.0, lp.b.norm())) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(lp.A);
    qr.setThreshold(1e-10);
    rank_ = qr.rank();
    basis_ = Eigen::MatrixXd::Zero(lp.rows(), rank_);
    state_.assign(static_cast<std::size_t>(lp.cols()), kAvailable);
    row_cols_.resize(static_cast<std::size_t>(lp.rows()));
    col_rows_.resize(static_cast<std::size_t>(lp.cols()));
    for (Eigen::Index j = 0; j < lp.cols(); ++j) {
      for (Eigen::Index r = 0; r < lp.rows(); ++r) {
        if (lp.A(r, j) != 0.0) {
          row_cols_[static_cast<std::size_t>(r)].push_back(j);
          col_rows_[static_cast<std::size_t>(j)].push_back(r);
        }
      }
    }
    positive_.assign(static_cast<std::size_t>(lp.rows()), 0);
    negative_.assign(static_cast<std::size_t>(lp.rows()), 0);
  }

  double run() {
    if (rank_ == 0) {
      if (lp_.b.cwiseAbs().maxCoeff() <= 1e-9) best_ = 0.0;
    } else {
      recurse(lp_.b);
    }
    if (!std::isfinite(best_)) throw InvalidArgument("no feasible vertex: instance is infeasible");
    return best_;
  }

 private:
  static constexpr char kAvailable = 0, kChosen = 1, kExcluded = 2;

  // +1 / -1 when the chosen columns need a positive / negative entry in row r.
  int needed_sign(std::size_t r) const {
    const double b = lp_.b(static_cast<Eigen::Index>(r));
    const bool pos = positive_[r] > 0, neg = negative_[r] > 0;
    if (b > 0.0) return pos ? 0 : 1;
    if (b < 0.0) return neg ? 0 : -1;
    if (pos && !neg) return -1;
    if (neg && !pos) return 1;
    return 0;
  }

  void toggle(Eigen::Index j, int delta) {
    for (Eigen::Index r : col_rows_[static_cast<std::size_t>(j)]) {
      if (lp_.A(r, j) > 0.0) {
        positive_[static_cast<std::size_t>(r)] += delta;
      } else {
        negative_[static_cast<std::size_t>(r)] += delta;
      }
    }
  }

  void recurse(const Eigen::VectorXd& residual) {
    if (++visited_ > budget_) {
      throw CapExceeded("vertex enumeration exceeded " + std::to_string(budget_) + " nodes");
    }
    if (residual.norm() <= tol_) {
      evaluate();
      return;
    }
    if (static_cast<Eigen::Index>(chosen_.size()) == rank_) return;

    std::size_t row = row_cols_.size();
    int sign = 0;
    std::size_t fewest = std::numeric_limits<std::size_t>::max();
    for (std::size_t r = 0; r < row_cols_.size(); ++r) {
      const int need = needed_sign(r);
      if (need == 0) continue;
      std::size_t count = 0;
      for (Eigen::Index j : row_cols_[r]) {
        if (state_[static_cast<std::size_t>(j)] == kAvailable && lp_.A(static_cast<Eigen::Index>(r), j) * need > 0.0) {
          ++count;
        }
      }
      if (count == 0) return;
      if (count < fewest) {
        fewest = count;
        row = r;
        sign = need;
      }
    }

    std::vector<Eigen::Index> candidates;
    if (row < row_cols_.size()) {
      for (Eigen::Index j : row_cols_[row]) {
        if (state_[static_cast<std::size_t>(j)] == kAvailable && lp_.A(static_cast<Eigen::Index>(row), j) * sign > 0.0) {
          candidates.push_back(j);
        }
      }
    } else {
      for (Eigen::Index j = 0; j < lp_.cols(); ++j) {
        if (state_[static_cast<std::size_t>(j)] == kAvailable) candidates.push_back(j);
      }
    }

    const auto depth = static_cast<Eigen::Index>(chosen_.size());
    for (Eigen::Index j : candidates) {
      Eigen::VectorXd v = lp_.A.col(j);
      const double norm = v.norm();
      for (int pass = 0; pass < 2; ++pass) {
        for (Eigen::Index k = 0; k < depth; ++k) v -= basis_.col(k).dot(v) * basis_.col(k);
      }
      const double rest = v.norm();
      if (rest > 1e-9 * norm) {
        basis_.col(depth) = v / rest;
        chosen_.push_back(j);
        state_[static_cast<std::size_t>(j)] = kChosen;
        toggle(j, 1);
        recurse(residual - basis_.col(depth).dot(residual) * basis_.col(depth));
        toggle(j, -1);
        chosen_.pop_back();
      }
      state_[static_cast<std::size_t>(j)] = kExcluded;
    }
    for (Eigen::Index j : candidates) state_[static_cast<std::size_t>(j)] = kAvailable;
  }

  void evaluate() {
    const auto size = static_cast<Eigen::Index>(chosen_.size());
    Eigen::MatrixXd sub(lp_.rows(), size);
    for (Eigen::Index k = 0; k < size; ++k) sub.col(k) = lp_.A.col(chosen_[static_cast<std::size_t>(k)]);
    const Eigen::VectorXd x = sub.colPivHouseholderQr().solve(lp_.b);
    if ((sub * x - lp_.b).norm() > tol_) return;
    if (!(x.minCoeff() > 0.0)) return;
    double value = 0.0;
    for (Eigen::Index k = 0; k < size; ++k) value += lp_.c(chosen_[static_cast<std::size_t>(k)]) * x(k);
    best_ = std::min(best_, value);
  }

  const LinearProgram& lp_;
  std::int64_t budget_;
  std::int64_t visited_ = 0;
  double tol_;
  Eigen::Index rank_ = 0;
  Eigen::MatrixXd basis_;
  std::vector<Eigen::Index> chosen_;
  std::vector<char> state_;
  std::vector<std::vector<Eigen::Index>> row_cols_;
  std::vector<std::vector<Eigen::Index>> col_rows_;
  std::vector<int> positive_;
  std::vector<int> negative_;
  double best_ = std::numeric_limits<double>::infinity();
};

}  // namespace

double brute_force_value(const Eigen::VectorXd& cost, const MarginalSequence& ms,
                         std::int64_t max_nodes) {
  const Eigen::Index paths = ProductGrid(ms).paths();
  if (paths > kBruteForceMaxPaths) {
    throw CapExceeded("brute force is limited to " + std::to_string(kBruteForceMaxPaths) +
                      " paths, instance has " + std::to_string(paths));
  }
  const LinearProgram lp = assemble_lp(cost, ms);
  return VertexEnumerator(lp, max_nodes).run();
}

Eigen::VectorXd semistatic_payoff(const SemistaticStrategy& s, const MarginalSequence& ms) {
  const ProductGrid grid(ms);
  const std::size_t n = ms.size();
  if (s.u.size() != n || s.deltas.size() + 1 != n) {
    throw ShapeMismatch("semi-static strategy needs n static and n-1 dynamic tables");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (s.u[i].size() != grid.dim(i)) throw ShapeMismatch("static table size mismatch");
  }
  for (std::size_t j = 0; j + 1 < n; ++j) {
    if (s.deltas[j].size() != grid.level_size(j + 1)) {
      throw ShapeMismatch("dynamic table size mismatch");
    }
  }

  Eigen::VectorXd psi(grid.paths());
  std::vector<Eigen::Index> idx;
  for (Eigen::Index p = 0; p < grid.paths(); ++p) {
    grid.unravel(p, idx);
    double v = 0.0;
    for (std::size_t i = 0; i < n; ++i) v += s.u[i](idx[i]);
    for (std::size_t j = 0; j + 1 < n; ++j) {
      const Eigen::Index prefix = p / (grid.paths() / grid.level_size(j + 1));
      v += s.deltas[j](prefix) * (ms[j + 1].atoms()(idx[j + 1]) - ms[j].atoms()(idx[j]));
    }
    psi(p) = v;
  }
  return psi;
}

double semistatic_value_check(const Eigen::VectorXd& cost, const MarginalSequence& ms,
                              const SemistaticStrategy& s) {
  const Eigen::VectorXd psi = semistatic_payoff(s, ms);
  if (psi.size() != cost.size()) throw ShapeMismatch("cost tensor does not match the grid");
  const double violation = (psi - cost).maxCoeff();
  if (violation > 1e-9) {
    throw InvalidArgument("semi-static payoff exceeds the cost by " + std::to_string(violation));
  }
  double value = 0.0;
  for (std::size_t i = 0; i < ms.size(); ++i) value += ms[i].weights().dot(s.u[i]);
  return value;
}

SemistaticStrategy semistatic_from_duals(const LinearProgram& lp, const Eigen::VectorXd& duals,
                                         const MarginalSequence& ms) {
  if (duals.size() != lp.rows()) throw ShapeMismatch("dual vector does not match the LP rows");
  const ProductGrid grid(ms);
  SemistaticStrategy s;
  for (std::size_t i = 0; i < ms.size(); ++i) {
    s.u.push_back(duals.segment(lp.marginal_offset[i], grid.dim(i)));
  }
  for (std::size_t j = 0; j + 1 < ms.size(); ++j) {
    s.deltas.push_back(duals.segment(lp.martingale_offset[j], grid.level_size(j + 1)));
  }
  return s;
}

}  // namespace mot
