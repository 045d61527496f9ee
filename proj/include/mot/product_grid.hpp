#ifndef MOT_PRODUCT_GRID_HPP
#define MOT_PRODUCT_GRID_HPP

#include "mot/measures.hpp"

#include <Eigen/Dense>

#include <vector>

namespace mot {

/// Row-major indexing of supp mu_1 x ... x supp mu_i, last coordinate
/// fastest. A level-i prefix p extended by atom a of mu_{i+1} has flat
/// index p * |mu_{i+1}| + a, so every one-dimensional section is contiguous.
class ProductGrid {
 public:
  explicit ProductGrid(std::vector<Eigen::Index> shape) : shape_(std::move(shape)) {
    level_size_.assign(shape_.size() + 1, 1);
    for (std::size_t i = 0; i < shape_.size(); ++i) {
      level_size_[i + 1] = level_size_[i] * shape_[i];
    }
  }
  explicit ProductGrid(const MarginalSequence& ms) : ProductGrid(ms.shape()) {}

  std::size_t arity() const { return shape_.size(); }
  const std::vector<Eigen::Index>& shape() const { return shape_; }
  Eigen::Index dim(std::size_t i) const { return shape_[i]; }

  /// Number of prefixes of length i (level 0 has a single empty prefix).
  Eigen::Index level_size(std::size_t i) const { return level_size_[i]; }
  Eigen::Index paths() const { return level_size_.back(); }

  /// Atom index of coordinate k (zero-based) for a flat index at level i > k.
  Eigen::Index coordinate(Eigen::Index flat, std::size_t level, std::size_t k) const {
    return (flat / (level_size_[level] / level_size_[k + 1])) % shape_[k];
  }

  /// All coordinates of a full path.
  void unravel(Eigen::Index flat, std::vector<Eigen::Index>& out) const {
    out.resize(shape_.size());
    for (std::size_t k = shape_.size(); k-- > 0;) {
      out[k] = flat % shape_[k];
      flat /= shape_[k];
    }
  }

 private:
  std::vector<Eigen::Index> shape_;
  std::vector<Eigen::Index> level_size_;
};

}  // namespace mot

#endif  // MOT_PRODUCT_GRID_HPP
