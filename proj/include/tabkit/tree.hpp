#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "tabkit/matrix.hpp"
#include "tabkit/preprocess.hpp"
#include "tabkit/rng.hpp"

namespace tabkit {

/// Node impurity criterion. Entropy uses log base 2; LogLoss is entropy with
/// the natural log, so both choose identical splits.
enum class Criterion { Gini, Entropy, LogLoss };
enum class Splitter { Best, Random };
enum class MaxFeatures { All, Sqrt, Log2 };
enum class ClassWeight { None, Balanced };

struct TreeParams {
  Criterion criterion = Criterion::Gini;
  std::optional<std::size_t> max_depth;  ///< unlimited when empty
  std::size_t min_samples_split = 2;
  std::size_t min_samples_leaf = 1;
  MaxFeatures max_features = MaxFeatures::All;
  std::optional<std::size_t> max_leaf_nodes;  ///< best-first growth when set
  double min_impurity_decrease = 0.0;
  Splitter splitter = Splitter::Best;
  ClassWeight class_weight = ClassWeight::None;
  double ccp_alpha = 0.0;
  std::uint64_t seed = 0;
};

struct TreeNode {
  int feature = -1;  ///< -1 for a leaf
  double threshold = 0.0;  ///< rows with x[feature] <= threshold go left
  int left = -1;
  int right = -1;
  double impurity = 0.0;
  std::array<double, 2> value{};          ///< class-weighted totals
  std::array<std::size_t, 2> counts{};    ///< training rows per class
  /// Weighted impurity decrease of this node's split:
  /// (W_t * imp_t - W_l * imp_l - W_r * imp_r) / W_root.
  double impurity_decrease = 0.0;

  bool is_leaf() const noexcept { return feature < 0; }
  std::size_t n_samples() const noexcept { return counts[0] + counts[1]; }
};

struct TreeModel {
  TreeParams params;
  std::size_t n_features = 0;
  std::vector<TreeNode> nodes;  ///< nodes[0] is the root

  const TreeNode& leaf_for(std::span<const double> x) const;
  /// Positive-class weighted fraction at the leaf.
  double score(std::span<const double> x) const;
  int predict(std::span<const double> x) const { return score(x) > 0.5 ? 1 : 0; }
  std::size_t leaf_count() const;
  std::size_t depth() const;
};

/// Column-major copy of a training set plus every feature's row order sorted
/// by value. Building it once lets many trees share the sort.
class TreeData {
 public:
  TreeData(const Matrix& x, const Labels& y);

  std::size_t n_rows() const noexcept { return y_.size(); }
  std::size_t n_features() const noexcept { return n_features_; }
  const double* column(std::size_t f) const noexcept { return cols_.data() + f * n_rows(); }
  const Labels& labels() const noexcept { return y_; }
  std::span<const std::uint32_t> sorted(std::size_t f) const noexcept {
    return {order_.data() + f * n_rows(), n_rows()};
  }

 private:
  std::size_t n_features_ = 0;
  std::vector<double> cols_;
  Labels y_;
  std::vector<std::uint32_t> order_;
};

double node_impurity(Criterion criterion, double w0, double w1);

/// Per-class weights: 1 for None, n / (2 n_c) for Balanced.
std::array<double, 2> class_weights(const Labels& y, ClassWeight weighting);

/// Number of candidate features per node for `p` features.
std::size_t resolve_max_features(MaxFeatures rule, std::size_t p);

/// Greedy CART growth followed by minimal cost-complexity pruning.
/// Throws EmptyInput or DimensionMismatch.
TreeModel tree_fit(const Matrix& x, const Labels& y, const TreeParams& params);
TreeModel tree_fit(const TreeData& data, const TreeParams& params);

/// Growth with per-row multiplicities (0 excludes a row) and explicit class
/// weights; the forest calls this with bootstrap counts. Pruning is applied.
TreeModel tree_fit_weighted(const TreeData& data, std::span<const double> multiplicity,
                            const std::array<double, 2>& weights, const TreeParams& params, SplitMix64& rng);

/// Repeatedly collapses the weakest link while its effective alpha is
/// <= alpha. alpha = 0 leaves the tree unchanged.
TreeModel prune_cost_complexity(TreeModel tree, double alpha);

}  // namespace tabkit
