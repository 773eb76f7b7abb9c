#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "tabkit/tree.hpp"

namespace tabkit {

struct ForestParams {
  std::size_t n_estimators = 100;
  std::optional<std::size_t> max_depth;
  std::size_t min_samples_split = 2;
  std::size_t min_samples_leaf = 1;
  MaxFeatures max_features = MaxFeatures::Sqrt;
  bool bootstrap = true;
  Criterion criterion = Criterion::Gini;
  ClassWeight class_weight = ClassWeight::None;
  std::uint64_t seed = 21;
  unsigned threads = 1;
};

struct ForestModel {
  std::vector<TreeModel> trees;
  bool bootstrap = true;
  MaxFeatures max_features = MaxFeatures::Sqrt;
  std::uint64_t seed = 21;

  /// Fraction of trees voting for class 1.
  double score(std::span<const double> x) const;
  /// Majority vote; an even split goes to class 0.
  int predict(std::span<const double> x) const;
};

/// Tree m draws from stream m of the seed: bootstrap counts first (when
/// enabled), then feature subsampling. Class weights are computed once from
/// the full training labels. Throws EmptyInput.
ForestModel forest_fit(const Matrix& x, const Labels& y, const ForestParams& params);
ForestModel forest_fit(const TreeData& data, const ForestParams& params);

}  // namespace tabkit
