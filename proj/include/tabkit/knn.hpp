#pragma once

#include <span>

#include "tabkit/matrix.hpp"
#include "tabkit/preprocess.hpp"

namespace tabkit {

enum class KnnWeights { Uniform, Distance };
enum class KnnMetric { Euclidean, Manhattan };

struct KnnParams {
  std::size_t k = 5;
  KnnWeights weights = KnnWeights::Uniform;
  KnnMetric metric = KnnMetric::Euclidean;
};

struct KnnModel {
  Matrix x;
  Labels y;
  KnnParams params;

  /// Weighted fraction of positive neighbors. Under distance weighting, any
  /// neighbor at distance exactly 0 takes all the weight (split evenly among
  /// such neighbors).
  double score(std::span<const double> x) const;
  /// Uniform: majority; a tied vote goes to the class with the smaller
  /// summed neighbor distance, then to class 0. Distance: weighted majority,
  /// ties to class 0.
  int predict(std::span<const double> x) const;
};

double knn_distance(std::span<const double> a, std::span<const double> b, KnnMetric metric);

/// Stores the training set. Throws EmptyInput, DimensionMismatch or
/// InvalidParameter (k = 0 or k > n).
KnnModel knn_fit(const Matrix& x, const Labels& y, const KnnParams& params);

}  // namespace tabkit
