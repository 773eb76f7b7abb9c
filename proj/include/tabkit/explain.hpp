#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "tabkit/matrix.hpp"

namespace tabkit {

/// Real-valued model output to be explained.
using ModelFn = std::function<double(std::span<const double>)>;

/// Additive attribution of one instance: base_value + sum(values) = output.
struct ShapExplanation {
  double base_value = 0.0;  ///< mean model output over the background
  std::vector<double> values;
  double output = 0.0;      ///< model output on the instance
  std::size_t n_permutations = 0;  ///< 0 for exact enumeration
};

/// Largest feature count accepted by shap_exact.
inline constexpr std::size_t kMaxExactFeatures = 12;

/// Interventional value function v(S) = mean_b f(x on S, b elsewhere) and
/// the exact Shapley weights over all 2^p subsets.
/// Throws TooManyFeatures, EmptyBackground, DimensionMismatch.
ShapExplanation shap_exact(const ModelFn& f, const Matrix& background, std::span<const double> x);

/// Permutation estimator with the same value function. Permutation q uses
/// stream q of `seed`; totals are summed in permutation order, so the result
/// does not depend on `threads`. Throws EmptyBackground, DimensionMismatch,
/// InvalidParameter (n_permutations = 0).
ShapExplanation shap_sample(const ModelFn& f, const Matrix& background, std::span<const double> x,
                            std::size_t n_permutations, std::uint64_t seed, unsigned threads = 1);

struct ShapSummaryEntry {
  std::size_t feature = 0;
  double mean_abs = 0.0;
};

/// Features by descending mean |phi|, ties by feature index.
struct ShapSummary {
  std::vector<ShapSummaryEntry> entries;
  std::size_t n_instances = 0;
};

/// Mean |phi| over the rows of `instances`. n_permutations = 0 selects
/// exact enumeration; instance i otherwise samples with stream i of `seed`.
/// Throws EmptyInput plus the errors of the underlying method.
ShapSummary shap_summary(const ModelFn& f, const Matrix& background, const Matrix& instances,
                         std::size_t n_permutations, std::uint64_t seed, unsigned threads = 1);

/// Up to max_rows distinct rows drawn without replacement, kept in their
/// original order. All rows when the matrix is small enough.
Matrix sample_rows(const Matrix& x, std::size_t max_rows, std::uint64_t seed);

}  // namespace tabkit
