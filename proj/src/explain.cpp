#include "tabkit/explain.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include "tabkit/error.hpp"
#include "tabkit/parallel.hpp"
#include "tabkit/rng.hpp"

namespace tabkit {
namespace {

void check_inputs(const Matrix& background, std::span<const double> x) {
  if (background.rows() == 0) throw_usage("EmptyBackground", "background sample has no rows");
  if (background.cols() != x.size()) throw_usage("DimensionMismatch", "instance width differs from background");
}

// Mean model output with x on the features flagged in `on`.
double value_of(const ModelFn& f, const Matrix& background, std::span<const double> x,
                const std::vector<char>& on, std::vector<double>& scratch) {
  double total = 0.0;
  for (std::size_t b = 0; b < background.rows(); ++b) {
    auto row = background.row(b);
    for (std::size_t j = 0; j < x.size(); ++j) scratch[j] = on[j] ? x[j] : row[j];
    total += f(scratch);
  }
  return total / static_cast<double>(background.rows());
}

}  // namespace

ShapExplanation shap_exact(const ModelFn& f, const Matrix& background, std::span<const double> x) {
  check_inputs(background, x);
  const std::size_t p = x.size();
  if (p > kMaxExactFeatures)
    throw_usage("TooManyFeatures", std::to_string(p) + " features exceed the exact limit of " +
                                       std::to_string(kMaxExactFeatures));
  const std::size_t subsets = std::size_t{1} << p;
  std::vector<double> v(subsets);
  std::vector<char> on(p);
  std::vector<double> scratch(p);
  for (std::size_t s = 0; s < subsets; ++s) {
    for (std::size_t j = 0; j < p; ++j) on[j] = (s >> j) & 1u;
    v[s] = value_of(f, background, x, on, scratch);
  }
  // weight[k] = k! (p-k-1)! / p!
  std::vector<double> weight(p);
  for (std::size_t k = 0; k < p; ++k)
    weight[k] = std::exp(std::lgamma(static_cast<double>(k + 1)) + std::lgamma(static_cast<double>(p - k)) -
                         std::lgamma(static_cast<double>(p + 1)));
  ShapExplanation e;
  e.values.assign(p, 0.0);
  for (std::size_t s = 0; s < subsets; ++s) {
    const auto k = static_cast<std::size_t>(std::popcount(s));
    for (std::size_t j = 0; j < p; ++j)
      if (!((s >> j) & 1u)) e.values[j] += weight[k] * (v[s | (std::size_t{1} << j)] - v[s]);
  }
  e.base_value = v[0];
  e.output = v[subsets - 1];
  return e;
}

ShapExplanation shap_sample(const ModelFn& f, const Matrix& background, std::span<const double> x,
                            std::size_t n_permutations, std::uint64_t seed, unsigned threads) {
  check_inputs(background, x);
  if (n_permutations == 0) throw_usage("InvalidParameter", "n_permutations must be >= 1");
  const std::size_t p = x.size();
  std::vector<std::vector<double>> per(n_permutations);
  std::vector<double> base(n_permutations), top(n_permutations);
  parallel_for(n_permutations, threads, [&](std::size_t q) {
    SplitMix64 rng(stream_seed(seed, q));
    std::vector<std::size_t> order(p);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(std::span<std::size_t>(order));
    std::vector<char> on(p, 0);
    std::vector<double> scratch(p), phi(p, 0.0);
    double prev = value_of(f, background, x, on, scratch);
    base[q] = prev;
    for (auto j : order) {
      on[j] = 1;
      const double cur = value_of(f, background, x, on, scratch);
      phi[j] = cur - prev;
      prev = cur;
    }
    top[q] = prev;
    per[q] = std::move(phi);
  });
  ShapExplanation e;
  e.values.assign(p, 0.0);
  for (std::size_t q = 0; q < n_permutations; ++q)
    for (std::size_t j = 0; j < p; ++j) e.values[j] += per[q][j];
  for (double& v : e.values) v /= static_cast<double>(n_permutations);
  // Every permutation starts and ends at the same two values.
  e.base_value = base[0];
  e.output = top[0];
  e.n_permutations = n_permutations;
  return e;
}

ShapSummary shap_summary(const ModelFn& f, const Matrix& background, const Matrix& instances,
                         std::size_t n_permutations, std::uint64_t seed, unsigned threads) {
  if (instances.rows() == 0) throw_usage("EmptyInput", "no instances to explain");
  const std::size_t p = instances.cols();
  std::vector<double> total(p, 0.0);
  for (std::size_t i = 0; i < instances.rows(); ++i) {
    const auto e = n_permutations == 0
                       ? shap_exact(f, background, instances.row(i))
                       : shap_sample(f, background, instances.row(i), n_permutations, stream_seed(seed, i), threads);
    for (std::size_t j = 0; j < p; ++j) total[j] += std::abs(e.values[j]);
  }
  ShapSummary s;
  s.n_instances = instances.rows();
  for (std::size_t j = 0; j < p; ++j) s.entries.push_back({j, total[j] / static_cast<double>(instances.rows())});
  std::stable_sort(s.entries.begin(), s.entries.end(),
                   [](const ShapSummaryEntry& a, const ShapSummaryEntry& b) { return a.mean_abs > b.mean_abs; });
  return s;
}

Matrix sample_rows(const Matrix& x, std::size_t max_rows, std::uint64_t seed) {
  if (x.rows() <= max_rows) return x;
  std::vector<std::size_t> idx(x.rows());
  std::iota(idx.begin(), idx.end(), 0);
  SplitMix64 rng(seed);
  rng.shuffle(std::span<std::size_t>(idx));
  idx.resize(max_rows);
  std::sort(idx.begin(), idx.end());
  return x.select_rows(idx);
}

}  // namespace tabkit
