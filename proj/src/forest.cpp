#include "tabkit/forest.hpp"

#include "tabkit/error.hpp"
#include "tabkit/parallel.hpp"

namespace tabkit {

double ForestModel::score(std::span<const double> x) const {
  std::size_t votes = 0;
  for (const auto& t : trees) votes += static_cast<std::size_t>(t.predict(x));
  return trees.empty() ? 0.0 : static_cast<double>(votes) / static_cast<double>(trees.size());
}

int ForestModel::predict(std::span<const double> x) const {
  std::size_t votes = 0;
  for (const auto& t : trees) votes += static_cast<std::size_t>(t.predict(x));
  return 2 * votes > trees.size() ? 1 : 0;
}

ForestModel forest_fit(const TreeData& data, const ForestParams& params) {
  if (data.n_rows() == 0) throw_usage("EmptyInput", "no training rows");
  if (params.n_estimators == 0) throw_usage("InvalidParameter", "n_estimators must be >= 1");
  TreeParams tp;
  tp.criterion = params.criterion;
  tp.max_depth = params.max_depth;
  tp.min_samples_split = params.min_samples_split;
  tp.min_samples_leaf = params.min_samples_leaf;
  tp.max_features = params.max_features;
  tp.class_weight = params.class_weight;
  const auto weights = class_weights(data.labels(), params.class_weight);

  ForestModel model;
  model.bootstrap = params.bootstrap;
  model.max_features = params.max_features;
  model.seed = params.seed;
  model.trees.resize(params.n_estimators);
  const std::size_t n = data.n_rows();
  parallel_for(params.n_estimators, params.threads, [&](std::size_t m) {
    SplitMix64 rng(stream_seed(params.seed, m));
    std::vector<double> counts;
    if (params.bootstrap) {
      counts.assign(n, 0.0);
      for (std::size_t i = 0; i < n; ++i) counts[static_cast<std::size_t>(rng.below(n))] += 1.0;
    }
    TreeParams local = tp;
    local.seed = stream_seed(params.seed, m);
    model.trees[m] = tree_fit_weighted(data, counts, weights, local, rng);
  });
  return model;
}

ForestModel forest_fit(const Matrix& x, const Labels& y, const ForestParams& params) {
  if (x.rows() == 0) throw_usage("EmptyInput", "no training rows");
  return forest_fit(TreeData(x, y), params);
}

}  // namespace tabkit
