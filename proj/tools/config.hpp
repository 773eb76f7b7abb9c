#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tabkit/classifier.hpp"
#include "tabkit/modelsel.hpp"
#include "tabkit/preprocess.hpp"

namespace tabkit::app {

/// Everything a pipeline run depends on. Keys of the config file match the
/// field names; see README for the full list.
struct RunConfig {
  std::string pipeline = "both";  ///< segmentation | prediction | both
  std::uint64_t seed = 42;
  std::string out = "out";
  unsigned threads = 1;
  bool strict = false;
  bool svg = true;

  // Segmentation branch. An empty input path means gen_social output.
  std::string social_input;
  std::size_t social_n = 1000;
  std::uint64_t social_seed = 7;
  std::vector<std::string> social_drop;  ///< columns ignored (ids)
  std::vector<std::string> cap_columns;  ///< IQR-capped numeric columns
  double iqr_k = 1.5;
  bool cap_before_scaling = true;        ///< false: fences computed on standardized values
  bool drop_first = true;
  std::optional<std::size_t> pca_k = 4;
  std::optional<double> pca_variance;    ///< used when pca_k is unset
  std::size_t k_min = 2, k_max = 8;
  std::size_t kmeans_n_init = 10;

  // Prediction branch. An empty input path means gen_grad output.
  std::string grad_input;
  std::size_t grad_n = 1092;
  std::uint64_t grad_seed = 42;
  std::vector<std::string> grad_drop;
  std::string label = "Entrepreneurship";
  SplitSpec split = SplitCounts{764, 65, 263};
  std::vector<ModelKind> models = {ModelKind::Logistic, ModelKind::Tree, ModelKind::Forest, ModelKind::Knn,
                                   ModelKind::Svm};
  std::size_t folds = 5;
  Scoring scoring = Scoring::F1;
  /// Axis overrides, "grid.<kind>.<param> = v1|v2|...".
  std::map<std::string, std::vector<ParamValue>> grid_overrides;
  std::size_t shap_background = 50;
  std::size_t shap_instances = 40;
  std::size_t shap_permutations = 16;  ///< 0 = exact (needs <= 12 features)

  /// The grid for a kind after applying overrides. An override naming a
  /// new parameter appends an axis.
  ParamGrid grid_for(ModelKind kind) const;
};

/// Applies "key = value" to the config. Throws ConfigError (usage) for
/// unknown keys or unparsable values.
void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value);

/// Flat text file: "key = value" per line, '#' starts a comment.
/// Throws ConfigError or FileUnreadable.
void load_config_file(RunConfig& cfg, const std::string& path);

/// Every setting as key -> text, in a fixed order. Feeding these back
/// through apply_setting reproduces the config. Without `runtime`, the keys
/// that cannot change results (out, threads) are left out.
std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& cfg, bool runtime = true);

}  // namespace tabkit::app
