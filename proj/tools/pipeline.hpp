#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "config.hpp"
#include "report.hpp"
#include "tabkit/preprocess.hpp"

namespace tabkit::app {

/// How a raw table becomes a model matrix: standardized numeric columns
/// first, then the 0/1 indicator columns of every encoded categorical.
struct FeaturePlan {
  std::vector<std::string> numeric;
  std::vector<EncodingMap> encodings;
  ScalerParams scaler;  ///< over `numeric`; empty until fitted

  std::vector<std::string> feature_names() const;
};

/// Every column not in `exclude`: numeric ones are kept, categorical ones
/// are one-hot encoded. Throws NoFeatures when nothing is left.
FeaturePlan plan_features(const Table& table, const std::vector<std::string>& exclude, bool drop_first);
/// Unscaled feature matrix. Throws MissingValue, ColumnNotFound, UnseenLevel
/// (strict policy only).
Matrix raw_features(const FeaturePlan& plan, const Table& table, UnseenLevelPolicy policy,
                    std::vector<std::string>* warnings = nullptr);
void fit_scaler(FeaturePlan& plan, const Matrix& raw);
/// Standardizes the numeric block with the fitted scaler.
Matrix scale_features(const FeaturePlan& plan, Matrix raw);

/// IQR-caps the named numeric columns in place; returns their fences.
json cap_table(Table& table, const std::vector<std::string>& names, double k);
/// The same on scaled features, matched by feature name.
json cap_features(Matrix& z, const std::vector<std::string>& feature_names, const std::vector<std::string>& names,
                  double k);

json plan_json(const FeaturePlan& plan);
FeaturePlan plan_from_json(const json& j);

/// Reads a CSV input, or generates the synthetic stand-in when `path` is
/// empty. `source` receives a description for the report.
Table load_social(const RunConfig& cfg, std::string& source);
Table load_grad(const RunConfig& cfg, std::string& source);

struct PipelineResult {
  json report;
  std::vector<std::pair<std::string, double>> timings;  ///< seconds per stage
  int exit_code = 0;
};

/// Runs the configured branches and writes report.json, timings.json, the
/// plot-data CSVs and (optionally) SVG charts under cfg.out. A failing stage
/// leaves a report marked incomplete and a nonzero exit code (2 data,
/// 3 numerical, 1 usage).
PipelineResult run_pipeline(const RunConfig& cfg);

/// Same as run_pipeline without touching the filesystem.
PipelineResult compute_pipeline(const RunConfig& cfg, std::map<std::string, std::string>* files = nullptr);

}  // namespace tabkit::app
