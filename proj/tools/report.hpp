#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "tabkit/cluster.hpp"
#include "tabkit/explain.hpp"
#include "tabkit/modelsel.hpp"
#include "tabkit/pca.hpp"
#include "tabkit/preprocess.hpp"
#include "tabkit/tabular.hpp"

namespace tabkit::app {

using json = nlohmann::ordered_json;

json to_json(const AuditReport& a);
json to_json(const std::vector<ColumnSummary>& summaries);
json to_json(const EncodingMap& m);
json to_json(const ScalerParams& s, const std::vector<std::string>& names);
json to_json(const PcaModel& m, const LoadingTable& loadings);
json to_json(const KSelectionReport& r);
json to_json(const ClusterProfile& p);
json to_json(const ConfusionMatrix& cm);
json to_json(const EvaluationReport& r);
/// Grid axes plus per-configuration arrays (mean, std, train mean, losses)
/// in enumeration order; fold scores for the best configuration only.
json to_json(const CvResult& cv, const ParamGrid& grid, std::size_t best_index);
json to_json(const ShapSummary& s, const std::vector<std::string>& names);

/// Pretty-printed with two-space indent and a trailing newline.
std::string json_text(const json& j);
/// Writes the file, creating parent directories. Throws FileUnwritable.
void write_file(const std::string& path, const std::string& content);

/// CSV with a header row; cells are already formatted text.
std::string csv_text(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows);
/// Same rendering as the JSON report uses for a double. Non-finite values
/// become empty cells (null in JSON).
std::string num(double v);

}  // namespace tabkit::app
