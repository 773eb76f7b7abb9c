#include "report.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

#include "tabkit/error.hpp"

namespace tabkit::app {

std::string num(double v) {
  if (!std::isfinite(v)) return "";
  // Reuse the JSON serializer so both outputs print the same digits.
  return json(v).dump();
}

json to_json(const AuditReport& a) {
  json missing = json::object();
  for (const auto& [name, count] : a.missing_per_column) missing[name] = count;
  return json{{"rows", a.n_rows}, {"missing_per_column", missing}, {"duplicate_rows", a.duplicate_row_count}};
}

json to_json(const std::vector<ColumnSummary>& summaries) {
  json out = json::array();
  for (const auto& s : summaries)
    out.push_back({{"column", s.name}, {"count", s.count}, {"mean", s.mean}, {"std", s.std}, {"min", s.min},
                   {"q1", s.q1}, {"median", s.median}, {"q3", s.q3}, {"max", s.max}, {"skewness", s.skewness}});
  return out;
}

json to_json(const EncodingMap& m) {
  json j{{"source", m.source}, {"levels", m.levels}, {"columns", m.output_columns}, {"drop_first", m.drop_first}};
  j["dropped_level"] = m.dropped_level ? json(*m.dropped_level) : json(nullptr);
  return j;
}

json to_json(const ScalerParams& s, const std::vector<std::string>& names) {
  return json{{"columns", names}, {"means", s.means}, {"stds", s.stds}};
}

json to_json(const PcaModel& m, const LoadingTable& loadings) {
  json load = json::object();
  for (std::size_t f = 0; f < loadings.features.size(); ++f) {
    json row = json::array();
    for (std::size_t c = 0; c < loadings.components.size(); ++c) row.push_back(loadings.values(f, c));
    load[loadings.features[f]] = row;
  }
  json scree = json::array();
  for (const auto& p : scree_data(m))
    scree.push_back({{"component", p.index}, {"eigenvalue", p.eigenvalue}, {"ratio", p.ratio}, {"cumulative", p.cumulative}});
  return json{{"k_retained", m.k_retained},
              {"cumulative_variance", m.cumulative_ratio(m.k_retained)},
              {"eigenvalues", m.eigenvalues},
              {"explained_variance_ratio", m.explained_variance_ratio},
              {"scree", scree},
              {"loading_components", loadings.components},
              {"loadings", load}};
}

json to_json(const KSelectionReport& r) {
  json entries = json::array();
  for (const auto& e : r.entries) entries.push_back({{"k", e.k}, {"inertia", e.inertia}, {"silhouette", e.silhouette}});
  return json{{"entries", entries}, {"chosen_k", r.chosen_k}};
}

json to_json(const ClusterProfile& p) {
  json clusters = json::array();
  for (std::size_t c = 0; c < p.sizes.size(); ++c) {
    json means = json::object();
    for (std::size_t f = 0; f < p.features.size(); ++f) means[p.features[f]] = p.means(c, f);
    clusters.push_back({{"cluster", c}, {"size", p.sizes[c]}, {"means", means}});
  }
  return clusters;
}

json to_json(const ConfusionMatrix& cm) {
  return json{{"tn", cm.tn}, {"fp", cm.fp}, {"fn", cm.fn}, {"tp", cm.tp}};
}

namespace {
json metrics_json(const ClassMetrics& m) {
  return json{{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}, {"support", m.support}};
}
}  // namespace

json to_json(const EvaluationReport& r) {
  json j{{"confusion", to_json(r.confusion)},
         {"accuracy", r.accuracy},
         {"class_0", metrics_json(r.per_class[0])},
         {"class_1", metrics_json(r.per_class[1])},
         {"macro", metrics_json(r.macro)},
         {"weighted", metrics_json(r.weighted)},
         {"binary", metrics_json(r.binary)}};
  j["auc"] = r.auc ? json(*r.auc) : json(nullptr);
  return j;
}

json to_json(const CvResult& cv, const ParamGrid& grid, std::size_t best_index) {
  json axes = json::array();
  for (const auto& a : grid.axes) {
    json values = json::array();
    for (const auto& v : a.values) values.push_back(param_json(v));
    axes.push_back({{"name", a.name}, {"values", values}});
  }
  json mean = json::array(), std = json::array(), train = json::array(), tl = json::array(), vl = json::array();
  json failures = json::array();
  bool any_loss = false;
  for (std::size_t i = 0; i < cv.configs.size(); ++i) {
    const auto& c = cv.configs[i];
    mean.push_back(std::isfinite(c.mean) ? json(c.mean) : json(nullptr));
    std.push_back(c.std);
    train.push_back(std::isfinite(c.train_mean) ? json(c.train_mean) : json(nullptr));
    tl.push_back(c.train_loss ? json(*c.train_loss) : json(nullptr));
    vl.push_back(c.validation_loss ? json(*c.validation_loss) : json(nullptr));
    any_loss = any_loss || c.train_loss.has_value();
    if (c.failed()) failures.push_back({{"index", i}, {"diagnostic", c.diagnostic}});
  }
  json j{{"scoring", std::string(scoring_name(cv.scoring))},
         {"folds", cv.folds},
         {"seed", cv.seed},
         {"n_configurations", cv.configs.size()},
         {"axes", axes},
         {"mean_score", mean},
         {"std_score", std},
         {"train_mean_score", train}};
  if (any_loss) {
    j["train_loss"] = tl;
    j["validation_loss"] = vl;
  }
  j["best_fold_scores"] = cv.configs.at(best_index).fold_scores;
  j["failures"] = failures;
  return j;
}

json to_json(const ShapSummary& s, const std::vector<std::string>& names) {
  json entries = json::array();
  for (const auto& e : s.entries)
    entries.push_back({{"feature", e.feature}, {"name", names.at(e.feature)}, {"mean_abs_shap", e.mean_abs}});
  return json{{"n_instances", s.n_instances}, {"features", entries}};
}

std::string json_text(const json& j) { return j.dump(2) + "\n"; }

void write_file(const std::string& path, const std::string& content) {
  const std::filesystem::path p(path);
  std::error_code ec;
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path(), ec);
  std::ofstream out(p, std::ios::binary);
  if (!out) throw_data("FileUnwritable", "cannot write " + path);
  out << content;
  if (!out) throw_data("FileUnwritable", "write failed for " + path);
}

std::string csv_text(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += csv_escape(cells[i]);
    }
    out += '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
  return out;
}

}  // namespace tabkit::app
