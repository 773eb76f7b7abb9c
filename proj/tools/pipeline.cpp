#include "pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>

#include "svg.hpp"
#include "tabkit/cluster.hpp"
#include "tabkit/error.hpp"
#include "tabkit/explain.hpp"
#include "tabkit/pca.hpp"
#include "tabkit/synth.hpp"

namespace tabkit::app {

std::vector<std::string> FeaturePlan::feature_names() const {
  std::vector<std::string> names = numeric;
  for (const auto& e : encodings) names.insert(names.end(), e.output_columns.begin(), e.output_columns.end());
  return names;
}

FeaturePlan plan_features(const Table& table, const std::vector<std::string>& exclude, bool drop_first) {
  FeaturePlan plan;
  for (const auto& name : exclude) table.column(name);  // ColumnNotFound on typos
  for (const auto& col : table.columns()) {
    if (std::find(exclude.begin(), exclude.end(), col.name) != exclude.end()) continue;
    if (col.kind == ColumnKind::Numeric) plan.numeric.push_back(col.name);
    else plan.encodings.push_back(one_hot(table, col.name, drop_first).map);
  }
  if (plan.feature_names().empty()) throw_data("NoFeatures", "no feature columns remain");
  return plan;
}

Matrix raw_features(const FeaturePlan& plan, const Table& table, UnseenLevelPolicy policy,
                    std::vector<std::string>* warnings) {
  Table t = table;
  for (const auto& e : plan.encodings) {
    auto applied = apply_encoding(t, e, policy);
    if (warnings) warnings->insert(warnings->end(), applied.warnings.begin(), applied.warnings.end());
    t = std::move(applied.table);
  }
  return numeric_matrix(t, plan.feature_names());
}

void fit_scaler(FeaturePlan& plan, const Matrix& raw) {
  std::vector<std::size_t> cols(plan.numeric.size());
  for (std::size_t j = 0; j < cols.size(); ++j) cols[j] = j;
  if (cols.empty()) {
    plan.scaler = {};
    return;
  }
  plan.scaler = standardize_fit(raw.select_cols(cols)).params;
}

Matrix scale_features(const FeaturePlan& plan, Matrix raw) {
  const std::size_t k = plan.numeric.size();
  if (plan.scaler.means.size() != k) throw_usage("DimensionMismatch", "scaler does not match the feature plan");
  for (std::size_t i = 0; i < raw.rows(); ++i)
    for (std::size_t j = 0; j < k; ++j)
      raw(i, j) = plan.scaler.stds[j] > 0.0 ? (raw(i, j) - plan.scaler.means[j]) / plan.scaler.stds[j] : 0.0;
  return raw;
}

json cap_table(Table& table, const std::vector<std::string>& names, double k) {
  json capping = json::object();
  for (const auto& name : names) {
    Column& col = table.column(name);
    if (col.kind != ColumnKind::Numeric) throw_usage("ColumnNotNumeric", "cannot cap categorical column " + name);
    const auto fences = iqr_fences(col.numeric, k);
    col.numeric = apply_fences(col.numeric, fences);
    capping[name] = {{"lower", fences.lower}, {"upper", fences.upper}};
  }
  return capping;
}

json cap_features(Matrix& z, const std::vector<std::string>& feature_names, const std::vector<std::string>& names,
                  double k) {
  json capping = json::object();
  for (const auto& name : names) {
    const auto it = std::find(feature_names.begin(), feature_names.end(), name);
    if (it == feature_names.end()) throw_usage("ColumnNotNumeric", "cannot cap " + name + ": not a numeric feature");
    const auto j = static_cast<std::size_t>(it - feature_names.begin());
    const auto col = z.column(j);
    const auto fences = iqr_fences(col, k);
    const auto capped = apply_fences(col, fences);
    for (std::size_t i = 0; i < z.rows(); ++i) z(i, j) = capped[i];
    capping[name] = {{"lower", fences.lower}, {"upper", fences.upper}};
  }
  return capping;
}

json plan_json(const FeaturePlan& plan) {
  json enc = json::array();
  for (const auto& e : plan.encodings) enc.push_back(to_json(e));
  return json{{"numeric", plan.numeric},
              {"scaler", {{"means", plan.scaler.means}, {"stds", plan.scaler.stds}}},
              {"encodings", enc}};
}

FeaturePlan plan_from_json(const json& j) {
  try {
    FeaturePlan p;
    p.numeric = j.at("numeric").get<std::vector<std::string>>();
    p.scaler.means = j.at("scaler").at("means").get<std::vector<double>>();
    p.scaler.stds = j.at("scaler").at("stds").get<std::vector<double>>();
    for (const auto& e : j.at("encodings")) {
      EncodingMap m;
      m.source = e.at("source").get<std::string>();
      m.levels = e.at("levels").get<std::vector<std::string>>();
      m.output_columns = e.at("columns").get<std::vector<std::string>>();
      m.drop_first = e.at("drop_first").get<bool>();
      if (!e.at("dropped_level").is_null()) m.dropped_level = e.at("dropped_level").get<std::string>();
      p.encodings.push_back(std::move(m));
    }
    if (p.scaler.means.size() != p.numeric.size() || p.scaler.stds.size() != p.numeric.size())
      throw_data("ModelFormat", "scaler size differs from numeric column count");
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw_data("ModelFormat", std::string("bad feature plan: ") + e.what());
  }
}

Table load_social(const RunConfig& cfg, std::string& source) {
  if (!cfg.social_input.empty()) {
    source = cfg.social_input;
    return load_csv(cfg.social_input);
  }
  source = "gen_social(n=" + std::to_string(cfg.social_n) + ", seed=" + std::to_string(cfg.social_seed) + ")";
  return gen_social({cfg.social_n, cfg.social_seed}).table;
}

Table load_grad(const RunConfig& cfg, std::string& source) {
  if (!cfg.grad_input.empty()) {
    source = cfg.grad_input;
    return load_csv(cfg.grad_input);
  }
  source = "gen_grad(n=" + std::to_string(cfg.grad_n) + ", seed=" + std::to_string(cfg.grad_seed) + ")";
  GradSynthSpec spec;
  spec.n = cfg.grad_n;
  spec.seed = cfg.grad_seed;
  return gen_grad(spec);
}

namespace {

using Files = std::map<std::string, std::string>;

class StageRunner {
 public:
  explicit StageRunner(PipelineResult& r) : result_(r) {}

  template <class F>
  void run(const std::string& name, F&& f) {
    const auto start = std::chrono::steady_clock::now();
    f();
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - start;
    result_.timings.emplace_back(name, dt.count());
  }

 private:
  PipelineResult& result_;
};

std::vector<std::string> with(std::vector<std::string> v, const std::string& extra) {
  v.push_back(extra);
  return v;
}

void segmentation(const RunConfig& cfg, json& rep, Files& files, StageRunner& stage) {
  std::string source;
  Table table;
  stage.run("segmentation.load", [&] { table = load_social(cfg, source); });
  rep["input"] = {{"source", source}, {"rows", table.n_rows()}, {"columns", table.column_names()}};
  stage.run("segmentation.audit", [&] {
    rep["audit"] = to_json(audit(table));
    Table described = table;
    for (const auto& d : cfg.social_drop) {
      auto idx = described.find(d);
      if (idx) described.replace_column(*idx, {});
    }
    rep["describe"] = to_json(describe(described));
  });

  json capping = json::object();
  if (cfg.cap_before_scaling) capping = cap_table(table, cfg.cap_columns, cfg.iqr_k);

  FeaturePlan plan;
  Matrix z;
  stage.run("segmentation.encode", [&] {
    plan = plan_features(table, cfg.social_drop, cfg.drop_first);
    const Matrix raw = raw_features(plan, table, UnseenLevelPolicy::Strict);
    fit_scaler(plan, raw);
    z = scale_features(plan, raw);
    if (!cfg.cap_before_scaling) capping = cap_features(z, plan.feature_names(), cfg.cap_columns, cfg.iqr_k);
  });
  rep["capping"] = capping;
  const auto names = plan.feature_names();
  rep["features"] = names;
  rep["preprocess"] = plan_json(plan);

  PcaModel pca;
  Matrix scores;
  stage.run("segmentation.pca", [&] {
    ComponentSelection sel = FixedK{cfg.pca_k.value_or(0)};
    if (!cfg.pca_k) {
      if (!cfg.pca_variance) throw_usage("ConfigError", "set pca_k or pca_variance");
      sel = VarianceTarget{*cfg.pca_variance};
    }
    pca = fit_pca(z, sel);
    scores = transform(pca, z);
  });
  const auto load = loadings(pca, names);
  rep["pca"] = to_json(pca, load);

  std::vector<std::vector<std::string>> scree_rows;
  for (const auto& p : scree_data(pca))
    scree_rows.push_back({std::to_string(p.index), num(p.eigenvalue), num(p.ratio), num(p.cumulative)});
  files["scree.csv"] = csv_text({"component", "eigenvalue", "ratio", "cumulative"}, scree_rows);
  std::vector<std::vector<std::string>> load_rows;
  for (std::size_t f = 0; f < load.features.size(); ++f) {
    std::vector<std::string> row{load.features[f]};
    for (std::size_t c = 0; c < load.components.size(); ++c) row.push_back(num(load.values(f, c)));
    load_rows.push_back(row);
  }
  std::vector<std::string> load_header{"feature"};
  load_header.insert(load_header.end(), load.components.begin(), load.components.end());
  files["loadings.csv"] = csv_text(load_header, load_rows);

  KMeansOptions opts;
  opts.n_init = cfg.kmeans_n_init;
  opts.threads = cfg.threads;
  const auto kseed = stage_seed(cfg.seed, "kmeans");
  KSelectionReport ks;
  stage.run("segmentation.select_k", [&] { ks = select_k(scores, cfg.k_min, cfg.k_max, kseed, opts); });
  rep["k_selection"] = to_json(ks);
  std::vector<std::vector<std::string>> sil_rows, elbow_rows;
  Series sil{"silhouette", {}, {}}, elbow{"inertia", {}, {}};
  for (const auto& e : ks.entries) {
    sil_rows.push_back({std::to_string(e.k), num(e.silhouette)});
    elbow_rows.push_back({std::to_string(e.k), num(e.inertia)});
    sil.x.push_back(static_cast<double>(e.k));
    sil.y.push_back(e.silhouette);
    elbow.x.push_back(static_cast<double>(e.k));
    elbow.y.push_back(e.inertia);
  }
  files["silhouette.csv"] = csv_text({"k", "silhouette"}, sil_rows);
  files["elbow.csv"] = csv_text({"k", "inertia"}, elbow_rows);

  KMeansModel km;
  stage.run("segmentation.kmeans", [&] { km = kmeans_fit(scores, ks.chosen_k, kseed, opts); });
  std::vector<std::size_t> sizes(km.k(), 0);
  for (auto l : km.labels) ++sizes[l];
  rep["kmeans"] = {{"k", km.k()}, {"inertia", km.inertia}, {"n_iter", km.n_iter}, {"best_restart", km.best_restart},
                   {"sizes", sizes}};
  rep["profile"] = to_json(characterize(km, table));

  if (cfg.svg) {
    Series scree{"explained ratio", {}, {}};
    for (const auto& p : scree_data(pca)) {
      scree.x.push_back(static_cast<double>(p.index));
      scree.y.push_back(p.ratio);
    }
    files["scree.svg"] = svg_line_chart("Scree plot", "component", "explained variance ratio", {scree});
    files["silhouette.svg"] = svg_line_chart("Silhouette by k", "k", "mean silhouette", {sil});
    files["elbow.svg"] = svg_line_chart("Elbow", "k", "inertia", {elbow});
  }
}

void confusion_csv(Files& files, const std::string& name, const std::vector<std::string>& kinds,
                   const std::vector<ConfusionMatrix>& cms) {
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < kinds.size(); ++i)
    rows.push_back({kinds[i], std::to_string(cms[i].tn), std::to_string(cms[i].fp), std::to_string(cms[i].fn),
                    std::to_string(cms[i].tp)});
  files[name] = csv_text({"model", "tn", "fp", "fn", "tp"}, rows);
}

void prediction(const RunConfig& cfg, json& rep, Files& files, StageRunner& stage) {
  std::string source;
  Table table;
  stage.run("prediction.load", [&] { table = load_grad(cfg, source); });
  rep["input"] = {{"source", source}, {"rows", table.n_rows()}, {"columns", table.column_names()}};
  stage.run("prediction.audit", [&] { rep["audit"] = to_json(audit(table)); });

  FeaturePlan plan;
  Matrix raw;
  Labels y;
  stage.run("prediction.encode", [&] {
    y = binary_labels(table, cfg.label);
    plan = plan_features(table, with(cfg.grad_drop, cfg.label), false);
    raw = raw_features(plan, table, UnseenLevelPolicy::Strict);
  });
  const auto names = plan.feature_names();
  rep["features"] = names;

  SplitIndices split;
  stage.run("prediction.split", [&] { split = stratified_split(y, cfg.split, stage_seed(cfg.seed, "split")); });
  auto part = [&](const std::vector<std::size_t>& idx, Matrix& x, Labels& labels) {
    x = raw.select_rows(idx);
    labels.resize(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) labels[i] = y[idx[i]];
  };
  Matrix x_train, x_val, x_test;
  Labels y_train, y_val, y_test;
  part(split.train, x_train, y_train);
  part(split.validation, x_val, y_val);
  part(split.test, x_test, y_test);
  auto positives = [](const Labels& l) { return static_cast<std::size_t>(std::count(l.begin(), l.end(), 1)); };
  rep["split"] = {{"train", split.train.size()},           {"validation", split.validation.size()},
                  {"test", split.test.size()},             {"train_positive", positives(y_train)},
                  {"validation_positive", positives(y_val)}, {"test_positive", positives(y_test)}};

  // The scaler sees training rows only.
  fit_scaler(plan, x_train);
  x_train = scale_features(plan, std::move(x_train));
  x_val = scale_features(plan, std::move(x_val));
  x_test = scale_features(plan, std::move(x_test));
  rep["preprocess"] = plan_json(plan);

  GridSearchOptions gopts;
  gopts.scoring = cfg.scoring;
  gopts.folds = cfg.folds;
  gopts.seed = stage_seed(cfg.seed, "cv");
  gopts.threads = cfg.threads;

  json models = json::array();
  std::vector<std::string> kinds;
  std::vector<ConfusionMatrix> val_cms, test_cms;
  std::vector<std::vector<std::string>> tuning_rows;
  std::vector<GridSearchOutcome> outcomes;
  for (auto kind : cfg.models) {
    const std::string kname(model_kind_name(kind));
    const ParamGrid grid = cfg.grid_for(kind);
    GridSearchOutcome out;
    stage.run("prediction.gridsearch." + kname, [&] { out = grid_search(kind, grid, x_train, y_train, gopts); });
    EvaluationReport val, test;
    stage.run("prediction.evaluate." + kname, [&] {
      val = evaluate(out.model, x_val, y_val);
      test = evaluate(out.model, x_test, y_test);
    });
    json best_params = json::object();
    for (const auto& [k, v] : out.best_params) best_params[k] = param_json(v);
    models.push_back({{"kind", kname},
                      {"grid_size", grid.size()},
                      {"best_index", out.best_index},
                      {"best_params", best_params},
                      {"best_cv_score", out.best_mean_score},
                      {"cv", to_json(out.cv, grid, out.best_index)},
                      {"validation", to_json(val)},
                      {"test", to_json(test)}});
    kinds.push_back(kname);
    val_cms.push_back(val.confusion);
    test_cms.push_back(test.confusion);
    for (const auto& p : tuning_curves(out.cv))
      tuning_rows.push_back({kname, std::to_string(p.index), num(p.train_score), num(p.validation_score),
                             p.train_loss ? num(*p.train_loss) : "", p.validation_loss ? num(*p.validation_loss) : ""});
    outcomes.push_back(std::move(out));
  }
  rep["models"] = models;
  files["tuning_curves.csv"] =
      csv_text({"model", "index", "train_score", "validation_score", "train_loss", "validation_loss"}, tuning_rows);
  confusion_csv(files, "confusion_val.csv", kinds, val_cms);
  confusion_csv(files, "confusion_test.csv", kinds, test_cms);

  std::size_t best = 0;
  for (std::size_t i = 1; i < outcomes.size(); ++i)
    if (outcomes[i].best_mean_score > outcomes[best].best_mean_score) best = i;
  const Classifier& model = outcomes[best].model;
  rep["best_model"] = {{"kind", kinds[best]},
                       {"selected_by", "cv_" + std::string(scoring_name(cfg.scoring))},
                       {"cv_score", outcomes[best].best_mean_score},
                       {"test_accuracy", models[best]["test"]["accuracy"]},
                       {"model", classifier_to_json(model)}};

  ShapSummary summary;
  Matrix background, instances;
  stage.run("prediction.shap", [&] {
    background = sample_rows(x_train, cfg.shap_background, stage_seed(cfg.seed, "shap.background"));
    instances = sample_rows(x_test, cfg.shap_instances, stage_seed(cfg.seed, "shap.instances"));
    const ModelFn f = [&model](std::span<const double> row) { return model.explain_output(row); };
    summary = shap_summary(f, background, instances, cfg.shap_permutations, stage_seed(cfg.seed, "shap"), cfg.threads);
  });
  json shap = to_json(summary, names);
  shap["model"] = kinds[best];
  shap["scale"] = std::string(model.explain_scale());
  shap["background_rows"] = background.rows();
  shap["n_permutations"] = cfg.shap_permutations;
  shap["method"] = cfg.shap_permutations == 0 ? "exact" : "permutation";
  rep["shap"] = shap;
  std::vector<std::vector<std::string>> shap_rows;
  for (const auto& e : summary.entries)
    shap_rows.push_back({std::to_string(e.feature), names[e.feature], num(e.mean_abs)});
  files["shap_summary.csv"] = csv_text({"feature", "name", "mean_abs_shap"}, shap_rows);

  if (cfg.svg) {
    const auto& cv = outcomes[best].cv;
    Series train{"train", {}, {}}, val{"validation", {}, {}};
    for (const auto& p : tuning_curves(cv)) {
      train.x.push_back(static_cast<double>(p.index));
      train.y.push_back(p.train_score);
      val.x.push_back(static_cast<double>(p.index));
      val.y.push_back(p.validation_score);
    }
    files["tuning_curves.svg"] =
        svg_line_chart("Tuning curve (" + kinds[best] + ")", "configuration", scoring_name(cfg.scoring).data(), {train, val});
    std::vector<std::string> labels;
    std::vector<double> values;
    for (std::size_t i = 0; i < summary.entries.size() && i < 15; ++i) {
      labels.push_back(names[summary.entries[i].feature]);
      values.push_back(summary.entries[i].mean_abs);
    }
    files["shap_summary.svg"] = svg_bar_chart("Mean |SHAP| (" + kinds[best] + ")", labels, values);
  }
}

int exit_code_of(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::Usage: return 1;
    case ErrorKind::Data: return 2;
    case ErrorKind::Numerical: return 3;
  }
  return 3;
}

}  // namespace

PipelineResult compute_pipeline(const RunConfig& cfg, std::map<std::string, std::string>* files_out) {
  PipelineResult result;
  Files files;
  StageRunner stage(result);
  json& rep = result.report;
  rep["toolkit"] = {{"name", "tabkit"}, {"version", TABKIT_VERSION}};
  rep["seed"] = cfg.seed;
  json config = json::object();
  for (const auto& [k, v] : config_entries(cfg, false)) config[k] = v;
  rep["config"] = config;
  rep["complete"] = false;
  std::string current = "segmentation";
  try {
    if (cfg.pipeline != "prediction") {
      rep["segmentation"] = json::object();
      segmentation(cfg, rep["segmentation"], files, stage);
    }
    current = "prediction";
    if (cfg.pipeline != "segmentation") {
      rep["prediction"] = json::object();
      prediction(cfg, rep["prediction"], files, stage);
    }
    rep["complete"] = true;
  } catch (const Error& e) {
    result.exit_code = exit_code_of(e);
    rep["error"] = {{"branch", current}, {"code", e.code()}, {"message", e.what()}};
  }
  files["report.json"] = json_text(rep);
  json timings = json::object();
  for (const auto& [name, secs] : result.timings) timings[name] = secs;
  files["timings.json"] = json_text(timings);
  if (files_out) *files_out = std::move(files);
  return result;
}

PipelineResult run_pipeline(const RunConfig& cfg) {
  std::map<std::string, std::string> files;
  PipelineResult r = compute_pipeline(cfg, &files);
  for (const auto& [name, content] : files) write_file(cfg.out + "/" + name, content);
  return r;
}

}  // namespace tabkit::app
