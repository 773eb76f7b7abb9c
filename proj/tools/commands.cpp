#include "commands.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "config.hpp"
#include "pipeline.hpp"
#include "report.hpp"
#include "tabkit/cluster.hpp"
#include "tabkit/error.hpp"
#include "tabkit/explain.hpp"
#include "tabkit/pca.hpp"
#include "tabkit/synth.hpp"

namespace tabkit::app {
namespace {

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<unsigned> threads;
  bool strict = false;
};

struct Options {
  std::string input, label = "Entrepreneurship", kind, model, predictions;
  std::vector<std::string> drop, cap, grid, params;
  std::size_t n = 0, k = 2, k_min = 2, k_max = 8;
  std::optional<std::size_t> pca_k;
  std::optional<double> variance;
  double iqr_k = 1.5;
  bool drop_first = false;
  std::size_t background = 50, instances = 40, permutations = 16;
  std::size_t folds = 5;
};

RunConfig resolve(const Globals& g) {
  RunConfig cfg;
  if (!g.config.empty()) load_config_file(cfg, g.config);
  if (g.seed) cfg.seed = *g.seed;
  if (g.out) cfg.out = *g.out;
  if (g.threads) cfg.threads = std::max(1u, *g.threads);
  if (g.strict) cfg.strict = true;
  return cfg;
}

std::string path(const RunConfig& cfg, const std::string& name) { return cfg.out + "/" + name; }

void emit(const RunConfig& cfg, std::ostream& out, const std::string& name, const json& j) {
  write_file(path(cfg, name), json_text(j));
  out << json_text(j);
}

UnseenLevelPolicy policy(const RunConfig& cfg) {
  return cfg.strict ? UnseenLevelPolicy::Strict : UnseenLevelPolicy::Lenient;
}

// Standardized segmentation features (numeric scaled, indicators raw).
struct SegInput {
  Table table;
  FeaturePlan plan;
  Matrix z;
};

SegInput segmentation_input(const Options& o, bool drop_first) {
  SegInput s;
  s.table = load_csv(o.input);
  s.plan = plan_features(s.table, o.drop, drop_first);
  const Matrix raw = raw_features(s.plan, s.table, UnseenLevelPolicy::Strict);
  fit_scaler(s.plan, raw);
  s.z = scale_features(s.plan, raw);
  return s;
}

Matrix maybe_project(const Matrix& z, std::optional<std::size_t> k) {
  if (!k || *k == 0) return z;
  return transform(fit_pca(z, FixedK{*k}), z);
}

struct PredInput {
  Table table;
  FeaturePlan plan;
  Matrix x;
  Labels y;
};

PredInput prediction_input(const Options& o) {
  PredInput p;
  p.table = load_csv(o.input);
  p.y = binary_labels(p.table, o.label);
  auto exclude = o.drop;
  exclude.push_back(o.label);
  p.plan = plan_features(p.table, exclude, false);
  const Matrix raw = raw_features(p.plan, p.table, UnseenLevelPolicy::Strict);
  fit_scaler(p.plan, raw);
  p.x = scale_features(p.plan, raw);
  return p;
}

json bundle(const Classifier& c, const FeaturePlan& plan, const std::string& label) {
  json j = classifier_to_json(c);
  j["label"] = label;
  j["features"] = plan.feature_names();
  j["preprocess"] = plan_json(plan);
  return j;
}

struct Bundle {
  Classifier model;
  FeaturePlan plan;
  std::string label;
};

Bundle load_bundle(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw_data("FileUnreadable", "cannot open model file " + file);
  json j;
  try {
    j = json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw_data("ModelFormat", file + ": " + e.what());
  }
  Bundle b;
  b.model = classifier_from_json(j);
  if (!j.contains("preprocess")) throw_data("ModelFormat", file + " has no preprocessing section");
  b.plan = plan_from_json(j["preprocess"]);
  b.label = j.value("label", "");
  if (b.plan.feature_names().size() != b.model.n_features())
    throw_data("ModelFormat", "feature plan width differs from the model");
  return b;
}

ParamSet parse_params(const std::vector<std::string>& items) {
  ParamSet out;
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw_usage("InvalidParameter", "expected name=value, got '" + item + "'");
    out.emplace_back(item.substr(0, eq), parse_param(item.substr(eq + 1)));
  }
  return out;
}

int cmd_synth(const RunConfig& cfg, const Options& o, std::ostream& out) {
  Table t;
  std::string name;
  if (o.kind == "social") {
    SocialSynthSpec spec;
    if (o.n) spec.n = o.n;
    spec.seed = cfg.seed;
    t = gen_social(spec).table;
    name = "social.csv";
  } else if (o.kind == "grad") {
    GradSynthSpec spec;
    if (o.n) spec.n = o.n;
    spec.seed = cfg.seed;
    t = gen_grad(spec);
    name = "grad.csv";
  } else {
    throw_usage("InvalidParameter", "--kind must be social or grad");
  }
  save_csv(path(cfg, name), t);
  out << "wrote " << path(cfg, name) << " (" << t.n_rows() << " rows)\n";
  return 0;
}

int cmd_describe(const RunConfig& cfg, const Options& o, std::ostream& out) {
  const Table t = load_csv(o.input);
  emit(cfg, out, "describe.json", json{{"audit", to_json(audit(t))}, {"describe", to_json(describe(t))}});
  return 0;
}

int cmd_preprocess(const RunConfig& cfg, const Options& o, std::ostream& out) {
  Table t = load_csv(o.input);
  json capping = json::object();
  if (cfg.cap_before_scaling) capping = cap_table(t, o.cap, o.iqr_k);
  FeaturePlan plan = plan_features(t, o.drop, o.drop_first);
  const Matrix raw = raw_features(plan, t, UnseenLevelPolicy::Strict);
  fit_scaler(plan, raw);
  Matrix z = scale_features(plan, raw);
  if (!cfg.cap_before_scaling) capping = cap_features(z, plan.feature_names(), o.cap, o.iqr_k);
  Table result("preprocessed");
  const auto names = plan.feature_names();
  for (std::size_t j = 0; j < names.size(); ++j) result.add_column(Column::make_numeric(names[j], z.column(j)));
  save_csv(path(cfg, "preprocessed.csv"), result);
  emit(cfg, out, "preprocess.json", json{{"capping", capping}, {"features", names}, {"preprocess", plan_json(plan)}});
  return 0;
}

int cmd_pca(const RunConfig& cfg, const Options& o, std::ostream& out) {
  const SegInput s = segmentation_input(o, true);
  ComponentSelection sel = FixedK{o.pca_k.value_or(4)};
  if (o.variance) sel = VarianceTarget{*o.variance};
  const PcaModel m = fit_pca(s.z, sel);
  const auto load = loadings(m, s.plan.feature_names());
  std::vector<std::vector<std::string>> rows;
  for (const auto& p : scree_data(m))
    rows.push_back({std::to_string(p.index), num(p.eigenvalue), num(p.ratio), num(p.cumulative)});
  write_file(path(cfg, "scree.csv"), csv_text({"component", "eigenvalue", "ratio", "cumulative"}, rows));
  rows.clear();
  for (std::size_t f = 0; f < load.features.size(); ++f) {
    std::vector<std::string> r{load.features[f]};
    for (std::size_t c = 0; c < load.components.size(); ++c) r.push_back(num(load.values(f, c)));
    rows.push_back(r);
  }
  std::vector<std::string> header{"feature"};
  header.insert(header.end(), load.components.begin(), load.components.end());
  write_file(path(cfg, "loadings.csv"), csv_text(header, rows));
  const Matrix scores = transform(m, s.z);
  rows.clear();
  for (std::size_t i = 0; i < scores.rows(); ++i) {
    std::vector<std::string> r;
    for (double v : scores.row(i)) r.push_back(num(v));
    rows.push_back(r);
  }
  write_file(path(cfg, "scores.csv"), csv_text(load.components, rows));
  emit(cfg, out, "pca.json", to_json(m, load));
  return 0;
}

int cmd_cluster(const RunConfig& cfg, const Options& o, std::ostream& out) {
  const SegInput s = segmentation_input(o, true);
  const Matrix z = maybe_project(s.z, o.pca_k);
  KMeansOptions opts;
  opts.threads = cfg.threads;
  const auto m = kmeans_fit(z, o.k, stage_seed(cfg.seed, "kmeans"), opts);
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < m.labels.size(); ++i) rows.push_back({std::to_string(i), std::to_string(m.labels[i])});
  write_file(path(cfg, "labels.csv"), csv_text({"row", "cluster"}, rows));
  std::vector<std::size_t> sizes(m.k(), 0);
  for (auto l : m.labels) ++sizes[l];
  emit(cfg, out, "cluster.json",
       json{{"k", m.k()}, {"inertia", m.inertia}, {"n_iter", m.n_iter}, {"sizes", sizes},
            {"profile", to_json(characterize(m, s.table))}});
  return 0;
}

int cmd_selectk(const RunConfig& cfg, const Options& o, std::ostream& out) {
  const SegInput s = segmentation_input(o, true);
  const Matrix z = maybe_project(s.z, o.pca_k);
  KMeansOptions opts;
  opts.threads = cfg.threads;
  const auto r = select_k(z, o.k_min, o.k_max, stage_seed(cfg.seed, "kmeans"), opts);
  std::vector<std::vector<std::string>> sil, elbow;
  for (const auto& e : r.entries) {
    sil.push_back({std::to_string(e.k), num(e.silhouette)});
    elbow.push_back({std::to_string(e.k), num(e.inertia)});
  }
  write_file(path(cfg, "silhouette.csv"), csv_text({"k", "silhouette"}, sil));
  write_file(path(cfg, "elbow.csv"), csv_text({"k", "inertia"}, elbow));
  emit(cfg, out, "selectk.json", to_json(r));
  return 0;
}

int cmd_gridsearch(const RunConfig& cfg, const Options& o, std::ostream& out) {
  const PredInput p = prediction_input(o);
  const ModelKind kind = parse_model_kind(o.model);
  RunConfig local = cfg;
  for (const auto& g : o.grid) {
    const auto eq = g.find('=');
    if (eq == std::string::npos) throw_usage("InvalidParameter", "expected --grid name=v1|v2, got '" + g + "'");
    apply_setting(local, "grid." + o.model + "." + g.substr(0, eq), g.substr(eq + 1));
  }
  const ParamGrid grid = local.grid_for(kind);
  GridSearchOptions opts;
  opts.folds = o.folds;
  opts.seed = stage_seed(cfg.seed, "cv");
  opts.threads = cfg.threads;
  const auto r = grid_search(kind, grid, p.x, p.y, opts);
  std::vector<std::vector<std::string>> rows;
  for (const auto& t : tuning_curves(r.cv))
    rows.push_back({std::string(model_kind_name(kind)), std::to_string(t.index), num(t.train_score),
                    num(t.validation_score), t.train_loss ? num(*t.train_loss) : "",
                    t.validation_loss ? num(*t.validation_loss) : ""});
  write_file(path(cfg, "tuning_curves.csv"),
             csv_text({"model", "index", "train_score", "validation_score", "train_loss", "validation_loss"}, rows));
  write_file(path(cfg, "model.json"), json_text(bundle(r.model, p.plan, o.label)));
  json best = json::object();
  for (const auto& [k, v] : r.best_params) best[k] = param_json(v);
  emit(cfg, out, "gridsearch.json",
       json{{"kind", o.model}, {"best_index", r.best_index}, {"best_params", best},
            {"best_cv_score", r.best_mean_score}, {"cv", to_json(r.cv, grid, r.best_index)}});
  return 0;
}

int cmd_train(const RunConfig& cfg, const Options& o, std::ostream& out) {
  const PredInput p = prediction_input(o);
  FitContext ctx;
  ctx.threads = cfg.threads;
  const Classifier c = fit_classifier(parse_model_kind(o.model), parse_params(o.params), p.x, p.y, ctx);
  write_file(path(cfg, "model.json"), json_text(bundle(c, p.plan, o.label)));
  const auto train = evaluate(c, p.x, p.y);
  out << "wrote " << path(cfg, "model.json") << " (training accuracy " << num(train.accuracy) << ")\n";
  return 0;
}

int cmd_evaluate(const RunConfig& cfg, const Options& o, std::ostream& out) {
  EvaluationReport r;
  if (!o.predictions.empty()) {
    SchemaHint hint{{"truth", ColumnKind::Numeric}, {"pred", ColumnKind::Numeric}};
    const Table t = load_csv(o.predictions, hint);
    const Labels truth = binary_labels(t, "truth"), pred = binary_labels(t, "pred");
    std::vector<double> scores;
    if (t.find("score")) scores = numeric_matrix(t, {"score"}).column(0);
    r = metric_panel(confusion(truth, pred), truth, scores);
  } else {
    if (o.model.empty() || o.input.empty()) throw_usage("MissingOption", "evaluate needs --predictions or --model and --input");
    const Bundle b = load_bundle(o.model);
    const Table t = load_csv(o.input);
    const std::string label = o.label.empty() ? b.label : o.label;
    std::vector<std::string> warnings;
    const Matrix x = scale_features(b.plan, raw_features(b.plan, t, policy(cfg), &warnings));
    r = evaluate(b.model, x, binary_labels(t, label));
  }
  const auto& cm = r.confusion;
  write_file(path(cfg, "confusion.csv"),
             csv_text({"tn", "fp", "fn", "tp"},
                      {{std::to_string(cm.tn), std::to_string(cm.fp), std::to_string(cm.fn), std::to_string(cm.tp)}}));
  emit(cfg, out, "evaluation.json", to_json(r));
  return 0;
}

int cmd_explain(const RunConfig& cfg, const Options& o, std::ostream& out) {
  const Bundle b = load_bundle(o.model);
  const Table t = load_csv(o.input);
  const Matrix x = scale_features(b.plan, raw_features(b.plan, t, policy(cfg)));
  const Matrix background = sample_rows(x, o.background, stage_seed(cfg.seed, "shap.background"));
  const Matrix instances = sample_rows(x, o.instances, stage_seed(cfg.seed, "shap.instances"));
  const Classifier& model = b.model;
  const ModelFn f = [&model](std::span<const double> row) { return model.explain_output(row); };
  const auto s = shap_summary(f, background, instances, o.permutations, stage_seed(cfg.seed, "shap"), cfg.threads);
  const auto names = b.plan.feature_names();
  std::vector<std::vector<std::string>> rows;
  for (const auto& e : s.entries) rows.push_back({std::to_string(e.feature), names[e.feature], num(e.mean_abs)});
  write_file(path(cfg, "shap_summary.csv"), csv_text({"feature", "name", "mean_abs_shap"}, rows));
  json j = to_json(s, names);
  j["scale"] = std::string(model.explain_scale());
  j["n_permutations"] = o.permutations;
  j["background_rows"] = background.rows();
  emit(cfg, out, "explain.json", j);
  return 0;
}

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::Usage: return 1;
    case ErrorKind::Data: return 2;
    case ErrorKind::Numerical: return 3;
  }
  return 3;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"tabkit: tabular segmentation and classification toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", TABKIT_VERSION);
  Globals g;
  Options o;
  app.add_option("--config", g.config, "key = value configuration file");
  app.add_option("--seed", g.seed, "master seed");
  app.add_option("--out", g.out, "output directory");
  app.add_option("--threads", g.threads, "worker threads");
  app.add_flag("--strict", g.strict, "reject unseen categorical levels");

  auto input = [&](CLI::App* c) { c->add_option("--input", o.input, "input CSV")->required(); };
  auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
  synth->add_option("--kind", o.kind, "social or grad")->required();
  synth->add_option("--n", o.n, "row count");
  auto* describe_cmd = app.add_subcommand("describe", "audit and summary statistics");
  input(describe_cmd);
  auto* preprocess = app.add_subcommand("preprocess", "cap, encode and standardize");
  input(preprocess);
  preprocess->add_option("--drop", o.drop, "columns to ignore")->delimiter(',');
  preprocess->add_option("--cap", o.cap, "columns to IQR-cap")->delimiter(',');
  preprocess->add_option("--iqr-k", o.iqr_k, "fence multiplier");
  preprocess->add_flag("--drop-first", o.drop_first, "drop the first level of each encoding");
  auto* pca_cmd = app.add_subcommand("pca", "principal component analysis");
  input(pca_cmd);
  pca_cmd->add_option("--drop", o.drop, "columns to ignore")->delimiter(',');
  pca_cmd->add_option("--k", o.pca_k, "components to keep (default 4)");
  pca_cmd->add_option("--variance", o.variance, "keep the fewest components reaching this fraction");
  auto* cluster_cmd = app.add_subcommand("cluster", "k-means clustering");
  input(cluster_cmd);
  cluster_cmd->add_option("--drop", o.drop, "columns to ignore")->delimiter(',');
  cluster_cmd->add_option("--k", o.k, "cluster count")->required();
  cluster_cmd->add_option("--pca-k", o.pca_k, "project onto this many components first (0 = none)");
  auto* selectk = app.add_subcommand("selectk", "silhouette and elbow over a k range");
  input(selectk);
  selectk->add_option("--drop", o.drop, "columns to ignore")->delimiter(',');
  selectk->add_option("--k-min", o.k_min, "smallest k");
  selectk->add_option("--k-max", o.k_max, "largest k");
  selectk->add_option("--pca-k", o.pca_k, "project onto this many components first (0 = none)");
  auto* gridsearch = app.add_subcommand("gridsearch", "cross-validated grid search");
  input(gridsearch);
  gridsearch->add_option("--label", o.label, "binary label column");
  gridsearch->add_option("--drop", o.drop, "columns to ignore")->delimiter(',');
  gridsearch->add_option("--model", o.model, "logistic|tree|forest|knn|svm")->required();
  gridsearch->add_option("--grid", o.grid, "axis override name=v1|v2 (repeatable)");
  gridsearch->add_option("--folds", o.folds, "fold count");
  auto* train = app.add_subcommand("train", "fit one configuration");
  input(train);
  train->add_option("--label", o.label, "binary label column");
  train->add_option("--drop", o.drop, "columns to ignore")->delimiter(',');
  train->add_option("--model", o.model, "logistic|tree|forest|knn|svm")->required();
  train->add_option("--param", o.params, "name=value (repeatable)");
  auto* evaluate_cmd = app.add_subcommand("evaluate", "metrics from a model or a predictions file");
  evaluate_cmd->add_option("--model", o.model, "model.json from train or gridsearch");
  evaluate_cmd->add_option("--input", o.input, "labelled CSV");
  evaluate_cmd->add_option("--label", o.label, "label column");
  evaluate_cmd->add_option("--predictions", o.predictions, "CSV with truth, pred and optional score columns");
  auto* explain_cmd = app.add_subcommand("explain", "mean |SHAP| summary");
  explain_cmd->add_option("--model", o.model, "model.json")->required();
  input(explain_cmd);
  explain_cmd->add_option("--background", o.background, "background rows");
  explain_cmd->add_option("--instances", o.instances, "explained rows");
  explain_cmd->add_option("--permutations", o.permutations, "permutations per row (0 = exact)");
  auto* pipeline = app.add_subcommand("pipeline", "segmentation and prediction branches end to end");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "tabkit: usage error: " << e.what() << "\n";
    return 1;
  }

  try {
    const RunConfig cfg = resolve(g);
    std::error_code ec;
    std::filesystem::create_directories(cfg.out, ec);
    if (*synth) return cmd_synth(cfg, o, out);
    if (*describe_cmd) return cmd_describe(cfg, o, out);
    if (*preprocess) return cmd_preprocess(cfg, o, out);
    if (*pca_cmd) return cmd_pca(cfg, o, out);
    if (*cluster_cmd) return cmd_cluster(cfg, o, out);
    if (*selectk) return cmd_selectk(cfg, o, out);
    if (*gridsearch) return cmd_gridsearch(cfg, o, out);
    if (*train) return cmd_train(cfg, o, out);
    if (*evaluate_cmd) return cmd_evaluate(cfg, o, out);
    if (*explain_cmd) return cmd_explain(cfg, o, out);
    if (*pipeline) {
      const auto r = run_pipeline(cfg);
      if (r.exit_code != 0) {
        err << "tabkit: " << r.report["error"]["message"].get<std::string>() << " (partial report in " << cfg.out
            << "/report.json)\n";
        return r.exit_code;
      }
      out << "wrote " << path(cfg, "report.json") << "\n";
      return 0;
    }
  } catch (const Error& e) {
    err << "tabkit: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    err << "tabkit: internal error: " << e.what() << "\n";
    return 3;
  }
  return 1;
}

}  // namespace tabkit::app
