#include "tabkit/modelsel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <numeric>

#include "tabkit/error.hpp"
#include "tabkit/parallel.hpp"

namespace tabkit {

std::size_t ParamGrid::size() const {
  if (axes.empty()) return 0;
  std::size_t n = 1;
  for (const auto& a : axes) n *= a.values.size();
  return n;
}

ParamSet ParamGrid::at(std::size_t index) const {
  ParamSet out(axes.size());
  for (std::size_t a = axes.size(); a-- > 0;) {
    const std::size_t m = axes[a].values.size();
    out[a] = {axes[a].name, axes[a].values[index % m]};
    index /= m;
  }
  return out;
}

void ParamGrid::validate() const {
  if (axes.empty()) throw_usage("EmptyGrid", "grid has no parameters");
  for (const auto& a : axes)
    if (a.values.empty()) throw_usage("EmptyGrid", "parameter '" + a.name + "' has no candidate values");
}

ParamGrid default_grid(ModelKind kind) {
  using V = std::vector<ParamValue>;
  const ParamValue none = std::monostate{};
  auto i = [](std::int64_t v) { return ParamValue(v); };
  auto d = [](double v) { return ParamValue(v); };
  auto s = [](const char* v) { return ParamValue(std::string(v)); };
  ParamGrid g;
  switch (kind) {
    case ModelKind::Logistic:
      g.axes = {{"penalty", V{s("l1"), s("l2")}},
                {"C", V{d(0.001), d(0.01), d(0.1), d(1.0), d(10.0)}},
                {"max_iter", V{i(2000)}}};
      break;
    case ModelKind::Tree:
      g.axes = {{"criterion", V{s("gini"), s("entropy"), s("log_loss")}},
                {"max_depth", V{none, i(5), i(10), i(20), i(50)}},
                {"min_samples_split", V{i(2), i(5), i(10), i(20)}},
                {"min_samples_leaf", V{i(1), i(2), i(5), i(10)}},
                {"max_features", V{none, s("sqrt"), s("log2")}},
                {"max_leaf_nodes", V{none, i(10), i(50), i(100)}},
                {"min_impurity_decrease", V{d(0.0), d(0.01), d(0.1)}},
                {"splitter", V{s("best"), s("random")}},
                {"class_weight", V{none, s("balanced")}},
                {"ccp_alpha", V{d(0.0), d(0.01), d(0.1)}}};
      break;
    case ModelKind::Forest:
      g.axes = {{"n_estimators", V{i(50), i(100)}},
                {"max_depth", V{i(5), i(10), none}},
                {"min_samples_split", V{i(2), i(5)}},
                {"min_samples_leaf", V{i(1), i(2)}},
                {"max_features", V{s("sqrt"), s("log2"), none}},
                {"bootstrap", V{ParamValue(true), ParamValue(false)}},
                {"criterion", V{s("gini"), s("entropy")}},
                {"class_weight", V{none, s("balanced")}},
                {"random_state", V{i(21)}}};
      break;
    case ModelKind::Knn:
      g.axes = {{"n_neighbors", V{i(3), i(5), i(7), i(9)}},
                {"weights", V{s("uniform"), s("distance")}},
                {"metric", V{s("euclidean"), s("manhattan")}}};
      break;
    case ModelKind::Svm:
      g.axes = {{"C", V{d(0.1), d(1.0), d(10.0)}},
                {"gamma", V{s("scale"), s("auto")}},
                {"kernel", V{s("rbf")}},
                {"probability", V{ParamValue(false)}}};
      break;
  }
  return g;
}

std::vector<std::vector<std::size_t>> stratified_kfold(const Labels& y, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw_usage("InvalidParameter", "need at least 2 folds");
  std::array<std::vector<std::size_t>, 2> by_class;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] != 0 && y[i] != 1) throw_data("LabelNotBinary", "labels must be 0 or 1");
    by_class[static_cast<std::size_t>(y[i])].push_back(i);
  }
  for (int c = 0; c < 2; ++c)
    if (by_class[c].size() < k)
      throw_data("ClassTooSmall", "class " + std::to_string(c) + " has " + std::to_string(by_class[c].size()) +
                                       " rows, fewer than " + std::to_string(k) + " folds");
  std::vector<std::vector<std::size_t>> folds(k);
  std::size_t position = 0;
  for (std::size_t c = 0; c < 2; ++c) {
    SplitMix64 rng(stream_seed(seed, c));
    rng.shuffle(std::span<std::size_t>(by_class[c]));
    for (auto idx : by_class[c]) folds[position++ % k].push_back(idx);
  }
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

ConfusionMatrix confusion(const Labels& truth, const Labels& pred) {
  if (truth.size() != pred.size())
    throw_usage("LengthMismatch", std::to_string(truth.size()) + " labels vs " + std::to_string(pred.size()) + " predictions");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if ((truth[i] != 0 && truth[i] != 1) || (pred[i] != 0 && pred[i] != 1))
      throw_data("LabelNotBinary", "labels must be 0 or 1");
    if (truth[i] == 1) (pred[i] == 1 ? cm.tp : cm.fn)++;
    else (pred[i] == 1 ? cm.fp : cm.tn)++;
  }
  return cm;
}

namespace {

double ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }

ClassMetrics class_metrics(double tp, double fp, double fn, std::size_t support) {
  ClassMetrics m;
  m.precision = ratio(tp, tp + fp);
  m.recall = ratio(tp, tp + fn);
  m.f1 = ratio(2.0 * m.precision * m.recall, m.precision + m.recall);
  m.support = support;
  return m;
}

}  // namespace

double auc(const Labels& truth, std::span<const double> scores) {
  if (truth.size() != scores.size()) throw_usage("LengthMismatch", "label and score counts differ");
  std::vector<std::size_t> order(truth.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Rank-sum with midranks for ties.
  double rank_sum = 0.0;
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t t = i; t < j; ++t)
      if (truth[order[t]] == 1) {
        rank_sum += midrank;
        ++n_pos;
      }
    i = j;
  }
  const std::size_t n_neg = truth.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) throw_data("SingleClass", "AUC needs both classes");
  const double np = static_cast<double>(n_pos), nn = static_cast<double>(n_neg);
  return (rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

EvaluationReport metric_panel(const ConfusionMatrix& cm, const Labels& truth, std::span<const double> scores) {
  if (!truth.empty() && truth.size() != cm.total())
    throw_usage("LengthMismatch", "label count differs from the confusion total");
  if (!scores.empty() && scores.size() != truth.size())
    throw_usage("LengthMismatch", "score count differs from label count");
  EvaluationReport r;
  r.confusion = cm;
  r.accuracy = cm.accuracy();
  const auto tn = static_cast<double>(cm.tn), fp = static_cast<double>(cm.fp), fn = static_cast<double>(cm.fn),
             tp = static_cast<double>(cm.tp);
  r.per_class[0] = class_metrics(tn, fn, fp, cm.tn + cm.fp);
  r.per_class[1] = class_metrics(tp, fp, fn, cm.tp + cm.fn);
  r.binary = r.per_class[1];
  const double total = static_cast<double>(cm.total());
  auto avg = [&](auto field) {
    const double macro = 0.5 * (r.per_class[0].*field + r.per_class[1].*field);
    const double weighted = ratio(static_cast<double>(r.per_class[0].support) * (r.per_class[0].*field) +
                                      static_cast<double>(r.per_class[1].support) * (r.per_class[1].*field),
                                  total);
    return std::pair{macro, weighted};
  };
  std::tie(r.macro.precision, r.weighted.precision) = avg(&ClassMetrics::precision);
  std::tie(r.macro.recall, r.weighted.recall) = avg(&ClassMetrics::recall);
  std::tie(r.macro.f1, r.weighted.f1) = avg(&ClassMetrics::f1);
  r.macro.support = r.weighted.support = cm.total();
  if (!scores.empty() && cm.tp + cm.fn > 0 && cm.tn + cm.fp > 0) r.auc = auc(truth, scores);
  return r;
}

EvaluationReport evaluate(const Classifier& model, const Matrix& x, const Labels& y) {
  if (x.rows() != y.size()) throw_usage("LengthMismatch", "row count differs from label count");
  Labels pred(y.size());
  std::vector<double> scores(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    scores[i] = model.score(x.row(i));
    pred[i] = model.predict(x.row(i));
  }
  return metric_panel(confusion(y, pred), y, scores);
}

std::string_view scoring_name(Scoring s) { return s == Scoring::F1 ? "f1" : "accuracy"; }

double score_predictions(Scoring scoring, const Labels& truth, const Labels& pred) {
  const auto cm = confusion(truth, pred);
  if (scoring == Scoring::Accuracy) return cm.accuracy();
  return metric_panel(cm).binary.f1;
}

bool ConfigResult::failed() const noexcept { return !diagnostic.empty() && std::isinf(mean) && mean < 0; }

namespace {

struct Fold {
  Matrix x_train, x_val;
  Labels y_train, y_val;
  std::unique_ptr<TreeData> tree_data;
};

Labels select_labels(const Labels& y, const std::vector<std::size_t>& idx) {
  Labels out(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) out[i] = y[idx[i]];
  return out;
}

Labels predict_all(const Classifier& c, const Matrix& x) {
  Labels p(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) p[i] = c.predict(x.row(i));
  return p;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double e : v) s += e;
  return s / static_cast<double>(v.size());
}


// Configurations that differ only in this axis share one fit per fold: a
// tree is fitted unpruned and pruned per ccp_alpha, and a forest's first n
// trees do not depend on n_estimators. Derived models equal separate fits.
std::string shared_axis(ModelKind kind, const ParamGrid& grid) {
  const char* name = kind == ModelKind::Tree ? "ccp_alpha" : kind == ModelKind::Forest ? "n_estimators" : nullptr;
  if (!name) return "";
  for (const auto& a : grid.axes)
    if (a.name == name && a.values.size() > 1) return name;
  return "";
}

std::vector<std::vector<std::size_t>> group_configs(const std::vector<ConfigResult>& configs,
                                                    const std::string& axis) {
  std::vector<std::vector<std::size_t>> groups;
  std::map<std::string, std::size_t> index;
  for (std::size_t c = 0; c < configs.size(); ++c) {
    if (axis.empty()) {
      groups.push_back({c});
      continue;
    }
    ParamSet rest;
    for (const auto& kv : configs[c].params)
      if (kv.first != axis) rest.push_back(kv);
    const auto [it, fresh] = index.emplace(params_text(rest), groups.size());
    if (fresh) groups.emplace_back();
    groups[it->second].push_back(c);
  }
  return groups;
}

void check_params(ModelKind kind, const ParamSet& params) {
  switch (kind) {
    case ModelKind::Logistic: logreg_params(params); break;
    case ModelKind::Tree: tree_params(params); break;
    case ModelKind::Forest: forest_params(params); break;
    case ModelKind::Knn: knn_params(params); break;
    case ModelKind::Svm: svm_params(params); break;
  }
}

// Parameters of the shared fit, or nothing when every member already failed.
std::optional<ParamSet> base_of(const std::vector<ConfigResult>& configs, const std::vector<std::size_t>& members,
                                const std::vector<std::string>& failure, const std::string& axis) {
  std::optional<ParamSet> base;
  std::size_t most_trees = 0;
  for (std::size_t m = 0; m < members.size(); ++m) {
    if (!failure[m].empty()) continue;
    const ParamSet& p = configs[members[m]].params;
    if (!base) base = p;
    if (axis == "n_estimators") {
      const std::size_t n = forest_params(p).n_estimators;
      if (n > most_trees) {
        most_trees = n;
        base = p;
      }
    }
  }
  if (base && axis == "ccp_alpha")
    for (auto& kv : *base)
      if (kv.first == axis) kv.second = 0.0;
  return base;
}

Classifier derive(const Classifier& base, const ParamSet& params, const std::string& axis) {
  Classifier c;
  c.kind = base.kind;
  c.params = params;
  if (axis == "ccp_alpha") {
    const auto tp = tree_params(params);
    TreeModel tree = std::get<TreeModel>(base.model);
    tree.params.ccp_alpha = tp.ccp_alpha;
    c.model = prune_cost_complexity(std::move(tree), tp.ccp_alpha);
  } else {
    const auto& forest = std::get<ForestModel>(base.model);
    const std::size_t n = forest_params(params).n_estimators;
    ForestModel f;
    f.bootstrap = forest.bootstrap;
    f.max_features = forest.max_features;
    f.seed = forest.seed;
    f.trees.assign(forest.trees.begin(), forest.trees.begin() + static_cast<std::ptrdiff_t>(n));
    c.model = std::move(f);
  }
  return c;
}
}  // namespace

GridSearchOutcome grid_search(ModelKind kind, const ParamGrid& grid, const Matrix& x, const Labels& y,
                              const GridSearchOptions& options) {
  grid.validate();
  if (x.rows() != y.size()) throw_usage("DimensionMismatch", "row count differs from label count");
  const auto fold_idx = stratified_kfold(y, options.folds, options.seed);
  const bool trees = kind == ModelKind::Tree || kind == ModelKind::Forest;

  std::vector<Fold> folds(options.folds);
  for (std::size_t f = 0; f < options.folds; ++f) {
    std::vector<std::size_t> train;
    for (std::size_t g = 0; g < options.folds; ++g)
      if (g != f) train.insert(train.end(), fold_idx[g].begin(), fold_idx[g].end());
    std::sort(train.begin(), train.end());
    folds[f].x_train = x.select_rows(train);
    folds[f].y_train = select_labels(y, train);
    folds[f].x_val = x.select_rows(fold_idx[f]);
    folds[f].y_val = select_labels(y, fold_idx[f]);
    if (trees) folds[f].tree_data = std::make_unique<TreeData>(folds[f].x_train, folds[f].y_train);
  }

  CvResult cv;
  cv.kind = kind;
  cv.scoring = options.scoring;
  cv.folds = options.folds;
  cv.seed = options.seed;
  cv.configs.resize(grid.size());
  for (std::size_t c = 0; c < grid.size(); ++c) cv.configs[c].params = grid.at(c);

  const std::string axis = shared_axis(kind, grid);
  const auto groups = group_configs(cv.configs, axis);
  parallel_for(groups.size(), options.threads, [&](std::size_t g) {
    const auto& members = groups[g];
    std::vector<std::string> failure(members.size());
    for (std::size_t m = 0; m < members.size(); ++m) {
      try {
        check_params(kind, cv.configs[members[m]].params);
      } catch (const Error& e) {
        failure[m] = e.what();
      }
    }
    std::vector<std::vector<double>> train_loss(members.size()), val_loss(members.size());
    std::optional<ParamSet> base_params = base_of(cv.configs, members, failure, axis);
    if (base_params) {
      try {
        for (auto& fold : folds) {
          FitContext ctx;
          ctx.tree_data = fold.tree_data.get();
          const Classifier base = fit_classifier(kind, *base_params, fold.x_train, fold.y_train, ctx);
          for (std::size_t m = 0; m < members.size(); ++m) {
            if (!failure[m].empty()) continue;
            ConfigResult& r = cv.configs[members[m]];
            const Classifier derived = axis.empty() ? Classifier{} : derive(base, r.params, axis);
            const Classifier& model = axis.empty() ? base : derived;
            r.fold_scores.push_back(score_predictions(options.scoring, fold.y_val, predict_all(model, fold.x_val)));
            if (options.train_scores)
              r.train_fold_scores.push_back(
                  score_predictions(options.scoring, fold.y_train, predict_all(model, fold.x_train)));
            if (auto lr = std::get_if<LogRegModel>(&model.model)) {
              train_loss[m].push_back(logreg_mean_logloss(*lr, fold.x_train, fold.y_train));
              val_loss[m].push_back(logreg_mean_logloss(*lr, fold.x_val, fold.y_val));
            }
          }
        }
      } catch (const Error& e) {
        for (auto& f : failure)
          if (f.empty()) f = e.what();
      }
    }
    for (std::size_t m = 0; m < members.size(); ++m) {
      ConfigResult& r = cv.configs[members[m]];
      if (!failure[m].empty()) {
        r.fold_scores.clear();
        r.train_fold_scores.clear();
        r.mean = r.train_mean = -std::numeric_limits<double>::infinity();
        r.std = 0.0;
        r.diagnostic = failure[m];
        continue;
      }
      r.mean = mean_of(r.fold_scores);
      double ss = 0.0;
      for (double s : r.fold_scores) ss += (s - r.mean) * (s - r.mean);
      r.std = std::sqrt(ss / static_cast<double>(r.fold_scores.size()));
      if (!r.train_fold_scores.empty()) r.train_mean = mean_of(r.train_fold_scores);
      if (!train_loss[m].empty()) {
        r.train_loss = mean_of(train_loss[m]);
        r.validation_loss = mean_of(val_loss[m]);
      }
    }
  });

  GridSearchOutcome out;
  bool any = false;
  for (std::size_t c = 0; c < cv.configs.size(); ++c) {
    if (cv.configs[c].failed()) continue;
    if (!any || cv.configs[c].mean > out.best_mean_score) {
      any = true;
      out.best_index = c;
      out.best_mean_score = cv.configs[c].mean;
    }
  }
  if (!any)
    throw_numerical("AllConfigurationsFailed",
                    "every " + std::string(model_kind_name(kind)) + " configuration failed; first: " +
                        cv.configs.front().diagnostic);
  out.best_params = cv.configs[out.best_index].params;
  FitContext ctx;
  ctx.threads = options.threads;
  out.model = fit_classifier(kind, out.best_params, x, y, ctx);
  out.cv = std::move(cv);
  return out;
}

std::vector<TuningPoint> tuning_curves(const CvResult& cv) {
  std::vector<TuningPoint> out;
  out.reserve(cv.configs.size());
  for (std::size_t i = 0; i < cv.configs.size(); ++i) {
    const auto& c = cv.configs[i];
    out.push_back({i, c.train_mean, c.mean, c.train_loss, c.validation_loss});
  }
  return out;
}

}  // namespace tabkit
