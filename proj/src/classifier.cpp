#include "tabkit/classifier.hpp"

#include <charconv>
#include <cmath>

#include "tabkit/error.hpp"
#include "tabkit/tabular.hpp"

namespace tabkit {

using json = nlohmann::ordered_json;

std::string_view model_kind_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::Logistic: return "logistic";
    case ModelKind::Tree: return "tree";
    case ModelKind::Forest: return "forest";
    case ModelKind::Knn: return "knn";
    case ModelKind::Svm: return "svm";
  }
  return "?";
}

ModelKind parse_model_kind(std::string_view name) {
  for (auto k : kAllModelKinds)
    if (model_kind_name(k) == name) return k;
  throw_usage("UnknownModelKind", "unknown model kind '" + std::string(name) + "'");
}

std::string param_text(const ParamValue& v) {
  struct {
    std::string operator()(std::monostate) const { return "None"; }
    std::string operator()(bool b) const { return b ? "true" : "false"; }
    std::string operator()(std::int64_t i) const { return std::to_string(i); }
    std::string operator()(double d) const { return format_number(d); }
    std::string operator()(const std::string& s) const { return s; }
  } visitor;
  return std::visit(visitor, v);
}

ParamValue parse_param(std::string_view t) {
  if (t == "None" || t == "none" || t == "null") return std::monostate{};
  if (t == "true" || t == "True") return true;
  if (t == "false" || t == "False") return false;
  std::int64_t i = 0;
  auto [pi, ei] = std::from_chars(t.data(), t.data() + t.size(), i);
  if (ei == std::errc{} && pi == t.data() + t.size()) return i;
  double d = 0.0;
  auto [pd, ed] = std::from_chars(t.data(), t.data() + t.size(), d);
  if (ed == std::errc{} && pd == t.data() + t.size()) return d;
  return std::string(t);
}

json param_json(const ParamValue& v) {
  struct {
    json operator()(std::monostate) const { return nullptr; }
    json operator()(bool b) const { return b; }
    json operator()(std::int64_t i) const { return i; }
    json operator()(double d) const { return d; }
    json operator()(const std::string& s) const { return s; }
  } visitor;
  return std::visit(visitor, v);
}

ParamValue param_from_json(const json& j) {
  if (j.is_null()) return std::monostate{};
  if (j.is_boolean()) return j.get<bool>();
  if (j.is_number_integer()) return j.get<std::int64_t>();
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) return j.get<std::string>();
  throw_data("ModelFormat", "unsupported parameter value " + j.dump());
}

std::string params_text(const ParamSet& params) {
  std::string out;
  for (const auto& [k, v] : params) {
    if (!out.empty()) out += ", ";
    out += k + "=" + param_text(v);
  }
  return out;
}

namespace {

[[noreturn]] void bad(const std::string& name, const ParamValue& v, const std::string& expected) {
  throw_usage("InvalidParameter", name + "=" + param_text(v) + " (expected " + expected + ")");
}

double as_real(const std::string& name, const ParamValue& v) {
  if (auto d = std::get_if<double>(&v)) return *d;
  if (auto i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
  bad(name, v, "a number");
}

std::size_t as_count(const std::string& name, const ParamValue& v, std::size_t min = 1) {
  if (auto i = std::get_if<std::int64_t>(&v); i && *i >= static_cast<std::int64_t>(min))
    return static_cast<std::size_t>(*i);
  bad(name, v, "an integer >= " + std::to_string(min));
}

std::optional<std::size_t> as_optional_count(const std::string& name, const ParamValue& v, std::size_t min = 1) {
  if (std::holds_alternative<std::monostate>(v)) return std::nullopt;
  return as_count(name, v, min);
}

bool as_bool(const std::string& name, const ParamValue& v) {
  if (auto b = std::get_if<bool>(&v)) return *b;
  bad(name, v, "true or false");
}

std::string as_choice(const std::string& name, const ParamValue& v, std::initializer_list<const char*> choices) {
  const std::string s = param_text(v);
  std::string expected;
  for (const char* c : choices) {
    if (s == c) return s;
    expected += (expected.empty() ? "" : "|") + std::string(c);
  }
  bad(name, v, expected);
}

[[noreturn]] void unknown(ModelKind kind, const std::string& name) {
  throw_usage("UnknownParameter", "'" + name + "' is not a " + std::string(model_kind_name(kind)) + " parameter");
}

Criterion criterion_of(const std::string& name, const ParamValue& v) {
  const auto s = as_choice(name, v, {"gini", "entropy", "log_loss"});
  return s == "gini" ? Criterion::Gini : s == "entropy" ? Criterion::Entropy : Criterion::LogLoss;
}

MaxFeatures max_features_of(const std::string& name, const ParamValue& v) {
  const auto s = as_choice(name, v, {"None", "sqrt", "log2"});
  return s == "sqrt" ? MaxFeatures::Sqrt : s == "log2" ? MaxFeatures::Log2 : MaxFeatures::All;
}

ClassWeight class_weight_of(const std::string& name, const ParamValue& v) {
  return as_choice(name, v, {"None", "balanced"}) == "balanced" ? ClassWeight::Balanced : ClassWeight::None;
}

std::uint64_t seed_of(const std::string& name, const ParamValue& v) {
  if (auto i = std::get_if<std::int64_t>(&v)) return static_cast<std::uint64_t>(*i);
  bad(name, v, "an integer");
}

}  // namespace

LogRegParams logreg_params(const ParamSet& params) {
  LogRegParams p;
  for (const auto& [k, v] : params) {
    if (k == "penalty") p.penalty = as_choice(k, v, {"l1", "l2"}) == "l1" ? Penalty::L1 : Penalty::L2;
    else if (k == "C") {
      p.c = as_real(k, v);
      if (!(p.c > 0.0)) bad(k, v, "a positive number");
    } else if (k == "max_iter") p.max_iter = as_count(k, v);
    else if (k == "tol") p.tol = as_real(k, v);
    else unknown(ModelKind::Logistic, k);
  }
  return p;
}

TreeParams tree_params(const ParamSet& params) {
  TreeParams p;
  for (const auto& [k, v] : params) {
    if (k == "criterion") p.criterion = criterion_of(k, v);
    else if (k == "max_depth") p.max_depth = as_optional_count(k, v);
    else if (k == "min_samples_split") p.min_samples_split = as_count(k, v, 2);
    else if (k == "min_samples_leaf") p.min_samples_leaf = as_count(k, v);
    else if (k == "max_features") p.max_features = max_features_of(k, v);
    else if (k == "max_leaf_nodes") p.max_leaf_nodes = as_optional_count(k, v, 2);
    else if (k == "min_impurity_decrease") p.min_impurity_decrease = as_real(k, v);
    else if (k == "splitter") p.splitter = as_choice(k, v, {"best", "random"}) == "best" ? Splitter::Best : Splitter::Random;
    else if (k == "class_weight") p.class_weight = class_weight_of(k, v);
    else if (k == "ccp_alpha") p.ccp_alpha = as_real(k, v);
    else if (k == "random_state") p.seed = seed_of(k, v);
    else unknown(ModelKind::Tree, k);
  }
  return p;
}

ForestParams forest_params(const ParamSet& params) {
  ForestParams p;
  for (const auto& [k, v] : params) {
    if (k == "n_estimators") p.n_estimators = as_count(k, v);
    else if (k == "max_depth") p.max_depth = as_optional_count(k, v);
    else if (k == "min_samples_split") p.min_samples_split = as_count(k, v, 2);
    else if (k == "min_samples_leaf") p.min_samples_leaf = as_count(k, v);
    else if (k == "max_features") p.max_features = max_features_of(k, v);
    else if (k == "bootstrap") p.bootstrap = as_bool(k, v);
    else if (k == "criterion") p.criterion = criterion_of(k, v);
    else if (k == "class_weight") p.class_weight = class_weight_of(k, v);
    else if (k == "random_state") p.seed = seed_of(k, v);
    else unknown(ModelKind::Forest, k);
  }
  return p;
}

KnnParams knn_params(const ParamSet& params) {
  KnnParams p;
  for (const auto& [k, v] : params) {
    if (k == "n_neighbors") p.k = as_count(k, v);
    else if (k == "weights") p.weights = as_choice(k, v, {"uniform", "distance"}) == "uniform" ? KnnWeights::Uniform : KnnWeights::Distance;
    else if (k == "metric") p.metric = as_choice(k, v, {"euclidean", "manhattan"}) == "euclidean" ? KnnMetric::Euclidean : KnnMetric::Manhattan;
    else unknown(ModelKind::Knn, k);
  }
  return p;
}

SvmParams svm_params(const ParamSet& params) {
  SvmParams p;
  for (const auto& [k, v] : params) {
    if (k == "C") {
      p.c = as_real(k, v);
      if (!(p.c > 0.0)) bad(k, v, "a positive number");
    } else if (k == "gamma") {
      if (std::holds_alternative<std::string>(v)) p.gamma_rule = as_choice(k, v, {"scale", "auto"}) == "scale" ? GammaRule::Scale : GammaRule::Auto;
      else p.gamma = as_real(k, v);
    } else if (k == "kernel") as_choice(k, v, {"rbf"});
    else if (k == "probability") {
      if (as_bool(k, v)) bad(k, v, "false");
    } else if (k == "tol") p.tol = as_real(k, v);
    else if (k == "max_iter") p.max_iter = as_count(k, v);
    else unknown(ModelKind::Svm, k);
  }
  return p;
}

double Classifier::score(std::span<const double> x) const {
  return std::visit(
      [&](const auto& m) -> double {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, LogRegModel>) return m.predict_proba(x);
        else return m.score(x);
      },
      model);
}

int Classifier::predict(std::span<const double> x) const {
  return std::visit([&](const auto& m) { return m.predict(x); }, model);
}

double Classifier::explain_output(std::span<const double> x) const {
  if (auto m = std::get_if<LogRegModel>(&model)) return m->decision(x);
  return score(x);
}

std::size_t Classifier::n_features() const {
  return std::visit(
      [](const auto& m) -> std::size_t {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, LogRegModel>) return m.weights.size();
        else if constexpr (std::is_same_v<M, TreeModel>) return m.n_features;
        else if constexpr (std::is_same_v<M, ForestModel>) return m.trees.empty() ? 0 : m.trees.front().n_features;
        else if constexpr (std::is_same_v<M, KnnModel>) return m.x.cols();
        else return m.support_vectors.cols();
      },
      model);
}

Classifier fit_classifier(ModelKind kind, const ParamSet& params, const Matrix& x, const Labels& y,
                          const FitContext& ctx) {
  Classifier c;
  c.kind = kind;
  c.params = params;
  switch (kind) {
    case ModelKind::Logistic:
      c.model = logreg_fit(x, y, logreg_params(params));
      break;
    case ModelKind::Tree: {
      const auto p = tree_params(params);
      c.model = ctx.tree_data ? tree_fit(*ctx.tree_data, p) : tree_fit(x, y, p);
      break;
    }
    case ModelKind::Forest: {
      auto p = forest_params(params);
      p.threads = ctx.threads;
      c.model = ctx.tree_data ? forest_fit(*ctx.tree_data, p) : forest_fit(x, y, p);
      break;
    }
    case ModelKind::Knn:
      c.model = knn_fit(x, y, knn_params(params));
      break;
    case ModelKind::Svm:
      c.model = svm_fit(x, y, svm_params(params));
      break;
  }
  return c;
}

// --- JSON ---------------------------------------------------------------------

namespace {

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) rows.push_back(std::vector<double>(m.row(r).begin(), m.row(r).end()));
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", rows}};
}

Matrix matrix_from(const json& j) {
  Matrix m(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>());
  const auto& data = j.at("data");
  if (data.size() != m.rows()) throw_data("ModelFormat", "matrix row count mismatch");
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto row = data[r].get<std::vector<double>>();
    if (row.size() != m.cols()) throw_data("ModelFormat", "matrix column count mismatch");
    std::copy(row.begin(), row.end(), m.row(r).begin());
  }
  return m;
}

json tree_json(const TreeModel& t) {
  json nodes = json::array();
  for (const auto& n : t.nodes)
    nodes.push_back({{"feature", n.feature},
                     {"threshold", n.threshold},
                     {"left", n.left},
                     {"right", n.right},
                     {"impurity", n.impurity},
                     {"value", n.value},
                     {"counts", n.counts},
                     {"impurity_decrease", n.impurity_decrease}});
  return json{{"n_features", t.n_features}, {"nodes", nodes}};
}

TreeModel tree_from(const json& j) {
  TreeModel t;
  t.n_features = j.at("n_features").get<std::size_t>();
  for (const auto& e : j.at("nodes")) {
    TreeNode n;
    n.feature = e.at("feature").get<int>();
    n.threshold = e.at("threshold").get<double>();
    n.left = e.at("left").get<int>();
    n.right = e.at("right").get<int>();
    n.impurity = e.at("impurity").get<double>();
    n.value = e.at("value").get<std::array<double, 2>>();
    n.counts = e.at("counts").get<std::array<std::size_t, 2>>();
    n.impurity_decrease = e.at("impurity_decrease").get<double>();
    t.nodes.push_back(n);
  }
  const auto count = static_cast<int>(t.nodes.size());
  if (count == 0) throw_data("ModelFormat", "tree without nodes");
  for (const auto& n : t.nodes)
    if (!n.is_leaf() && (n.feature >= static_cast<int>(t.n_features) || n.left <= 0 || n.right <= 0 ||
                         n.left >= count || n.right >= count))
      throw_data("ModelFormat", "tree node references out of range");
  return t;
}

json model_json(const AnyModel& model) {
  return std::visit(
      [](const auto& m) -> json {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, LogRegModel>) {
          return {{"weights", m.weights}, {"bias", m.bias}, {"penalty", m.penalty == Penalty::L1 ? "l1" : "l2"},
                  {"c", m.c}, {"converged", m.converged}, {"n_iter", m.n_iter}, {"sparsity", m.zero_weight_count()}};
        } else if constexpr (std::is_same_v<M, TreeModel>) {
          return tree_json(m);
        } else if constexpr (std::is_same_v<M, ForestModel>) {
          json trees = json::array();
          for (const auto& t : m.trees) trees.push_back(tree_json(t));
          return {{"bootstrap", m.bootstrap}, {"seed", m.seed}, {"trees", trees}};
        } else if constexpr (std::is_same_v<M, KnnModel>) {
          return {{"k", m.params.k},
                  {"weights", m.params.weights == KnnWeights::Uniform ? "uniform" : "distance"},
                  {"metric", m.params.metric == KnnMetric::Euclidean ? "euclidean" : "manhattan"},
                  {"x", matrix_json(m.x)},
                  {"y", m.y}};
        } else {
          return {{"support_vectors", matrix_json(m.support_vectors)}, {"dual_coef", m.dual_coef},
                  {"intercept", m.intercept}, {"c", m.c}, {"gamma", m.gamma}, {"kernel", "rbf"},
                  {"converged", m.converged}, {"n_iter", m.n_iter}};
        }
      },
      model);
}

}  // namespace

json classifier_to_json(const Classifier& c) {
  json params = json::object();
  for (const auto& [k, v] : c.params) params[k] = param_json(v);
  return json{{"format", "tabkit-model"},
              {"version", 1},
              {"kind", std::string(model_kind_name(c.kind))},
              {"params", params},
              {"model", model_json(c.model)}};
}

Classifier classifier_from_json(const json& j) {
  try {
    if (j.value("format", "") != "tabkit-model") throw_data("ModelFormat", "not a tabkit model document");
    if (j.value("version", 0) != 1) throw_data("ModelFormat", "unsupported model version");
    Classifier c;
    try {
      c.kind = parse_model_kind(j.at("kind").get<std::string>());
    } catch (const Error& e) {
      throw_data("ModelFormat", e.what());
    }
    for (const auto& [k, v] : j.at("params").items()) c.params.emplace_back(k, param_from_json(v));
    const auto& m = j.at("model");
    switch (c.kind) {
      case ModelKind::Logistic: {
        LogRegModel lr;
        lr.weights = m.at("weights").get<std::vector<double>>();
        lr.bias = m.at("bias").get<double>();
        lr.penalty = m.at("penalty").get<std::string>() == "l1" ? Penalty::L1 : Penalty::L2;
        lr.c = m.at("c").get<double>();
        lr.converged = m.at("converged").get<bool>();
        lr.n_iter = m.at("n_iter").get<std::size_t>();
        c.model = lr;
        break;
      }
      case ModelKind::Tree:
        c.model = tree_from(m);
        break;
      case ModelKind::Forest: {
        ForestModel f;
        f.bootstrap = m.at("bootstrap").get<bool>();
        f.seed = m.at("seed").get<std::uint64_t>();
        for (const auto& t : m.at("trees")) f.trees.push_back(tree_from(t));
        if (f.trees.empty()) throw_data("ModelFormat", "forest without trees");
        c.model = f;
        break;
      }
      case ModelKind::Knn: {
        KnnModel k;
        k.params.k = m.at("k").get<std::size_t>();
        k.params.weights = m.at("weights").get<std::string>() == "distance" ? KnnWeights::Distance : KnnWeights::Uniform;
        k.params.metric = m.at("metric").get<std::string>() == "manhattan" ? KnnMetric::Manhattan : KnnMetric::Euclidean;
        k.x = matrix_from(m.at("x"));
        k.y = m.at("y").get<Labels>();
        if (k.y.size() != k.x.rows() || k.params.k == 0 || k.params.k > k.y.size())
          throw_data("ModelFormat", "inconsistent kNN model");
        c.model = k;
        break;
      }
      case ModelKind::Svm: {
        SvmModel s;
        s.support_vectors = matrix_from(m.at("support_vectors"));
        s.dual_coef = m.at("dual_coef").get<std::vector<double>>();
        s.intercept = m.at("intercept").get<double>();
        s.c = m.at("c").get<double>();
        s.gamma = m.at("gamma").get<double>();
        s.converged = m.at("converged").get<bool>();
        s.n_iter = m.at("n_iter").get<std::size_t>();
        if (s.dual_coef.size() != s.support_vectors.rows()) throw_data("ModelFormat", "inconsistent SVM model");
        c.model = s;
        break;
      }
    }
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw_data("ModelFormat", e.what());
  }
}

}  // namespace tabkit
