#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "tabkit/forest.hpp"
#include "tabkit/knn.hpp"
#include "tabkit/logreg.hpp"
#include "tabkit/svm.hpp"
#include "tabkit/tree.hpp"

namespace tabkit {

enum class ModelKind { Logistic, Tree, Forest, Knn, Svm };

inline constexpr ModelKind kAllModelKinds[] = {ModelKind::Logistic, ModelKind::Tree, ModelKind::Forest,
                                               ModelKind::Knn, ModelKind::Svm};

/// "logistic", "tree", "forest", "knn", "svm".
std::string_view model_kind_name(ModelKind kind);
/// Throws UnknownModelKind.
ModelKind parse_model_kind(std::string_view name);

/// A hyperparameter value. monostate stands for "None".
using ParamValue = std::variant<std::monostate, bool, std::int64_t, double, std::string>;
/// Named values in a fixed order.
using ParamSet = std::vector<std::pair<std::string, ParamValue>>;

/// "None", "true"/"false", integers, shortest round-trip doubles, strings.
std::string param_text(const ParamValue& v);
/// Inverse of param_text for grid files and flags: None, true, false,
/// integers, reals, otherwise a string.
ParamValue parse_param(std::string_view text);
nlohmann::ordered_json param_json(const ParamValue& v);
ParamValue param_from_json(const nlohmann::ordered_json& j);
/// "name=value, name=value".
std::string params_text(const ParamSet& params);

/// Typed parameters from a ParamSet. Unknown names throw UnknownParameter;
/// wrong types or values throw InvalidParameter. Missing names keep defaults
/// (random_state defaults to 21 for the forest).
LogRegParams logreg_params(const ParamSet& params);
TreeParams tree_params(const ParamSet& params);
ForestParams forest_params(const ParamSet& params);
KnnParams knn_params(const ParamSet& params);
SvmParams svm_params(const ParamSet& params);

using AnyModel = std::variant<LogRegModel, TreeModel, ForestModel, KnnModel, SvmModel>;

/// One fitted model of any kind behind a uniform interface.
struct Classifier {
  ModelKind kind = ModelKind::Logistic;
  ParamSet params;
  AnyModel model;

  /// Ranking score: probability (logistic), leaf or vote fraction
  /// (tree, forest), weighted neighbor fraction (kNN), signed decision
  /// value (SVM).
  double score(std::span<const double> x) const;
  int predict(std::span<const double> x) const;
  /// Output explained by Shapley values: the log-odds for logistic
  /// regression, score() otherwise.
  double explain_output(std::span<const double> x) const;
  std::string_view explain_scale() const { return kind == ModelKind::Logistic ? "log_odds" : "score"; }
  std::size_t n_features() const;
};

struct FitContext {
  unsigned threads = 1;
  /// Presorted training data reused across tree and forest fits; must
  /// describe the same x and y when set.
  const TreeData* tree_data = nullptr;
};

/// Throws whatever the underlying fit throws, plus parameter errors.
Classifier fit_classifier(ModelKind kind, const ParamSet& params, const Matrix& x, const Labels& y,
                          const FitContext& ctx = {});

/// Versioned model document:
///   {"format": "tabkit-model", "version": 1, "kind": ..., "params": {...},
///    "model": {...}}
nlohmann::ordered_json classifier_to_json(const Classifier& c);
/// Throws ModelFormat (data error) on a malformed document.
Classifier classifier_from_json(const nlohmann::ordered_json& j);

}  // namespace tabkit
