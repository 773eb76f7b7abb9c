#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tabkit/classifier.hpp"

namespace tabkit {

struct ParamAxis {
  std::string name;
  std::vector<ParamValue> values;
};

/// Ordered axes. Configurations enumerate the cartesian product with the
/// first axis varying slowest.
struct ParamGrid {
  std::vector<ParamAxis> axes;

  std::size_t size() const;
  /// Configuration number `index` in enumeration order.
  ParamSet at(std::size_t index) const;
  /// Throws EmptyGrid when there are no axes or an axis has no values.
  void validate() const;
};

/// The published search grids for each model kind.
ParamGrid default_grid(ModelKind kind);

/// k disjoint folds, each sorted ascending. Rows of each class are shuffled
/// (class c with stream c of `seed`) and dealt round-robin, the dealing
/// position carrying over from one class to the next. Throws
/// LabelNotBinary, InvalidParameter (k < 2) or ClassTooSmall.
std::vector<std::vector<std::size_t>> stratified_kfold(const Labels& y, std::size_t k, std::uint64_t seed);

struct ConfusionMatrix {
  std::size_t tn = 0, fp = 0, fn = 0, tp = 0;

  std::size_t total() const noexcept { return tn + fp + fn + tp; }
  double accuracy() const noexcept {
    return total() ? static_cast<double>(tn + tp) / static_cast<double>(total()) : 0.0;
  }
  bool operator==(const ConfusionMatrix&) const = default;
};

/// Class 1 is positive. Throws LengthMismatch or LabelNotBinary.
ConfusionMatrix confusion(const Labels& truth, const Labels& pred);

struct ClassMetrics {
  double precision = 0, recall = 0, f1 = 0;
  std::size_t support = 0;
};

struct EvaluationReport {
  ConfusionMatrix confusion;
  double accuracy = 0;
  std::array<ClassMetrics, 2> per_class;  ///< index = class label
  ClassMetrics macro, weighted;
  ClassMetrics binary;                    ///< positive class only
  std::optional<double> auc;              ///< absent without scores or with one class
};

/// Metrics from confusion counts; a ratio with a zero denominator is 0.
/// AUC is computed when `truth` and `scores` are given and both classes
/// occur. Throws LengthMismatch when truth or scores disagree with the
/// matrix total.
EvaluationReport metric_panel(const ConfusionMatrix& cm, const Labels& truth = {},
                              std::span<const double> scores = {});

/// P(score_pos > score_neg) + P(tie) / 2 over all positive/negative pairs.
/// Throws SingleClass or LengthMismatch.
double auc(const Labels& truth, std::span<const double> scores);

/// Predictions and scores of a model over every row, then metric_panel.
EvaluationReport evaluate(const Classifier& model, const Matrix& x, const Labels& y);

enum class Scoring { F1, Accuracy };
std::string_view scoring_name(Scoring s);
/// Binary F1 on class 1, or accuracy.
double score_predictions(Scoring scoring, const Labels& truth, const Labels& pred);

struct ConfigResult {
  ParamSet params;
  std::vector<double> fold_scores;  ///< held-out fold scores
  double mean = 0, std = 0;         ///< std over folds, population form
  std::vector<double> train_fold_scores;
  double train_mean = 0;
  /// Mean log-loss over folds, logistic regression only.
  std::optional<double> train_loss, validation_loss;
  /// Empty on success. A failed configuration scores -infinity.
  std::string diagnostic;

  bool failed() const noexcept;
};

struct CvResult {
  ModelKind kind = ModelKind::Logistic;
  Scoring scoring = Scoring::F1;
  std::size_t folds = 5;
  std::uint64_t seed = 0;
  std::vector<ConfigResult> configs;  ///< grid enumeration order
};

struct GridSearchOptions {
  Scoring scoring = Scoring::F1;
  std::size_t folds = 5;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  bool train_scores = true;
};

struct GridSearchOutcome {
  std::size_t best_index = 0;
  ParamSet best_params;
  double best_mean_score = 0;
  Classifier model;  ///< best configuration refit on all rows
  CvResult cv;
};

/// Exhaustive k-fold search. Configurations run in parallel; results land in
/// enumeration order, and the first configuration with the top mean wins.
/// Throws EmptyGrid, the fold errors of stratified_kfold, or
/// AllConfigurationsFailed.
GridSearchOutcome grid_search(ModelKind kind, const ParamGrid& grid, const Matrix& x, const Labels& y,
                              const GridSearchOptions& options = {});

struct TuningPoint {
  std::size_t index = 0;
  double train_score = 0, validation_score = 0;
  std::optional<double> train_loss, validation_loss;
};

/// One point per configuration, in enumeration order.
std::vector<TuningPoint> tuning_curves(const CvResult& cv);

}  // namespace tabkit
