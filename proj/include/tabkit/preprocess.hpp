#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "tabkit/matrix.hpp"
#include "tabkit/tabular.hpp"

namespace tabkit {

/// Binary class labels, 0 = negative, 1 = positive.
using Labels = std::vector<int>;

// --- z-score standardization ------------------------------------------------

struct ScalerParams {
  std::vector<double> means;
  std::vector<double> stds;  ///< sample (n-1) standard deviations
};

struct StandardizeResult {
  Matrix z;
  ScalerParams params;
  /// Columns whose std is zero; they are mapped to all zeros.
  std::vector<std::size_t> zero_variance_columns;
};

/// z_ij = (x_ij - mean_j) / std_j. Throws EmptyMatrix (no columns) or
/// TooFewRows (n < 2).
StandardizeResult standardize_fit(const Matrix& x);
/// Same transform with frozen parameters. Throws DimensionMismatch.
Matrix standardize_apply(const ScalerParams& params, const Matrix& x);

// --- one-hot encoding -------------------------------------------------------

struct EncodingMap {
  std::string source;
  std::vector<std::string> levels;          ///< encoded levels, in output order
  std::vector<std::string> output_columns;  ///< "<source>_<level>" per encoded level
  bool drop_first = false;
  std::optional<std::string> dropped_level;
};

struct OneHotResult {
  Table table;
  EncodingMap map;
};

/// Replaces a categorical column by 0/1 indicator columns, one per level
/// (minus the alphabetically first level when drop_first). Missing cells give
/// an all-zero row. Throws ColumnNotFound, ColumnNotCategorical, or
/// DuplicateColumn if an indicator name collides with an existing column.
OneHotResult one_hot(const Table& table, const std::string& column, bool drop_first);

enum class UnseenLevelPolicy { Strict, Lenient };

struct EncodingApplication {
  Table table;
  std::vector<std::string> warnings;
};

/// Re-applies a fitted encoding to another table. A level absent from the
/// map is an UnseenLevel error (strict) or an all-zero row plus a warning
/// (lenient). The dropped level itself encodes as all zeros.
EncodingApplication apply_encoding(const Table& table, const EncodingMap& map, UnseenLevelPolicy policy);

// --- IQR capping ------------------------------------------------------------

struct IqrFences {
  double lower = 0;
  double upper = 0;
};

/// [q1 - k*IQR, q3 + k*IQR] with type-7 quartiles over the non-missing
/// values. Throws TooFewValues when fewer than 4 values are present.
IqrFences iqr_fences(std::span<const double> values, double k = 1.5);
/// Clamps into the fences; missing values stay missing.
std::vector<double> apply_fences(std::span<const double> values, const IqrFences& fences);
std::vector<double> iqr_cap(std::span<const double> values, double k = 1.5);

// --- stratified three-way split ----------------------------------------------

struct SplitRatios {
  double train = 0.7, validation = 0.1, test = 0.2;
};
struct SplitCounts {
  std::size_t train = 0, validation = 0, test = 0;
};
using SplitSpec = std::variant<SplitRatios, SplitCounts>;

struct SplitIndices {
  std::vector<std::size_t> train, validation, test;  ///< ascending row indices
  std::uint64_t seed = 0;
};

/// Rows of each class are shuffled (class c uses stream c of `seed`) and then
/// allotted so that split sizes hit their targets exactly and every per-class
/// count is within one row of its exact proportion. Ratio targets are rounded
/// for train and validation; test takes the remainder.
/// Throws LabelNotBinary, RatioSumInvalid, CountMismatch.
SplitIndices stratified_split(const Table& table, const std::string& label, const SplitSpec& spec,
                              std::uint64_t seed);
SplitIndices stratified_split(const Labels& labels, const SplitSpec& spec, std::uint64_t seed);

// --- table to model inputs ----------------------------------------------------

/// Dense matrix of the named numeric columns. Throws ColumnNotNumeric or
/// MissingValue (models never see missing cells).
Matrix numeric_matrix(const Table& table, const std::vector<std::string>& columns);

/// Binary labels from a numeric 0/1 column or a two-level categorical column
/// (the alphabetically second level is positive, e.g. "No" < "Yes").
/// Throws LabelNotBinary or MissingValue.
Labels binary_labels(const Table& table, const std::string& column);

}  // namespace tabkit
