#include "tabkit/preprocess.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "tabkit/error.hpp"
#include "tabkit/rng.hpp"

namespace tabkit {

StandardizeResult standardize_fit(const Matrix& x) {
  if (x.cols() == 0) throw_usage("EmptyMatrix", "no columns to standardize");
  if (x.rows() < 2) throw_usage("TooFewRows", "standardization needs at least 2 rows");
  StandardizeResult out;
  out.params.means.resize(x.cols());
  out.params.stds.resize(x.cols());
  for (std::size_t j = 0; j < x.cols(); ++j) {
    const auto col = x.column(j);
    out.params.means[j] = mean(col);
    out.params.stds[j] = sample_std(col);
    if (out.params.stds[j] == 0.0) out.zero_variance_columns.push_back(j);
  }
  out.z = standardize_apply(out.params, x);
  return out;
}

Matrix standardize_apply(const ScalerParams& params, const Matrix& x) {
  if (params.means.size() != params.stds.size())
    throw_usage("DimensionMismatch", "scaler means and stds differ in length");
  if (x.cols() != params.means.size()) {
    throw_usage("DimensionMismatch", "matrix has " + std::to_string(x.cols()) + " columns, scaler has " +
                                         std::to_string(params.means.size()));
  }
  Matrix z(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < x.cols(); ++j)
      z(i, j) = params.stds[j] > 0.0 ? (x(i, j) - params.means[j]) / params.stds[j] : 0.0;
  return z;
}

namespace {

std::vector<Column> indicator_columns(const Column& source, const EncodingMap& map,
                                      UnseenLevelPolicy policy, std::vector<std::string>* warnings) {
  const std::size_t n = source.size();
  std::vector<Column> out;
  for (const auto& name : map.output_columns) out.push_back(Column::make_numeric(name, std::vector<double>(n, 0.0)));
  std::size_t unseen = 0;
  for (std::size_t r = 0; r < n; ++r) {
    if (source.is_missing(r)) continue;
    const std::string& level = source.levels[static_cast<std::size_t>(source.codes[r])];
    auto it = std::find(map.levels.begin(), map.levels.end(), level);
    if (it != map.levels.end()) {
      out[static_cast<std::size_t>(it - map.levels.begin())].numeric[r] = 1.0;
      continue;
    }
    if (map.dropped_level && *map.dropped_level == level) continue;
    if (policy == UnseenLevelPolicy::Strict)
      throw_data("UnseenLevel", "column '" + map.source + "' row " + std::to_string(r) + ": level '" + level +
                                    "' was not seen when the encoding was fitted");
    ++unseen;
  }
  if (unseen && warnings)
    warnings->push_back("column '" + map.source + "': " + std::to_string(unseen) +
                        " rows with unseen levels encoded as all zeros");
  return out;
}

}  // namespace

OneHotResult one_hot(const Table& table, const std::string& column, bool drop_first) {
  auto index = table.find(column);
  if (!index) throw_usage("ColumnNotFound", "no column named '" + column + "'");
  const Column& source = table.column(*index);
  if (source.kind != ColumnKind::Categorical)
    throw_usage("ColumnNotCategorical", "column '" + column + "' is numeric");

  EncodingMap map;
  map.source = column;
  map.drop_first = drop_first;
  map.levels = source.levels;  // already sorted
  if (drop_first && !map.levels.empty()) {
    map.dropped_level = map.levels.front();
    map.levels.erase(map.levels.begin());
  }
  for (const auto& level : map.levels) map.output_columns.push_back(column + "_" + level);

  OneHotResult out{table, map};
  out.table.replace_column(*index, indicator_columns(source, map, UnseenLevelPolicy::Strict, nullptr));
  return out;
}

EncodingApplication apply_encoding(const Table& table, const EncodingMap& map, UnseenLevelPolicy policy) {
  auto index = table.find(map.source);
  if (!index) throw_usage("ColumnNotFound", "no column named '" + map.source + "'");
  const Column& source = table.column(*index);
  if (source.kind != ColumnKind::Categorical)
    throw_usage("ColumnNotCategorical", "column '" + map.source + "' is numeric");
  EncodingApplication out{table, {}};
  out.table.replace_column(*index, indicator_columns(source, map, policy, &out.warnings));
  return out;
}

IqrFences iqr_fences(std::span<const double> values, double k) {
  std::vector<double> present;
  for (double v : values)
    if (!std::isnan(v)) present.push_back(v);
  if (present.size() < 4)
    throw_data("TooFewValues", "IQR capping needs at least 4 values, got " + std::to_string(present.size()));
  std::sort(present.begin(), present.end());
  const double q1 = quantile_sorted(present, 0.25);
  const double q3 = quantile_sorted(present, 0.75);
  const double iqr = q3 - q1;
  return {q1 - k * iqr, q3 + k * iqr};
}

std::vector<double> apply_fences(std::span<const double> values, const IqrFences& fences) {
  std::vector<double> out(values.begin(), values.end());
  for (double& v : out)
    if (!std::isnan(v)) v = std::clamp(v, fences.lower, fences.upper);
  return out;
}

std::vector<double> iqr_cap(std::span<const double> values, double k) {
  return apply_fences(values, iqr_fences(values, k));
}

SplitIndices stratified_split(const Labels& labels, const SplitSpec& spec, std::uint64_t seed) {
  const std::size_t n = labels.size();
  std::array<std::vector<std::size_t>, 2> by_class;
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] != 0 && labels[i] != 1) throw_data("LabelNotBinary", "labels must be 0 or 1");
    by_class[static_cast<std::size_t>(labels[i])].push_back(i);
  }

  std::array<std::size_t, 3> targets{};
  if (const auto* r = std::get_if<SplitRatios>(&spec)) {
    const double sum = r->train + r->validation + r->test;
    if (std::abs(sum - 1.0) > 1e-9 || r->train < 0 || r->validation < 0 || r->test < 0)
      throw_usage("RatioSumInvalid", "split ratios must be nonnegative and sum to 1");
    targets[0] = static_cast<std::size_t>(std::llround(r->train * static_cast<double>(n)));
    targets[1] = static_cast<std::size_t>(std::llround(r->validation * static_cast<double>(n)));
    if (targets[0] + targets[1] > n) targets[1] = n - targets[0];
    targets[2] = n - targets[0] - targets[1];
  } else {
    const auto& c = std::get<SplitCounts>(spec);
    if (c.train + c.validation + c.test != n)
      throw_usage("CountMismatch", "split counts sum to " + std::to_string(c.train + c.validation + c.test) +
                                       ", table has " + std::to_string(n) + " rows");
    targets = {c.train, c.validation, c.test};
  }

  // Class 0 is rounded by largest remainder; class 1 takes the rest of each
  // target, which keeps both classes within one row of proportional.
  std::array<std::array<std::size_t, 3>, 2> alloc{};
  const double n0 = static_cast<double>(by_class[0].size());
  std::array<double, 3> remainder{};
  std::size_t assigned = 0;
  for (std::size_t s = 0; s < 3; ++s) {
    const double ideal = n == 0 ? 0.0 : n0 * static_cast<double>(targets[s]) / static_cast<double>(n);
    alloc[0][s] = static_cast<std::size_t>(std::floor(ideal));
    remainder[s] = ideal - static_cast<double>(alloc[0][s]);
    assigned += alloc[0][s];
  }
  std::array<std::size_t, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t i = 0; assigned < by_class[0].size(); ++i, ++assigned) ++alloc[0][order[i % 3]];
  for (std::size_t s = 0; s < 3; ++s) alloc[1][s] = targets[s] - alloc[0][s];

  SplitIndices out;
  out.seed = seed;
  std::array<std::vector<std::size_t>*, 3> parts{&out.train, &out.validation, &out.test};
  for (std::size_t c = 0; c < 2; ++c) {
    SplitMix64 rng(stream_seed(seed, c));
    rng.shuffle(std::span<std::size_t>(by_class[c]));
    std::size_t pos = 0;
    for (std::size_t s = 0; s < 3; ++s)
      for (std::size_t k = 0; k < alloc[c][s]; ++k) parts[s]->push_back(by_class[c][pos++]);
  }
  for (auto* p : parts) std::sort(p->begin(), p->end());
  return out;
}

SplitIndices stratified_split(const Table& table, const std::string& label, const SplitSpec& spec,
                              std::uint64_t seed) {
  return stratified_split(binary_labels(table, label), spec, seed);
}

Matrix numeric_matrix(const Table& table, const std::vector<std::string>& columns) {
  Matrix m(table.n_rows(), columns.size());
  for (std::size_t j = 0; j < columns.size(); ++j) {
    const Column& c = table.column(columns[j]);
    if (c.kind != ColumnKind::Numeric) throw_usage("ColumnNotNumeric", "column '" + columns[j] + "' is categorical");
    for (std::size_t i = 0; i < table.n_rows(); ++i) {
      if (std::isnan(c.numeric[i]))
        throw_data("MissingValue", "column '" + columns[j] + "' row " + std::to_string(i) + " is missing");
      m(i, j) = c.numeric[i];
    }
  }
  return m;
}

Labels binary_labels(const Table& table, const std::string& column) {
  const Column& c = table.column(column);
  Labels y(table.n_rows());
  if (c.kind == ColumnKind::Numeric) {
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double v = c.numeric[i];
      if (std::isnan(v)) throw_data("MissingValue", "label '" + column + "' row " + std::to_string(i) + " is missing");
      if (v != 0.0 && v != 1.0) throw_data("LabelNotBinary", "label '" + column + "' has value " + format_number(v));
      y[i] = static_cast<int>(v);
    }
  } else {
    if (c.levels.size() != 2)
      throw_data("LabelNotBinary", "label '" + column + "' has " + std::to_string(c.levels.size()) + " levels");
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (c.codes[i] < 0) throw_data("MissingValue", "label '" + column + "' row " + std::to_string(i) + " is missing");
      y[i] = c.codes[i];
    }
  }
  return y;
}

}  // namespace tabkit
