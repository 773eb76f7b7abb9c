#include "tabkit/tabular.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>
#include <set>
#include <unordered_set>

#include "tabkit/error.hpp"

namespace tabkit {

Column Column::make_numeric(std::string name, std::vector<double> values) {
  Column c;
  c.name = std::move(name);
  c.kind = ColumnKind::Numeric;
  c.numeric = std::move(values);
  for (double& v : c.numeric)
    if (std::isnan(v)) v = std::numeric_limits<double>::quiet_NaN();
  return c;
}

Column Column::make_categorical(std::string name,
                                const std::vector<std::optional<std::string>>& values) {
  Column c;
  c.name = std::move(name);
  c.kind = ColumnKind::Categorical;
  std::set<std::string> distinct;
  for (const auto& v : values)
    if (v) distinct.insert(*v);
  c.levels.assign(distinct.begin(), distinct.end());
  c.codes.reserve(values.size());
  for (const auto& v : values) {
    if (!v) {
      c.codes.push_back(-1);
      continue;
    }
    auto it = std::lower_bound(c.levels.begin(), c.levels.end(), *v);
    c.codes.push_back(static_cast<std::int32_t>(it - c.levels.begin()));
  }
  return c;
}

bool Column::is_missing(std::size_t row) const noexcept {
  return kind == ColumnKind::Numeric ? std::isnan(numeric[row]) : codes[row] < 0;
}

std::string Column::cell_text(std::size_t row) const {
  if (is_missing(row)) return {};
  if (kind == ColumnKind::Numeric) return format_number(numeric[row]);
  return levels[static_cast<std::size_t>(codes[row])];
}

std::optional<std::int32_t> Column::level_index(const std::string& level) const {
  auto it = std::lower_bound(levels.begin(), levels.end(), level);
  if (it == levels.end() || *it != level) return std::nullopt;
  return static_cast<std::int32_t>(it - levels.begin());
}

void Table::add_column(Column column) {
  if (find(column.name)) throw_usage("DuplicateColumn", "column '" + column.name + "' already exists");
  if (!columns_.empty() && column.size() != n_rows_) {
    throw_usage("RowCountMismatch", "column '" + column.name + "' has " +
                                        std::to_string(column.size()) + " rows, table has " +
                                        std::to_string(n_rows_));
  }
  if (columns_.empty()) n_rows_ = column.size();
  columns_.push_back(std::move(column));
}

void Table::replace_column(std::size_t index, std::vector<Column> replacement) {
  if (index >= columns_.size()) throw_usage("ColumnNotFound", "column index out of range");
  std::vector<Column> rebuilt;
  rebuilt.reserve(columns_.size() + replacement.size());
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (i == index) {
      for (auto& c : replacement) rebuilt.push_back(std::move(c));
    } else {
      rebuilt.push_back(std::move(columns_[i]));
    }
  }
  const std::size_t rows = n_rows_;
  columns_.clear();
  n_rows_ = 0;
  for (auto& c : rebuilt) add_column(std::move(c));
  if (columns_.empty()) n_rows_ = 0;
  else if (n_rows_ != rows) throw_usage("RowCountMismatch", "replacement changed the row count");
}

std::optional<std::size_t> Table::find(const std::string& name) const {
  for (std::size_t i = 0; i < columns_.size(); ++i)
    if (columns_[i].name == name) return i;
  return std::nullopt;
}

const Column& Table::column(const std::string& name) const {
  auto i = find(name);
  if (!i) throw_usage("ColumnNotFound", "no column named '" + name + "'");
  return columns_[*i];
}

Column& Table::column(const std::string& name) {
  auto i = find(name);
  if (!i) throw_usage("ColumnNotFound", "no column named '" + name + "'");
  return columns_[*i];
}

std::vector<std::string> Table::column_names() const {
  std::vector<std::string> names;
  for (const auto& c : columns_) names.push_back(c.name);
  return names;
}

std::vector<std::string> Table::numeric_column_names() const {
  std::vector<std::string> names;
  for (const auto& c : columns_)
    if (c.kind == ColumnKind::Numeric) names.push_back(c.name);
  return names;
}

Table Table::select_rows(std::span<const std::size_t> rows) const {
  Table out(name_);
  for (const auto& c : columns_) {
    Column s;
    s.name = c.name;
    s.kind = c.kind;
    s.levels = c.levels;
    if (c.kind == ColumnKind::Numeric) {
      s.numeric.reserve(rows.size());
      for (auto r : rows) s.numeric.push_back(c.numeric.at(r));
    } else {
      s.codes.reserve(rows.size());
      for (auto r : rows) s.codes.push_back(c.codes.at(r));
    }
    out.add_column(std::move(s));
  }
  return out;
}

std::size_t AuditReport::missing(const std::string& column) const {
  for (const auto& [name, count] : missing_per_column)
    if (name == column) return count;
  throw_usage("ColumnNotFound", "no column named '" + column + "'");
}

AuditReport audit(const Table& table) {
  AuditReport report;
  report.n_rows = table.n_rows();
  for (const auto& c : table.columns()) {
    std::size_t missing = 0;
    for (std::size_t r = 0; r < c.size(); ++r) missing += c.is_missing(r) ? 1 : 0;
    report.missing_per_column.emplace_back(c.name, missing);
  }
  // Row keys are the raw cell bytes: numeric bit patterns (missing is a
  // canonical NaN) and categorical level indices.
  std::unordered_set<std::string> seen;
  seen.reserve(table.n_rows());
  std::string key;
  for (std::size_t r = 0; r < table.n_rows(); ++r) {
    key.clear();
    for (const auto& c : table.columns()) {
      char buf[sizeof(double)];
      if (c.kind == ColumnKind::Numeric) {
        std::memcpy(buf, &c.numeric[r], sizeof(double));
        key.append(buf, sizeof(double));
      } else {
        std::memcpy(buf, &c.codes[r], sizeof(std::int32_t));
        key.append(buf, sizeof(std::int32_t));
      }
    }
    if (!seen.insert(key).second) ++report.duplicate_row_count;
  }
  return report;
}

double mean(std::span<const double> values) {
  if (values.empty()) return 0.0;
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double sample_std(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n < 2) return 0.0;
  const double m = mean(values);
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(n - 1));
}

double skewness(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n < 2) return 0.0;
  const double m = mean(values);
  double m2 = 0.0, m3 = 0.0;
  for (double v : values) {
    const double d = v - m;
    m2 += d * d;
    m3 += d * d * d;
  }
  m2 /= static_cast<double>(n);
  m3 /= static_cast<double>(n);
  // Rounding leaves a tiny m2 on constant data; treat it as zero spread.
  if (m2 <= 1e-28 * std::max(1.0, m * m)) return 0.0;
  return m3 / std::pow(m2, 1.5);
}

double quantile_sorted(std::span<const double> sorted, double p) {
  const double h = static_cast<double>(sorted.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double quantile(std::span<const double> values, double p) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  return quantile_sorted(sorted, p);
}

ColumnSummary summarize(std::string name, std::span<const double> values) {
  std::vector<double> present;
  present.reserve(values.size());
  for (double v : values)
    if (!std::isnan(v)) present.push_back(v);
  ColumnSummary s;
  s.name = std::move(name);
  s.count = present.size();
  if (present.empty()) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    s.mean = s.std = s.min = s.q1 = s.median = s.q3 = s.max = nan;
    s.skewness = 0.0;
    return s;
  }
  std::sort(present.begin(), present.end());
  s.mean = mean(present);
  s.std = sample_std(present);
  s.min = present.front();
  s.max = present.back();
  s.q1 = quantile_sorted(present, 0.25);
  s.median = quantile_sorted(present, 0.5);
  s.q3 = quantile_sorted(present, 0.75);
  s.skewness = skewness(present);
  return s;
}

std::vector<ColumnSummary> describe(const Table& table) {
  std::vector<ColumnSummary> out;
  for (const auto& c : table.columns())
    if (c.kind == ColumnKind::Numeric) out.push_back(summarize(c.name, c.numeric));
  if (out.empty()) throw_data("NoNumericColumns", "table '" + table.name() + "' has no numeric columns");
  return out;
}

}  // namespace tabkit
