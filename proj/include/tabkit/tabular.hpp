#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace tabkit {

enum class ColumnKind { Numeric, Categorical };

/// One named column. Numeric cells hold NaN when missing; categorical cells
/// hold an index into `levels`, or -1 when missing. Levels are kept in
/// byte-wise sorted order.
struct Column {
  std::string name;
  ColumnKind kind = ColumnKind::Numeric;
  std::vector<double> numeric;
  std::vector<std::int32_t> codes;
  std::vector<std::string> levels;

  static Column make_numeric(std::string name, std::vector<double> values);
  /// Builds levels from the distinct non-missing values.
  static Column make_categorical(std::string name, const std::vector<std::optional<std::string>>& values);

  std::size_t size() const noexcept { return kind == ColumnKind::Numeric ? numeric.size() : codes.size(); }
  bool is_missing(std::size_t row) const noexcept;
  /// CSV text of a cell; empty when missing.
  std::string cell_text(std::size_t row) const;
  std::optional<std::int32_t> level_index(const std::string& level) const;
};

class Table {
 public:
  Table() = default;
  explicit Table(std::string name) : name_(std::move(name)) {}

  const std::string& name() const noexcept { return name_; }
  std::size_t n_rows() const noexcept { return n_rows_; }
  std::size_t n_cols() const noexcept { return columns_.size(); }
  const std::vector<Column>& columns() const noexcept { return columns_; }

  /// Appends a column. Throws DuplicateColumn or RowCountMismatch.
  void add_column(Column column);
  /// Replaces the column at `index` by zero or more columns, in place.
  void replace_column(std::size_t index, std::vector<Column> replacement);

  std::optional<std::size_t> find(const std::string& name) const;
  /// Throws ColumnNotFound.
  const Column& column(const std::string& name) const;
  Column& column(const std::string& name);
  const Column& column(std::size_t index) const { return columns_.at(index); }

  std::vector<std::string> column_names() const;
  std::vector<std::string> numeric_column_names() const;
  Table select_rows(std::span<const std::size_t> rows) const;

 private:
  std::string name_;
  std::vector<Column> columns_;
  std::size_t n_rows_ = 0;
};

using SchemaHint = std::map<std::string, ColumnKind>;

/// Parses comma-delimited, RFC-4180-quoted text with a mandatory header.
/// Empty fields are missing. Without a hint a column containing any
/// non-numeric token is categorical.
Table read_csv(std::istream& in, const SchemaHint& hint = {}, std::string name = "table");
Table load_csv(const std::string& path, const SchemaHint& hint = {});
void write_csv(std::ostream& out, const Table& table);
void save_csv(const std::string& path, const Table& table);

/// Quotes a field when it contains a comma, quote, or line break.
std::string csv_escape(const std::string& field);
/// Shortest text that round-trips the double.
std::string format_number(double v);

struct AuditReport {
  std::vector<std::pair<std::string, std::size_t>> missing_per_column;
  std::size_t duplicate_row_count = 0;
  std::size_t n_rows = 0;

  std::size_t missing(const std::string& column) const;
  bool operator==(const AuditReport&) const = default;
};

/// Exact missing counts and the number of rows that repeat an earlier row.
AuditReport audit(const Table& table);

struct ColumnSummary {
  std::string name;
  std::size_t count = 0;
  double mean = 0, std = 0, min = 0, q1 = 0, median = 0, q3 = 0, max = 0;
  double skewness = 0;
};

/// Summary of every numeric column (missing cells excluded).
/// Throws NoNumericColumns.
std::vector<ColumnSummary> describe(const Table& table);
ColumnSummary summarize(std::string name, std::span<const double> values);

/// Linear interpolation between closest ranks at h = (n-1)p ("type 7").
/// `sorted` must be ascending and nonempty.
double quantile_sorted(std::span<const double> sorted, double p);
double quantile(std::span<const double> values, double p);

double mean(std::span<const double> values);
/// Sample standard deviation (n-1 denominator); 0 when n < 2.
double sample_std(std::span<const double> values);
/// g1 = m3 / m2^(3/2) with population central moments; 0 when n < 2 or m2 = 0.
double skewness(std::span<const double> values);

}  // namespace tabkit
