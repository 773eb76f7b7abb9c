#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <iterator>
#include <limits>
#include <ostream>
#include <sstream>

#include "tabkit/error.hpp"
#include "tabkit/tabular.hpp"

namespace tabkit {
namespace {

struct Field {
  std::string text;
  bool quoted = false;
};

using Record = std::vector<Field>;

// Splits RFC-4180 text into records. Quoted fields may span lines.
std::vector<Record> parse_records(const std::string& text) {
  std::vector<Record> records;
  Record record;
  Field field;
  bool in_quotes = false;
  bool field_started = false;
  const std::size_t n = text.size();

  auto end_field = [&] {
    record.push_back(std::move(field));
    field = Field{};
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    // A bare blank line yields one empty unquoted field; skip it.
    if (!(record.size() == 1 && record[0].text.empty() && !record[0].quoted)) records.push_back(std::move(record));
    record.clear();
  };

  for (std::size_t i = 0; i < n; ++i) {
    const char ch = text[i];
    if (in_quotes) {
      if (ch == '"') {
        if (i + 1 < n && text[i + 1] == '"') {
          field.text.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field.text.push_back(ch);
      }
      continue;
    }
    switch (ch) {
      case '"':
        if (!field_started || field.text.empty()) {
          in_quotes = true;
          field.quoted = true;
          field_started = true;
        } else {
          field.text.push_back(ch);
        }
        break;
      case ',':
        end_field();
        break;
      case '\r':
        if (i + 1 < n && text[i + 1] == '\n') ++i;
        end_record();
        break;
      case '\n':
        end_record();
        break;
      default:
        field.text.push_back(ch);
        field_started = true;
    }
  }
  if (in_quotes) throw_data("ParseFailure", "unterminated quoted field at end of input");
  if (field_started || !field.text.empty() || !record.empty()) end_record();
  return records;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

std::optional<double> parse_number(std::string_view token) {
  token = trim(token);
  if (token.empty()) return std::nullopt;
  if (token.front() == '+') token.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc{} || ptr != token.data() + token.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

bool is_missing_field(const Field& f) { return f.text.empty(); }

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return {};
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

Table read_csv(std::istream& in, const SchemaHint& hint, std::string name) {
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (text.size() >= 3 && text.compare(0, 3, "\xEF\xBB\xBF") == 0) text.erase(0, 3);
  auto records = parse_records(text);
  if (records.empty()) throw_data("EmptyInput", "no header row");
  if (records.size() == 1) throw_data("EmptyInput", "header row but no data rows");

  const Record& header = records.front();
  const std::size_t width = header.size();
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != width) {
      throw_data("RaggedRow", "row " + std::to_string(r) + " has " + std::to_string(records[r].size()) +
                                  " fields, header has " + std::to_string(width));
    }
  }
  for (const auto& [col, kind] : hint) {
    bool found = false;
    for (const auto& h : header) found = found || h.text == col;
    if (!found) throw_usage("ColumnNotFound", "schema hint names unknown column '" + col + "'");
  }

  Table table(std::move(name));
  const std::size_t n = records.size() - 1;
  for (std::size_t c = 0; c < width; ++c) {
    const std::string col_name(trim(header[c].text));
    auto hinted = hint.find(col_name);

    std::vector<double> numbers(n, std::numeric_limits<double>::quiet_NaN());
    bool all_numeric = true;
    for (std::size_t r = 0; r < n; ++r) {
      const Field& f = records[r + 1][c];
      if (is_missing_field(f)) continue;
      const bool hinted_numeric = hinted != hint.end() && hinted->second == ColumnKind::Numeric;
      // Quoting marks a token as text unless the column is hinted numeric.
      auto v = (f.quoted && !hinted_numeric) ? std::nullopt : parse_number(f.text);
      if (!v) {
        all_numeric = false;
        if (hinted_numeric) {
          throw_data("ParseFailure", "column '" + col_name + "', row " + std::to_string(r) + ": '" +
                                         f.text + "' is not a number");
        }
        break;
      }
      numbers[r] = *v;
    }

    const bool numeric = hinted != hint.end() ? hinted->second == ColumnKind::Numeric : all_numeric;
    if (numeric) {
      table.add_column(Column::make_numeric(col_name, std::move(numbers)));
    } else {
      std::vector<std::optional<std::string>> values(n);
      for (std::size_t r = 0; r < n; ++r) {
        const Field& f = records[r + 1][c];
        if (!is_missing_field(f)) values[r] = f.text;
      }
      table.add_column(Column::make_categorical(col_name, values));
    }
  }
  return table;
}

Table load_csv(const std::string& path, const SchemaHint& hint) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw_data("FileUnreadable", "cannot open '" + path + "'");
  std::string stem = path;
  if (auto slash = stem.find_last_of('/'); slash != std::string::npos) stem.erase(0, slash + 1);
  if (auto dot = stem.find_last_of('.'); dot != std::string::npos) stem.erase(dot);
  return read_csv(in, hint, stem);
}

void write_csv(std::ostream& out, const Table& table) {
  const auto& cols = table.columns();
  for (std::size_t c = 0; c < cols.size(); ++c) {
    if (c) out << ',';
    out << csv_escape(cols[c].name);
  }
  out << '\n';
  for (std::size_t r = 0; r < table.n_rows(); ++r) {
    for (std::size_t c = 0; c < cols.size(); ++c) {
      if (c) out << ',';
      std::string cell = cols[c].cell_text(r);
      // A categorical level that looks numeric is quoted so it reads back as
      // text; numbers are never quoted.
      if (cols[c].kind == ColumnKind::Categorical && !cols[c].is_missing(r) && parse_number(cell)) {
        out << '"' << cell << '"';
      } else {
        out << csv_escape(cell);
      }
    }
    out << '\n';
  }
}

void save_csv(const std::string& path, const Table& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw_data("FileUnreadable", "cannot write '" + path + "'");
  write_csv(out, table);
}

}  // namespace tabkit
