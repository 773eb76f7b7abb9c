#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "support.hpp"
#include "tabkit/tabular.hpp"

using namespace tabkit;
using tabkit::test::error_code;

namespace {

Table parse(const std::string& text, const SchemaHint& hint = {}) {
  std::istringstream in(text);
  return read_csv(in, hint);
}

std::string render(const Table& t) {
  std::ostringstream out;
  write_csv(out, t);
  return out.str();
}

}  // namespace

TEST_CASE("read_csv infers numeric columns") {
  const Table t = parse("a,b\n1,2\n3,4\n5,6\n7,8\n");
  CHECK(t.n_rows() == 4);
  CHECK(t.n_cols() == 2);
  CHECK(t.column("a").kind == ColumnKind::Numeric);
  CHECK(t.column("b").numeric[3] == 8.0);
}

TEST_CASE("a non-numeric token makes the column categorical") {
  const Table t = parse("x,app\n1,TikTok\n2,Instagram\n3,TikTok\n");
  const Column& app = t.column("app");
  REQUIRE(app.kind == ColumnKind::Categorical);
  CHECK(app.levels == std::vector<std::string>{"Instagram", "TikTok"});
  CHECK(app.codes == std::vector<std::int32_t>{1, 0, 1});
}

TEST_CASE("numeric hint rejects text") {
  CHECK(error_code([] { parse("a,b\n1,abc\n", {{"b", ColumnKind::Numeric}}); }) == "ParseFailure");
}

TEST_CASE("ragged rows, empty input and missing files are errors") {
  CHECK(error_code([] { parse("a,b\n1,2\n3\n"); }) == "RaggedRow");
  CHECK(error_code([] { parse(""); }) == "EmptyInput");
  CHECK(error_code([] { load_csv("/nonexistent/tabkit.csv"); }) == "FileUnreadable");
}

TEST_CASE("quoted fields and empty cells") {
  const Table t = parse("name,v\n\"Smith, J\",1\n\"say \"\"hi\"\"\",\n");
  CHECK(t.column("name").levels[0] == "Smith, J");
  CHECK(t.column("name").levels[1] == "say \"hi\"");
  CHECK(t.column("v").is_missing(1));
  CHECK(csv_escape("a,b") == "\"a,b\"");
  CHECK(csv_escape("plain") == "plain");
}

TEST_CASE("write_csv round-trips values exactly") {
  Table t("t");
  t.add_column(Column::make_numeric("x", {0.1, 1.0 / 3.0, -2.5e-12, 1e300}));
  t.add_column(Column::make_categorical("c", {"a,b", std::nullopt, "c", "a,b"}));
  const Table back = parse(render(t));
  CHECK(back.column("x").numeric == t.column("x").numeric);
  CHECK(back.column("c").codes == t.column("c").codes);
  CHECK(render(back) == render(t));
}

TEST_CASE("audit counts missing cells and duplicates") {
  SUBCASE("clean table") {
    const auto a = audit(parse("x,y\n1,2\n3,4\n"));
    CHECK(a.duplicate_row_count == 0);
    CHECK(a.missing("x") == 0);
    CHECK(a.missing("y") == 0);
  }
  SUBCASE("two identical rows among five") {
    const auto a = audit(parse("x,y\n1,a\n2,b\n1,a\n3,c\n4,d\n"));
    CHECK(a.duplicate_row_count == 1);
  }
  SUBCASE("one missing cell") {
    const auto a = audit(parse("x,y\n1,2\n,4\n5,6\n"));
    CHECK(a.missing("x") == 1);
    CHECK(a.missing("y") == 0);
  }
}

TEST_CASE("audit is stable under a CSV round trip") {
  SplitMix64 rng(3);
  Table t("t");
  std::vector<double> x(40);
  std::vector<std::optional<std::string>> c(40);
  for (std::size_t i = 0; i < 40; ++i) {
    x[i] = static_cast<double>(rng.below(5));
    c[i] = std::string(1, static_cast<char>('a' + rng.below(3)));
  }
  t.add_column(Column::make_numeric("x", x));
  t.add_column(Column::make_categorical("c", c));
  CHECK(audit(parse(render(t))) == audit(t));
}

TEST_CASE("describe on [1,2,3,4]") {
  const auto s = summarize("v", std::vector<double>{1, 2, 3, 4});
  CHECK(s.mean == doctest::Approx(2.5));
  CHECK(s.std == doctest::Approx(1.2909944487).epsilon(1e-9));
  CHECK(s.median == doctest::Approx(2.5));
  CHECK(s.q1 == doctest::Approx(1.75));
  CHECK(s.q3 == doctest::Approx(3.25));
  CHECK(s.skewness == doctest::Approx(0.0));
}

TEST_CASE("constant and tiny columns") {
  const auto flat = summarize("v", std::vector<double>{5, 5, 5});
  CHECK(flat.std == 0.0);
  CHECK(flat.skewness == 0.0);
  const auto one = summarize("v", std::vector<double>{9});
  CHECK(one.std == 0.0);
  CHECK(one.skewness == 0.0);
}

TEST_CASE("skewness uses population moments") {
  // {1,1,2,3,6}: mean 2.6, m2 = 17.2/5 = 3.44, m3 = 30.96/5 = 6.192.
  const std::vector<double> v{1, 1, 2, 3, 6};
  CHECK(skewness(v) == doctest::Approx(6.192 / std::pow(3.44, 1.5)).epsilon(1e-12));
}

TEST_CASE("describe skips categorical columns and missing cells") {
  const auto d = describe(parse("x,c,y\n1,a,\n2,b,4\n3,a,6\n"));
  REQUIRE(d.size() == 2);
  CHECK(d[0].name == "x");
  CHECK(d[1].count == 2);
  CHECK(d[1].mean == 5.0);
  CHECK(error_code([] { describe(parse("c\na\nb\n")); }) == "NoNumericColumns");
}

TEST_CASE("describe is invariant to row order and quartiles bracket about half the data") {
  SplitMix64 rng(11);
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t n = 5 + rng.below(60);
    std::vector<double> v(n);
    for (auto& e : v) e = std::floor(rng.uniform(0, 50));
    auto shuffled = v;
    rng.shuffle(std::span<double>(shuffled));
    const auto a = summarize("v", v), b = summarize("v", shuffled);
    CHECK(a.q1 == b.q1);
    CHECK(a.median == b.median);
    CHECK(a.q3 == b.q3);
    CHECK(a.mean == doctest::Approx(b.mean).epsilon(1e-14));
    CHECK(a.std == doctest::Approx(b.std).epsilon(1e-12));
    CHECK(a.min <= a.q1);
    CHECK(a.q1 <= a.median);
    CHECK(a.median <= a.q3);
    CHECK(a.q3 <= a.max);
    const auto inside = std::count_if(v.begin(), v.end(), [&](double e) { return e >= a.q1 && e <= a.q3; });
    // Interpolated quartiles sit up to one rank inside the data on each side.
    CHECK(2 * inside + 3 >= static_cast<long>(n));
  }
}

TEST_CASE("table invariants") {
  Table t("t");
  t.add_column(Column::make_numeric("a", {1, 2}));
  CHECK(error_code([&] { t.add_column(Column::make_numeric("a", {1, 2})); }) == "DuplicateColumn");
  CHECK(error_code([&] { t.add_column(Column::make_numeric("b", {1, 2, 3})); }) == "RowCountMismatch");
  CHECK(error_code([&] { t.column("zzz"); }) == "ColumnNotFound");
}
