#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "support.hpp"
#include "tabkit/classifier.hpp"
#include "tabkit/cluster.hpp"
#include "tabkit/explain.hpp"
#include "tabkit/modelsel.hpp"
#include "tabkit/pca.hpp"
#include "tabkit/synth.hpp"

using namespace tabkit;
using tabkit::test::error_code;

namespace {

std::string csv_of(const Table& t) {
  std::ostringstream out;
  write_csv(out, t);
  return out.str();
}

// Every non-label column as model input: categoricals one-hot, numeric
// columns standardized. With scale_dummies the indicators are standardized too.
Matrix encode(const Table& t, const std::string& label, bool drop_first, bool scale_dummies = true) {
  Table work = t;
  std::vector<std::string> numeric;
  for (const auto& c : t.columns())
    if (c.kind == ColumnKind::Numeric && c.name != label) numeric.push_back(c.name);
  for (const auto& c : t.columns())
    if (c.kind == ColumnKind::Categorical && c.name != label) work = one_hot(work, c.name, drop_first).table;
  std::vector<std::string> names;
  for (const auto& c : work.columns())
    if (c.name != label) names.push_back(c.name);
  Matrix x = numeric_matrix(work, names);
  if (scale_dummies) return standardize_fit(x).z;
  const Matrix z = standardize_fit(numeric_matrix(work, numeric)).z;
  for (std::size_t j = 0; j < numeric.size(); ++j) {
    const auto at = static_cast<std::size_t>(std::find(names.begin(), names.end(), numeric[j]) - names.begin());
    for (std::size_t i = 0; i < x.rows(); ++i) x(i, at) = z(i, j);
  }
  return x;
}

}  // namespace

TEST_CASE("social generator marginals") {
  const Table t = gen_social({}).table;
  CHECK(t.n_rows() == 1000);
  const auto d = describe(t);
  REQUIRE(d.size() == 4);
  const std::vector<std::string> names{"Daily_Minutes_Spent", "Posts_Per_Day", "Likes_Per_Day", "Follows_Per_Day"};
  const std::vector<double> target_mean{247.36, 10.27, 94.68, 24.69};
  const std::vector<double> lo{5, 0, 0, 0}, hi{500, 20, 200, 50};
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(d[i].name == names[i]);
    CHECK(std::abs(d[i].mean - target_mean[i]) <= 0.1 * target_mean[i]);
    CHECK(d[i].min >= lo[i]);
    CHECK(d[i].max <= hi[i]);
  }
  CHECK(t.column("App").levels.size() == 7);
}

TEST_CASE("generators are deterministic in the seed") {
  CHECK(csv_of(gen_social({.n = 300, .seed = 5}).table) == csv_of(gen_social({.n = 300, .seed = 5}).table));
  CHECK(csv_of(gen_social({.n = 300, .seed = 5}).table) != csv_of(gen_social({.n = 300, .seed = 6}).table));
  CHECK(csv_of(gen_grad({.n = 200, .seed = 1})) == csv_of(gen_grad({.n = 200, .seed = 1})));
  CHECK(error_code([] { gen_social({.n = 5}); }) == "InvalidParameter");
  CHECK(error_code([] { gen_grad({.n = 10}); }) == "InvalidParameter");
}

TEST_CASE("social regimes are recovered by clustering") {
  const auto synth = gen_social({});
  const Matrix z = encode(synth.table, "", true, false);
  const PcaModel pca = fit_pca(z, FixedK{4});
  const Matrix scores = transform(pca, z);
  CHECK(select_k(scores, 2, 8, 11).chosen_k == 2);

  const auto km = kmeans_fit(scores, 2, 11);
  std::size_t agree = 0;
  for (std::size_t i = 0; i < km.labels.size(); ++i) agree += static_cast<int>(km.labels[i]) == synth.regime[i];
  const std::size_t best = std::max(agree, km.labels.size() - agree);
  CHECK(static_cast<double>(best) >= 0.9 * static_cast<double>(km.labels.size()));
}

TEST_CASE("graduate generator composition") {
  const Table t = gen_grad({});
  CHECK(t.n_rows() == 1092);
  const Labels y = binary_labels(t, kGradLabel);
  const double rate = static_cast<double>(std::count(y.begin(), y.end(), 1)) / 1092.0;
  CHECK(rate >= 0.45);
  CHECK(rate <= 0.55);
  CHECK(encode(t, kGradLabel, false).cols() == 25);
  const auto salary = t.column("Starting_Salary").numeric;
  CHECK(skewness(salary) >= 0.5);
  CHECK(skewness(salary) <= 0.9);
  for (std::size_t j = 0; j < kGradNumeric.size(); ++j) CHECK(t.column(j).name == kGradNumeric[j]);
}

TEST_CASE("tuned logistic accuracy and planted-feature recovery") {
  int recovered = 0;
  for (std::uint64_t seed : {42u, 43u, 44u}) {
    const Table t = gen_grad({.n = 1092, .seed = seed});
    const Labels y = binary_labels(t, kGradLabel);
    const Matrix x = encode(t, kGradLabel, false);
    const auto split = stratified_split(y, SplitCounts{764, 65, 263}, seed);
    auto pick = [&](const std::vector<std::size_t>& idx) {
      Labels out;
      for (auto i : idx) out.push_back(y[i]);
      return out;
    };
    const Matrix xtr = x.select_rows(split.train), xte = x.select_rows(split.test);
    const auto search = grid_search(ModelKind::Logistic, default_grid(ModelKind::Logistic), xtr, pick(split.train),
                                    {.seed = seed});
    const double acc = evaluate(search.model, xte, pick(split.test)).accuracy;
    CHECK(acc >= 0.78);
    CHECK(acc <= 0.88);

    const Classifier& model = search.model;
    const ModelFn f = [&](std::span<const double> r) { return model.explain_output(r); };
    const auto summary = shap_summary(f, sample_rows(xtr, 50, seed), sample_rows(xte, 40, seed + 1), 16, seed);
    std::vector<std::size_t> top;
    for (std::size_t i = 0; i < 5; ++i) top.push_back(summary.entries[i].feature);
    bool all = true;
    for (auto p : kGradPlanted) all = all && std::find(top.begin(), top.end(), p) != top.end();
    recovered += all;
  }
  CHECK(recovered >= 2);
}
