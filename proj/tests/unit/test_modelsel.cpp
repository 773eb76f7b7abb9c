#include <doctest.h>

#include <algorithm>
#include <set>

#include "support.hpp"
#include "tabkit/modelsel.hpp"

using namespace tabkit;
using tabkit::test::error_code;
using tabkit::test::random_matrix;

namespace {

struct Problem {
  Matrix x;
  Labels y;
};

Problem problem(std::size_t n, SplitMix64& rng, double noise = 0.8) {
  Problem pr{random_matrix(n, 3, rng), Labels(n)};
  for (std::size_t i = 0; i < n; ++i) pr.y[i] = pr.x(i, 0) + 0.7 * pr.x(i, 1) + rng.normal(0, noise) > 0 ? 1 : 0;
  return pr;
}

ConfusionMatrix cm(std::size_t tn, std::size_t fp, std::size_t fn, std::size_t tp) { return {tn, fp, fn, tp}; }

}  // namespace

TEST_CASE("default grid sizes") {
  CHECK(default_grid(ModelKind::Logistic).size() == 10);
  CHECK(default_grid(ModelKind::Tree).size() == 3 * 5 * 4 * 4 * 3 * 4 * 3 * 2 * 2 * 3);
  CHECK(default_grid(ModelKind::Knn).size() == 16);
  CHECK(default_grid(ModelKind::Forest).size() == 2 * 3 * 2 * 2 * 3 * 2 * 2 * 2 * 1);
  CHECK(default_grid(ModelKind::Svm).size() == 6);
}

TEST_CASE("grid enumeration runs the first axis slowest") {
  ParamGrid g;
  g.axes = {{"a", {std::int64_t{1}, std::int64_t{2}}}, {"b", {std::string("x"), std::string("y"), std::string("z")}}};
  REQUIRE(g.size() == 6);
  std::vector<std::string> seen;
  for (std::size_t i = 0; i < g.size(); ++i) seen.push_back(params_text(g.at(i)));
  CHECK(seen == std::vector<std::string>{"a=1, b=x", "a=1, b=y", "a=1, b=z", "a=2, b=x", "a=2, b=y", "a=2, b=z"});
  // Every configuration is distinct.
  for (ModelKind k : {ModelKind::Logistic, ModelKind::Knn, ModelKind::Svm, ModelKind::Forest}) {
    const auto grid = default_grid(k);
    std::set<std::string> unique;
    for (std::size_t i = 0; i < grid.size(); ++i) unique.insert(params_text(grid.at(i)));
    CHECK(unique.size() == grid.size());
  }
  ParamGrid empty;
  CHECK(error_code([&] { empty.validate(); }) == "EmptyGrid");
  empty.axes = {{"a", {}}};
  CHECK(error_code([&] { empty.validate(); }) == "EmptyGrid");
}

TEST_CASE("stratified k-fold") {
  Labels y(10);
  for (std::size_t i = 5; i < 10; ++i) y[i] = 1;
  const auto folds = stratified_kfold(y, 5, 3);
  REQUIRE(folds.size() == 5);
  for (const auto& f : folds) {
    REQUIRE(f.size() == 2);
    CHECK(y[f[0]] + y[f[1]] == 1);
  }
  CHECK(stratified_kfold(y, 5, 3) == folds);
  CHECK(error_code([&] { stratified_kfold(y, 6, 3); }) == "ClassTooSmall");
  CHECK(error_code([&] { stratified_kfold(y, 1, 3); }) == "InvalidParameter");
}

TEST_CASE("k-fold partitions with near-proportional class counts") {
  SplitMix64 rng(71);
  for (int rep = 0; rep < 30; ++rep) {
    const std::size_t n = 30 + rng.below(300), k = 2 + rng.below(9);
    Labels y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = i < k || (i >= 2 * k && rng.uniform() < 0.3) ? 1 : 0;
    const auto folds = stratified_kfold(y, k, rng());
    std::vector<int> seen(n, 0);
    const double pos = static_cast<double>(std::count(y.begin(), y.end(), 1));
    for (const auto& f : folds) {
      CHECK(std::is_sorted(f.begin(), f.end()));
      std::size_t fp = 0;
      for (auto i : f) {
        ++seen[i];
        fp += static_cast<std::size_t>(y[i]);
      }
      CHECK(std::abs(static_cast<double>(fp) - pos / static_cast<double>(k)) <= 1.0);
      CHECK(std::abs(static_cast<double>(f.size() - fp) - (static_cast<double>(n) - pos) / static_cast<double>(k)) <= 1.0);
    }
    CHECK(std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; }));
  }
}

TEST_CASE("confusion counts") {
  CHECK(confusion({1, 1, 1, 0, 0}, {1, 1, 1, 0, 0}) == cm(2, 0, 0, 3));
  CHECK(confusion({0, 0, 1, 1}, {1, 0, 0, 1}) == cm(1, 1, 1, 1));
  CHECK(error_code([] { confusion({0, 1}, {0}); }) == "LengthMismatch");
}

TEST_CASE("published confusion matrices reproduce the reported accuracies") {
  CHECK(metric_panel(cm(36, 8, 3, 18)).accuracy == doctest::Approx(0.831).epsilon(0.0005 / 0.831));
  CHECK(metric_panel(cm(34, 10, 2, 19)).accuracy == doctest::Approx(0.815).epsilon(0.0005 / 0.815));
  CHECK(metric_panel(cm(30, 14, 4, 17)).accuracy == doctest::Approx(0.723).epsilon(0.0005 / 0.723));
  const auto dt = metric_panel(cm(23, 21, 4, 17));
  CHECK(dt.accuracy == doctest::Approx(40.0 / 65.0));
  // Positive class: precision 17/38, recall 17/21, F1 = 2*17/(2*17+21+4).
  CHECK(dt.binary.precision == doctest::Approx(17.0 / 38.0));
  CHECK(dt.binary.recall == doctest::Approx(17.0 / 21.0));
  CHECK(dt.binary.f1 == doctest::Approx(34.0 / 59.0));
  CHECK(std::abs(dt.binary.f1 - 0.576) <= 0.0005);
}

TEST_CASE("metric panel conventions") {
  const auto none = metric_panel(cm(5, 0, 3, 0));
  CHECK(none.binary.precision == 0.0);
  CHECK(none.binary.recall == 0.0);
  CHECK(none.binary.f1 == 0.0);
  CHECK(none.per_class[0].recall == 1.0);

  SplitMix64 rng(72);
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t n = 10 + rng.below(50);
    Labels t(n), p(n);
    for (std::size_t i = 0; i < n; ++i) {
      t[i] = rng.uniform() < 0.5;
      p[i] = rng.uniform() < 0.5;
    }
    const auto m = metric_panel(confusion(t, p));
    std::size_t agree = 0;
    for (std::size_t i = 0; i < n; ++i) agree += t[i] == p[i];
    CHECK(std::abs(m.accuracy - static_cast<double>(agree) / static_cast<double>(n)) <= 1e-12);
    for (double v : {m.macro.precision, m.macro.recall, m.macro.f1, m.weighted.f1, m.binary.f1}) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
    CHECK(m.per_class[0].support + m.per_class[1].support == n);
  }
  // Equal supports make weighted and macro averages coincide.
  const auto eq = metric_panel(cm(7, 3, 4, 6));
  CHECK(eq.weighted.f1 == doctest::Approx(eq.macro.f1).epsilon(1e-12));
  CHECK(eq.weighted.precision == doctest::Approx(eq.macro.precision).epsilon(1e-12));
}

TEST_CASE("AUC") {
  CHECK(auc({0, 0, 1, 1}, std::vector<double>{0.1, 0.2, 0.8, 0.9}) == 1.0);
  CHECK(auc({0, 1, 0, 1}, std::vector<double>{0.3, 0.3, 0.3, 0.3}) == 0.5);
  CHECK(auc({1, 1, 0}, std::vector<double>{0.9, 0.4, 0.5}) == 0.5);
  CHECK(error_code([] { auc({1, 1}, std::vector<double>{0.1, 0.2}); }) == "SingleClass");

  SplitMix64 rng(73);
  for (int rep = 0; rep < 20; ++rep) {
    Labels y(40);
    std::vector<double> s(40), t(40);
    for (std::size_t i = 0; i < 40; ++i) {
      y[i] = i % 3 == 0;
      s[i] = std::round(rng.normal(y[i], 1.0) * 4) / 4;  // ties on purpose
      t[i] = std::exp(3 * s[i]) + 7;
    }
    CHECK(auc(y, s) == auc(y, t));
    const auto panel = metric_panel(confusion(y, y), y, s);
    REQUIRE(panel.auc.has_value());
    CHECK(*panel.auc == auc(y, s));
  }
}

TEST_CASE("a single-configuration search equals plain cross-validation") {
  SplitMix64 rng(74);
  const Problem pr = problem(40, rng);
  for (Scoring scoring : {Scoring::F1, Scoring::Accuracy}) {
    ParamGrid g;
    g.axes = {{"n_neighbors", {std::int64_t{3}, std::int64_t{7}}}, {"weights", {std::string("uniform")}}};
    GridSearchOptions opts;
    opts.scoring = scoring;
    opts.seed = 5;
    const auto out = grid_search(ModelKind::Knn, g, pr.x, pr.y, opts);
    REQUIRE(out.cv.configs.size() == 2);

    const auto folds = stratified_kfold(pr.y, 5, 5);
    std::vector<double> manual;
    for (std::size_t c = 0; c < 2; ++c) {
      double total = 0;
      for (std::size_t f = 0; f < 5; ++f) {
        std::vector<std::size_t> train;
        for (std::size_t o = 0; o < 5; ++o)
          if (o != f) train.insert(train.end(), folds[o].begin(), folds[o].end());
        std::sort(train.begin(), train.end());
        Labels ytr, yva, pred;
        for (auto i : train) ytr.push_back(pr.y[i]);
        const Classifier m = fit_classifier(ModelKind::Knn, g.at(c), pr.x.select_rows(train), ytr);
        for (auto i : folds[f]) {
          yva.push_back(pr.y[i]);
          pred.push_back(m.predict(pr.x.row(i)));
        }
        const double s = score_predictions(scoring, yva, pred);
        CHECK(out.cv.configs[c].fold_scores[f] == doctest::Approx(s).epsilon(1e-15));
        total += s;
      }
      manual.push_back(total / 5);
      CHECK(out.cv.configs[c].mean == doctest::Approx(manual.back()).epsilon(1e-14));
    }
    CHECK(out.best_index == (manual[1] > manual[0] ? 1u : 0u));
  }
}

TEST_CASE("failed configurations score minus infinity without aborting") {
  SplitMix64 rng(75);
  const Problem pr = problem(30, rng);
  ParamGrid g;
  g.axes = {{"n_neighbors", {std::int64_t{500}, std::int64_t{3}}}};
  const auto out = grid_search(ModelKind::Knn, g, pr.x, pr.y, {});
  CHECK(out.cv.configs[0].failed());
  CHECK(std::isinf(out.cv.configs[0].mean));
  CHECK_FALSE(out.cv.configs[0].diagnostic.empty());
  CHECK(out.best_index == 1);

  ParamGrid bad;
  bad.axes = {{"n_neighbors", {std::int64_t{500}}}};
  CHECK(error_code([&] { grid_search(ModelKind::Knn, bad, pr.x, pr.y, {}); }) == "AllConfigurationsFailed");
}

TEST_CASE("ties go to the first configuration in enumeration order") {
  SplitMix64 rng(76);
  const Problem pr = problem(50, rng);
  ParamGrid g;
  g.axes = {{"random_state", {std::int64_t{1}, std::int64_t{2}}}, {"max_depth", {std::int64_t{1}}}};
  // Depth-1 trees with the best splitter do not depend on the seed.
  const auto out = grid_search(ModelKind::Tree, g, pr.x, pr.y, {});
  CHECK(out.cv.configs[0].mean == out.cv.configs[1].mean);
  CHECK(out.best_index == 0);
}

TEST_CASE("tuning curves and thread independence") {
  SplitMix64 rng(77);
  const Problem pr = problem(120, rng);
  GridSearchOptions one, many;
  one.seed = many.seed = 9;
  many.threads = 4;
  const auto grid = default_grid(ModelKind::Logistic);
  const auto a = grid_search(ModelKind::Logistic, grid, pr.x, pr.y, one);
  const auto b = grid_search(ModelKind::Logistic, grid, pr.x, pr.y, many);
  const auto curve = tuning_curves(a.cv);
  REQUIRE(curve.size() == grid.size());
  for (std::size_t i = 0; i < curve.size(); ++i) {
    CHECK(curve[i].index == i);
    REQUIRE(curve[i].validation_loss.has_value());
    CHECK(std::isfinite(*curve[i].validation_loss));
    CHECK(std::isfinite(*curve[i].train_loss));
    CHECK(a.cv.configs[i].fold_scores == b.cv.configs[i].fold_scores);
  }
  CHECK(a.best_index == b.best_index);

  ParamGrid single;
  single.axes = {{"C", {1.0}}};
  CHECK(tuning_curves(grid_search(ModelKind::Svm, single, pr.x, pr.y, one).cv).size() == 1);
  CHECK_FALSE(tuning_curves(grid_search(ModelKind::Svm, single, pr.x, pr.y, one).cv)[0].train_loss.has_value());
}

TEST_CASE("configurations sharing a fit score exactly as separate searches") {
  SplitMix64 rng(79);
  const Problem pr = problem(90, rng, 1.2);
  auto check_against_singletons = [&](ModelKind kind, const ParamGrid& grid) {
    GridSearchOptions opt;
    opt.seed = 4;
    const auto joint = grid_search(kind, grid, pr.x, pr.y, opt);
    for (std::size_t c = 0; c < grid.size(); ++c) {
      ParamGrid one;
      for (const auto& [name, value] : grid.at(c)) one.axes.push_back({name, {value}});
      const auto alone = grid_search(kind, one, pr.x, pr.y, opt);
      CAPTURE(c);
      CHECK(joint.cv.configs[c].fold_scores == alone.cv.configs[0].fold_scores);
      CHECK(joint.cv.configs[c].train_fold_scores == alone.cv.configs[0].train_fold_scores);
    }
  };
  ParamGrid tree;
  tree.axes = {{"splitter", {std::string("best"), std::string("random")}},
               {"ccp_alpha", {0.0, 0.005, 0.02, 0.1}}};
  check_against_singletons(ModelKind::Tree, tree);
  ParamGrid forest;
  forest.axes = {{"n_estimators", {std::int64_t{7}, std::int64_t{3}, std::int64_t{12}}},
                 {"max_depth", {std::int64_t{3}, std::monostate{}}}};
  check_against_singletons(ModelKind::Forest, forest);

  // An invalid member fails alone.
  ParamGrid mixed;
  mixed.axes = {{"n_estimators", {std::int64_t{0}, std::int64_t{5}}}};
  const auto out = grid_search(ModelKind::Forest, mixed, pr.x, pr.y, {});
  CHECK(out.cv.configs[0].failed());
  CHECK_FALSE(out.cv.configs[1].failed());
}

TEST_CASE("evaluate fills AUC from model scores") {
  SplitMix64 rng(78);
  const Problem pr = problem(100, rng);
  const Classifier m = fit_classifier(ModelKind::Logistic, {}, pr.x, pr.y);
  const auto r = evaluate(m, pr.x, pr.y);
  REQUIRE(r.auc.has_value());
  CHECK(*r.auc > 0.8);
  CHECK(r.confusion.total() == 100);
}
