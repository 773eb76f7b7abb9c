#include <doctest.h>

#include "support.hpp"
#include "tabkit/forest.hpp"
#include "tabkit/tree.hpp"

using namespace tabkit;
using tabkit::test::error_code;
using tabkit::test::random_matrix;

namespace {

struct Problem {
  Matrix x;
  Labels y;
};

Problem noisy(std::size_t n, std::size_t p, SplitMix64& rng, double noise = 0.25) {
  Problem pr{random_matrix(n, p, rng), Labels(n)};
  for (std::size_t i = 0; i < n; ++i) {
    const bool truth = pr.x(i, 0) + 0.5 * pr.x(i, 1) * pr.x(i, 1) > 0.4;
    pr.y[i] = (truth != (rng.uniform() < noise)) ? 1 : 0;
  }
  return pr;
}

void check_structure(const TreeModel& t) {
  for (const auto& node : t.nodes) {
    if (node.is_leaf()) continue;
    const auto& l = t.nodes.at(static_cast<std::size_t>(node.left));
    const auto& r = t.nodes.at(static_cast<std::size_t>(node.right));
    CHECK(l.n_samples() > 0);
    CHECK(r.n_samples() > 0);
    CHECK(l.n_samples() + r.n_samples() == node.n_samples());
    CHECK(l.counts[0] + r.counts[0] == node.counts[0]);
  }
}

}  // namespace

TEST_CASE("impurity functions") {
  CHECK(node_impurity(Criterion::Gini, 1, 1) == 0.5);
  CHECK(node_impurity(Criterion::Gini, 4, 0) == 0.0);
  CHECK(node_impurity(Criterion::Entropy, 2, 2) == doctest::Approx(1.0));
  CHECK(node_impurity(Criterion::LogLoss, 2, 2) == doctest::Approx(std::log(2.0)));
  CHECK(node_impurity(Criterion::Entropy, 0, 3) == 0.0);
}

TEST_CASE("XOR is learned exactly with depth 2") {
  const Matrix x = Matrix::from_rows({{0, 0}, {0, 1}, {1, 0}, {1, 1}});
  const Labels y{0, 1, 1, 0};
  TreeParams p;
  p.max_depth = 2;
  const auto t = tree_fit(x, y, p);
  for (std::size_t i = 0; i < 4; ++i) CHECK(t.predict(x.row(i)) == y[i]);
}

TEST_CASE("min_impurity_decrease rejects a weak split") {
  // Nearly alternating labels: the best stump split removes only a little impurity.
  const Matrix x = Matrix::from_rows({{0}, {1}, {2}, {3}, {4}, {5}, {6}, {7}, {8}, {9}});
  const Labels y{0, 1, 0, 1, 0, 0, 1, 1, 0, 1};
  TreeParams stump;
  stump.max_depth = 1;
  const auto t = tree_fit(x, y, stump);
  REQUIRE_FALSE(t.nodes[0].is_leaf());
  const double gain = t.nodes[0].impurity_decrease;
  REQUIRE(gain > 0.0);
  REQUIRE(gain < 0.1);
  TreeParams strict = stump;
  strict.min_impurity_decrease = 0.1;
  CHECK(tree_fit(x, y, strict).nodes.size() == 1);
  strict.min_impurity_decrease = gain;
  CHECK(tree_fit(x, y, strict).nodes.size() == 3);
}

TEST_CASE("recorded impurity decreases match the child counts") {
  SplitMix64 rng(41);
  for (Criterion crit : {Criterion::Gini, Criterion::Entropy, Criterion::LogLoss}) {
    const Problem pr = noisy(150, 4, rng);
    TreeParams p;
    p.criterion = crit;
    const auto t = tree_fit(pr.x, pr.y, p);
    check_structure(t);
    const double w_root = t.nodes[0].value[0] + t.nodes[0].value[1];
    for (const auto& node : t.nodes) {
      if (node.is_leaf()) continue;
      const auto& l = t.nodes[static_cast<std::size_t>(node.left)];
      const auto& r = t.nodes[static_cast<std::size_t>(node.right)];
      auto term = [&](const TreeNode& nd) {
        return (nd.value[0] + nd.value[1]) * node_impurity(crit, nd.value[0], nd.value[1]);
      };
      CHECK(std::abs((term(node) - term(l) - term(r)) / w_root - node.impurity_decrease) <= 1e-12);
    }
  }
}

TEST_CASE("entropy and log_loss choose identical splits") {
  SplitMix64 rng(42);
  const Problem pr = noisy(200, 5, rng);
  TreeParams a, b;
  a.criterion = Criterion::Entropy;
  b.criterion = Criterion::LogLoss;
  const auto ta = tree_fit(pr.x, pr.y, a), tb = tree_fit(pr.x, pr.y, b);
  REQUIRE(ta.nodes.size() == tb.nodes.size());
  for (std::size_t i = 0; i < ta.nodes.size(); ++i) {
    CHECK(ta.nodes[i].feature == tb.nodes[i].feature);
    CHECK(ta.nodes[i].threshold == tb.nodes[i].threshold);
  }
}

TEST_CASE("growth limits are honored") {
  SplitMix64 rng(43);
  const Problem pr = noisy(300, 4, rng);
  TreeParams p;
  p.max_depth = 3;
  CHECK(tree_fit(pr.x, pr.y, p).depth() <= 3);

  TreeParams leaf;
  leaf.min_samples_leaf = 10;
  for (const auto& n : tree_fit(pr.x, pr.y, leaf).nodes) CHECK(n.n_samples() >= 10);

  TreeParams split;
  split.min_samples_split = 40;
  for (const auto& n : tree_fit(pr.x, pr.y, split).nodes)
    if (!n.is_leaf()) CHECK(n.n_samples() >= 40);

  TreeParams best_first;
  best_first.max_leaf_nodes = 7;
  const auto t = tree_fit(pr.x, pr.y, best_first);
  CHECK(t.leaf_count() == 7);
  check_structure(t);

  TreeParams random;
  random.splitter = Splitter::Random;
  random.seed = 5;
  const auto r1 = tree_fit(pr.x, pr.y, random), r2 = tree_fit(pr.x, pr.y, random);
  check_structure(r1);
  REQUIRE(r1.nodes.size() == r2.nodes.size());
  for (std::size_t i = 0; i < r1.nodes.size(); ++i) CHECK(r1.nodes[i].threshold == r2.nodes[i].threshold);
}

TEST_CASE("an unlimited tree fits distinct training points exactly") {
  SplitMix64 rng(44);
  const Problem pr = noisy(120, 3, rng, 0.4);
  const auto t = tree_fit(pr.x, pr.y, {});
  for (std::size_t i = 0; i < 120; ++i) CHECK(t.predict(pr.x.row(i)) == pr.y[i]);
}

TEST_CASE("cost-complexity pruning") {
  SplitMix64 rng(45);
  const Problem pr = noisy(250, 4, rng);
  const auto full = tree_fit(pr.x, pr.y, {});
  const auto same = prune_cost_complexity(full, 0.0);
  REQUIRE(same.nodes.size() == full.nodes.size());
  for (std::size_t i = 0; i < full.nodes.size(); ++i) {
    CHECK(same.nodes[i].feature == full.nodes[i].feature);
    CHECK(same.nodes[i].threshold == full.nodes[i].threshold);
    CHECK(same.nodes[i].left == full.nodes[i].left);
  }
  std::size_t prev = full.leaf_count();
  for (double alpha : {0.001, 0.005, 0.01, 0.02, 0.05, 0.1}) {
    const auto pruned = prune_cost_complexity(full, alpha);
    check_structure(pruned);
    CHECK(pruned.leaf_count() <= prev);
    prev = pruned.leaf_count();
  }
  CHECK(prune_cost_complexity(full, 1.0).nodes.size() == 1);

  TreeParams p;
  p.ccp_alpha = 0.01;
  CHECK(tree_fit(pr.x, pr.y, p).leaf_count() == prune_cost_complexity(full, 0.01).leaf_count());
}

TEST_CASE("balanced class weights on a 6-point set") {
  const Matrix x = Matrix::from_rows({{0}, {1}, {2}, {3}, {4}, {5}});
  const Labels y{0, 0, 0, 0, 1, 1};
  const auto w = class_weights(y, ClassWeight::Balanced);
  CHECK(w[0] == doctest::Approx(0.75));
  CHECK(w[1] == doctest::Approx(1.5));
  TreeParams p;
  p.class_weight = ClassWeight::Balanced;
  p.max_depth = 1;
  const auto t = tree_fit(x, y, p);
  CHECK(t.nodes[0].value[0] == doctest::Approx(3.0));
  CHECK(t.nodes[0].value[1] == doctest::Approx(3.0));
  CHECK(t.nodes[0].impurity == doctest::Approx(0.5));
  // Split at 3.5 leaves pure children: the full 0.5 is removed.
  CHECK(t.nodes[0].threshold == 3.5);
  CHECK(t.nodes[0].impurity_decrease == doctest::Approx(0.5));
}

TEST_CASE("max_features resolution") {
  CHECK(resolve_max_features(MaxFeatures::All, 25) == 25);
  CHECK(resolve_max_features(MaxFeatures::Sqrt, 25) == 5);
  CHECK(resolve_max_features(MaxFeatures::Log2, 25) == 4);
  CHECK(resolve_max_features(MaxFeatures::Log2, 1) == 1);
}

TEST_CASE("tree errors") {
  CHECK(error_code([] { tree_fit(Matrix(), Labels{}, {}); }) == "EmptyInput");
  CHECK(error_code([] { tree_fit(Matrix(3, 1), Labels{0, 1}, {}); }) == "DimensionMismatch");
}

TEST_CASE("a one-tree forest without bootstrap equals the tree") {
  SplitMix64 rng(46);
  const Problem pr = noisy(150, 4, rng);
  ForestParams fp;
  fp.n_estimators = 1;
  fp.bootstrap = false;
  fp.max_features = MaxFeatures::All;
  fp.max_depth = 6;
  const auto forest = forest_fit(pr.x, pr.y, fp);
  TreeParams tp;
  tp.max_depth = 6;
  const auto tree = tree_fit(pr.x, pr.y, tp);
  const Matrix probe = random_matrix(200, 4, rng);
  for (std::size_t i = 0; i < probe.rows(); ++i) CHECK(forest.predict(probe.row(i)) == tree.predict(probe.row(i)));
}

TEST_CASE("forest majority vote") {
  auto leaf_tree = [](int label) {
    TreeModel t;
    t.n_features = 1;
    TreeNode leaf;
    leaf.value = {label == 0 ? 1.0 : 0.0, label == 1 ? 1.0 : 0.0};
    leaf.counts = {label == 0 ? 1u : 0u, label == 1 ? 1u : 0u};
    t.nodes.push_back(leaf);
    return t;
  };
  ForestModel f;
  f.trees = {leaf_tree(1), leaf_tree(1), leaf_tree(0)};
  const std::vector<double> x{0.0};
  CHECK(f.predict(x) == 1);
  CHECK(f.score(x) == doctest::Approx(2.0 / 3.0));
  f.trees.pop_back();
  f.trees.push_back(leaf_tree(0));
  f.trees.push_back(leaf_tree(0));
  CHECK(f.predict(x) == 0);  // 2-2 tie goes to class 0
}

TEST_CASE("forest determinism across runs and thread counts") {
  SplitMix64 rng(47);
  const Problem pr = noisy(200, 6, rng);
  ForestParams a;
  a.n_estimators = 30;
  a.max_features = MaxFeatures::Log2;
  a.class_weight = ClassWeight::Balanced;
  ForestParams b = a;
  b.threads = 3;
  const auto fa = forest_fit(pr.x, pr.y, a), fb = forest_fit(pr.x, pr.y, b), fc = forest_fit(pr.x, pr.y, a);
  REQUIRE(fa.trees.size() == 30);
  for (std::size_t m = 0; m < 30; ++m) {
    REQUIRE(fa.trees[m].nodes.size() == fb.trees[m].nodes.size());
    for (std::size_t i = 0; i < fa.trees[m].nodes.size(); ++i) {
      CHECK(fa.trees[m].nodes[i].threshold == fb.trees[m].nodes[i].threshold);
      CHECK(fa.trees[m].nodes[i].threshold == fc.trees[m].nodes[i].threshold);
    }
  }
  // Bootstrap makes trees differ from one another.
  CHECK(fa.trees[0].nodes.size() + fa.trees[1].nodes.size() > 0);
  bool differ = false;
  for (std::size_t m = 1; m < 30 && !differ; ++m)
    differ = fa.trees[m].nodes.size() != fa.trees[0].nodes.size() ||
             fa.trees[m].nodes[0].threshold != fa.trees[0].nodes[0].threshold;
  CHECK(differ);
}
