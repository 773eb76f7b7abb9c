#include "tabkit/tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>

#include "tabkit/error.hpp"

namespace tabkit {

// Values closer than this are treated as equal when placing thresholds.
constexpr double kFeatureEpsilon = 1e-7;
constexpr double kPureEpsilon = 1e-12;

double node_impurity(Criterion criterion, double w0, double w1) {
  const double total = w0 + w1;
  if (total <= 0.0) return 0.0;
  const double p0 = w0 / total, p1 = w1 / total;
  switch (criterion) {
    case Criterion::Gini:
      return 1.0 - p0 * p0 - p1 * p1;
    case Criterion::Entropy:
    case Criterion::LogLoss: {
      double h = 0.0;
      if (p0 > 0.0) h -= p0 * std::log(p0);
      if (p1 > 0.0) h -= p1 * std::log(p1);
      return criterion == Criterion::Entropy ? h / std::numbers::ln2 : h;
    }
  }
  return 0.0;
}

std::array<double, 2> class_weights(const Labels& y, ClassWeight weighting) {
  if (weighting == ClassWeight::None) return {1.0, 1.0};
  std::array<double, 2> n{};
  for (int v : y) n[static_cast<std::size_t>(v)] += 1.0;
  const double total = n[0] + n[1];
  return {n[0] > 0 ? total / (2.0 * n[0]) : 0.0, n[1] > 0 ? total / (2.0 * n[1]) : 0.0};
}

std::size_t resolve_max_features(MaxFeatures rule, std::size_t p) {
  switch (rule) {
    case MaxFeatures::All:
      return p;
    case MaxFeatures::Sqrt:
      return std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(p)))));
    case MaxFeatures::Log2:
      return std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(std::log2(static_cast<double>(p)))));
  }
  return p;
}

TreeData::TreeData(const Matrix& x, const Labels& y) : n_features_(x.cols()), y_(y) {
  if (x.rows() != y.size()) throw_usage("DimensionMismatch", "row count differs from label count");
  const std::size_t n = x.rows();
  cols_.resize(n * n_features_);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t f = 0; f < n_features_; ++f) cols_[f * n + i] = x(i, f);
  order_.resize(n * n_features_);
  for (std::size_t f = 0; f < n_features_; ++f) {
    auto* o = order_.data() + f * n;
    std::iota(o, o + n, 0u);
    const double* col = column(f);
    std::stable_sort(o, o + n, [col](std::uint32_t a, std::uint32_t b) { return col[a] < col[b]; });
  }
}

const TreeNode& TreeModel::leaf_for(std::span<const double> x) const {
  if (x.size() != n_features) throw_usage("DimensionMismatch", "feature count differs from the model");
  std::size_t i = 0;
  while (!nodes[i].is_leaf())
    i = static_cast<std::size_t>(x[static_cast<std::size_t>(nodes[i].feature)] <= nodes[i].threshold ? nodes[i].left
                                                                                                     : nodes[i].right);
  return nodes[i];
}

double TreeModel::score(std::span<const double> x) const {
  const auto& leaf = leaf_for(x);
  const double total = leaf.value[0] + leaf.value[1];
  return total > 0.0 ? leaf.value[1] / total : 0.0;
}

std::size_t TreeModel::leaf_count() const {
  return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

std::size_t TreeModel::depth() const {
  if (nodes.empty()) return 0;
  std::vector<std::size_t> d(nodes.size(), 0);
  std::size_t best = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    best = std::max(best, d[i]);
    if (!nodes[i].is_leaf()) {
      d[static_cast<std::size_t>(nodes[i].left)] = d[i] + 1;
      d[static_cast<std::size_t>(nodes[i].right)] = d[i] + 1;
    }
  }
  return best;
}

namespace {

struct Split {
  bool valid = false;
  int feature = -1;
  double threshold = 0.0;
  std::size_t n_left = 0;
  double proxy = std::numeric_limits<double>::infinity();  // W_l imp_l + W_r imp_r
  double improvement = 0.0;
};

struct Frontier {
  int node;
  std::size_t begin, end, depth;
};

class Builder {
 public:
  Builder(const TreeData& data, std::span<const double> multiplicity, const std::array<double, 2>& class_w,
          const TreeParams& params, SplitMix64& rng)
      : d_(data), params_(params), rng_(rng), p_(data.n_features()) {
    const std::size_t n = data.n_rows();
    w_.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double mult = multiplicity.empty() ? 1.0 : multiplicity[i];
      if (mult > 0.0) w_[i] = mult * class_w[static_cast<std::size_t>(data.labels()[i])];
    }
    for (std::size_t i = 0; i < n; ++i) m_ += (multiplicity.empty() || multiplicity[i] > 0.0) ? 1 : 0;
    if (m_ == 0) throw_usage("EmptyInput", "no training rows");
    ord_.resize(p_ * m_);
    for (std::size_t f = 0; f < p_; ++f) {
      std::size_t k = 0;
      for (auto r : data.sorted(f))
        if (multiplicity.empty() || multiplicity[r] > 0.0) ord_[f * m_ + k++] = r;
    }
    goes_left_.assign(n, 0);
    tmp_.resize(m_);
    features_.resize(p_);
    std::iota(features_.begin(), features_.end(), 0u);
    max_features_ = resolve_max_features(params.max_features, p_);
  }

  TreeModel build() {
    TreeModel tree;
    tree.params = params_;
    tree.n_features = p_;

    std::vector<Split> splits;
    auto make_node = [&](std::size_t begin, std::size_t end, std::size_t depth) {
      TreeNode node;
      const auto* o = ord_.data();  // feature 0 order holds the node's rows
      for (std::size_t pos = begin; pos < end; ++pos) {
        const auto r = o[pos];
        const auto c = static_cast<std::size_t>(d_.labels()[r]);
        node.value[c] += w_[r];
        ++node.counts[c];
      }
      node.impurity = node_impurity(params_.criterion, node.value[0], node.value[1]);
      tree.nodes.push_back(node);
      splits.push_back(find_split(tree.nodes.back(), begin, end, depth));
      return static_cast<int>(tree.nodes.size() - 1);
    };

    make_node(0, m_, 0);
    root_weight_ = tree.nodes[0].value[0] + tree.nodes[0].value[1];
    if (splits[0].valid) splits[0].improvement = improvement_of(tree.nodes[0], splits[0]);

    auto expand = [&](const Frontier& f, std::vector<Frontier>& out) {
      const Split s = splits[static_cast<std::size_t>(f.node)];
      apply_split(s, f.begin, f.end);
      const std::size_t mid = f.begin + s.n_left;
      const int left = make_node(f.begin, mid, f.depth + 1);
      const int right = make_node(mid, f.end, f.depth + 1);
      for (int child : {left, right}) {
        auto& cs = splits[static_cast<std::size_t>(child)];
        if (cs.valid) cs.improvement = improvement_of(tree.nodes[static_cast<std::size_t>(child)], cs);
      }
      auto& node = tree.nodes[static_cast<std::size_t>(f.node)];
      node.feature = s.feature;
      node.threshold = s.threshold;
      node.left = left;
      node.right = right;
      node.impurity_decrease = s.improvement;
      out.push_back({left, f.begin, mid, f.depth + 1});
      out.push_back({right, mid, f.end, f.depth + 1});
    };
    auto splittable = [&](int node) {
      const auto& s = splits[static_cast<std::size_t>(node)];
      return s.valid && !(s.improvement + kPureEpsilon < params_.min_impurity_decrease);
    };

    std::vector<Frontier> children;
    if (!params_.max_leaf_nodes) {
      std::vector<Frontier> stack{{0, 0, m_, 0}};
      while (!stack.empty()) {
        const Frontier f = stack.back();
        stack.pop_back();
        if (!splittable(f.node)) continue;
        children.clear();
        expand(f, children);
        stack.push_back(children[1]);
        stack.push_back(children[0]);
      }
    } else {
      auto worse = [&](const Frontier& a, const Frontier& b) {
        const double ia = splits[static_cast<std::size_t>(a.node)].improvement;
        const double ib = splits[static_cast<std::size_t>(b.node)].improvement;
        if (ia != ib) return ia < ib;
        return a.node > b.node;
      };
      std::priority_queue<Frontier, std::vector<Frontier>, decltype(worse)> heap(worse);
      if (splittable(0)) heap.push({0, 0, m_, 0});
      std::size_t leaves = 1;
      const std::size_t limit = std::max<std::size_t>(*params_.max_leaf_nodes, 1);
      while (!heap.empty() && leaves < limit) {
        const Frontier f = heap.top();
        heap.pop();
        children.clear();
        expand(f, children);
        ++leaves;
        for (const auto& c : children)
          if (splittable(c.node)) heap.push(c);
      }
    }
    return tree;
  }

 private:
  double improvement_of(const TreeNode& node, const Split& s) const {
    const double wt = node.value[0] + node.value[1];
    return (wt * node.impurity - s.proxy) / root_weight_;
  }

  Split find_split(const TreeNode& node, std::size_t begin, std::size_t end, std::size_t depth) {
    Split best;
    const std::size_t n = end - begin;
    if (params_.max_depth && depth >= *params_.max_depth) return best;
    if (n < params_.min_samples_split || n < 2 * params_.min_samples_leaf) return best;
    if (node.impurity <= kPureEpsilon) return best;

    const bool subsample = max_features_ < p_;
    std::size_t visited = 0;
    for (std::size_t i = 0; i < p_ && visited < max_features_; ++i) {
      if (subsample) {
        const std::size_t j = i + static_cast<std::size_t>(rng_.below(p_ - i));
        std::swap(features_[i], features_[j]);
      }
      const std::size_t f = subsample ? features_[i] : i;
      const auto* o = ord_.data() + f * m_;
      const double* col = d_.column(f);
      const double lo = col[o[begin]], hi = col[o[end - 1]];
      if (hi <= lo + kFeatureEpsilon) continue;  // constant here; does not count
      ++visited;
      if (params_.splitter == Splitter::Best) scan_best(f, begin, end, node, best);
      else try_random(f, begin, end, node, lo, hi, best);
    }
    if (subsample) std::iota(features_.begin(), features_.end(), 0u);
    return best;
  }

  void consider(Split& best, std::size_t f, double threshold, std::size_t n_left, const std::array<double, 2>& wl,
                const TreeNode& node) const {
    const double wr0 = node.value[0] - wl[0], wr1 = node.value[1] - wl[1];
    const double wlt = wl[0] + wl[1], wrt = wr0 + wr1;
    const double proxy = wlt * node_impurity(params_.criterion, wl[0], wl[1]) +
                         wrt * node_impurity(params_.criterion, std::max(wr0, 0.0), std::max(wr1, 0.0));
    if (proxy < best.proxy) {
      best.valid = true;
      best.feature = static_cast<int>(f);
      best.threshold = threshold;
      best.n_left = n_left;
      best.proxy = proxy;
    }
  }

  void scan_best(std::size_t f, std::size_t begin, std::size_t end, const TreeNode& node, Split& best) const {
    const auto* o = ord_.data() + f * m_;
    const double* col = d_.column(f);
    const auto& y = d_.labels();
    const std::size_t n = end - begin, min_leaf = params_.min_samples_leaf;
    std::array<double, 2> wl{};
    for (std::size_t pos = begin; pos + 1 < end; ++pos) {
      const auto r = o[pos];
      wl[static_cast<std::size_t>(y[r])] += w_[r];
      const std::size_t nl = pos - begin + 1;
      if (nl < min_leaf) continue;
      if (n - nl < min_leaf) break;
      const double v = col[r], vn = col[o[pos + 1]];
      if (vn <= v + kFeatureEpsilon) continue;
      double thr = v + 0.5 * (vn - v);
      if (thr >= vn || thr < v) thr = v;
      consider(best, f, thr, nl, wl, node);
    }
  }

  void try_random(std::size_t f, std::size_t begin, std::size_t end, const TreeNode& node, double lo, double hi,
                  Split& best) {
    double thr = rng_.uniform(lo, hi);
    if (thr >= hi) thr = lo;
    const auto* o = ord_.data() + f * m_;
    const double* col = d_.column(f);
    const auto& y = d_.labels();
    std::array<double, 2> wl{};
    std::size_t pos = begin;
    for (; pos < end && col[o[pos]] <= thr; ++pos) wl[static_cast<std::size_t>(y[o[pos]])] += w_[o[pos]];
    const std::size_t nl = pos - begin, n = end - begin;
    if (nl < params_.min_samples_leaf || n - nl < params_.min_samples_leaf) return;
    consider(best, f, thr, nl, wl, node);
  }

  void apply_split(const Split& s, std::size_t begin, std::size_t end) {
    const auto fs = static_cast<std::size_t>(s.feature);
    const auto* chosen = ord_.data() + fs * m_;
    for (std::size_t pos = begin; pos < end; ++pos) goes_left_[chosen[pos]] = pos < begin + s.n_left ? 1 : 0;
    for (std::size_t f = 0; f < p_; ++f) {
      if (f == fs) continue;
      auto* o = ord_.data() + f * m_;
      std::size_t wpos = begin, t = 0;
      for (std::size_t pos = begin; pos < end; ++pos) {
        const auto r = o[pos];
        if (goes_left_[r]) o[wpos++] = r;
        else tmp_[t++] = r;
      }
      std::copy(tmp_.begin(), tmp_.begin() + static_cast<std::ptrdiff_t>(t), o + wpos);
    }
  }

  const TreeData& d_;
  const TreeParams& params_;
  SplitMix64& rng_;
  std::size_t p_;
  std::size_t m_ = 0;
  std::size_t max_features_ = 0;
  double root_weight_ = 1.0;
  std::vector<double> w_;
  std::vector<std::uint32_t> ord_;
  std::vector<std::uint8_t> goes_left_;
  std::vector<std::uint32_t> tmp_;
  std::vector<std::uint32_t> features_;
};

// Renumbers reachable nodes in preorder.
TreeModel compact(const TreeModel& tree) {
  TreeModel out;
  out.params = tree.params;
  out.n_features = tree.n_features;
  struct Item {
    int old;
    int parent;
    bool left;
  };
  std::vector<Item> work{{0, -1, false}};
  while (!work.empty()) {
    const Item it = work.back();
    work.pop_back();
    TreeNode node = tree.nodes[static_cast<std::size_t>(it.old)];
    const int idx = static_cast<int>(out.nodes.size());
    const int old_left = node.left, old_right = node.right;
    out.nodes.push_back(node);
    if (it.parent >= 0) {
      auto& parent = out.nodes[static_cast<std::size_t>(it.parent)];
      (it.left ? parent.left : parent.right) = idx;
    }
    if (!node.is_leaf()) {
      work.push_back({old_right, idx, false});
      work.push_back({old_left, idx, true});
    }
  }
  return out;
}

}  // namespace

TreeModel prune_cost_complexity(TreeModel tree, double alpha) {
  if (!(alpha > 0.0) || tree.nodes.empty()) return tree;
  auto& nodes = tree.nodes;
  const double root_w = nodes[0].value[0] + nodes[0].value[1];
  auto risk = [&](const TreeNode& n) { return (n.value[0] + n.value[1]) / root_w * n.impurity; };

  const std::size_t count = nodes.size();
  std::vector<double> branch_risk(count);
  std::vector<std::size_t> leaves(count);
  for (;;) {
    // Children always have larger indices than parents, so a reverse sweep
    // is a post-order accumulation.
    for (std::size_t i = count; i-- > 0;) {
      if (nodes[i].is_leaf()) {
        branch_risk[i] = risk(nodes[i]);
        leaves[i] = 1;
      } else {
        const auto l = static_cast<std::size_t>(nodes[i].left), r = static_cast<std::size_t>(nodes[i].right);
        branch_risk[i] = branch_risk[l] + branch_risk[r];
        leaves[i] = leaves[l] + leaves[r];
      }
    }
    // Only nodes reachable from the root count.
    std::vector<std::uint8_t> reachable(count, 0);
    reachable[0] = 1;
    double weakest = std::numeric_limits<double>::infinity();
    std::size_t weakest_node = count;
    for (std::size_t i = 0; i < count; ++i) {
      if (!reachable[i] || nodes[i].is_leaf()) continue;
      reachable[static_cast<std::size_t>(nodes[i].left)] = 1;
      reachable[static_cast<std::size_t>(nodes[i].right)] = 1;
      const double a = (risk(nodes[i]) - branch_risk[i]) / static_cast<double>(leaves[i] - 1);
      if (a < weakest) {
        weakest = a;
        weakest_node = i;
      }
    }
    if (weakest_node == count || weakest > alpha) break;
    auto& n = nodes[weakest_node];
    n.feature = -1;
    n.left = n.right = -1;
    n.threshold = 0.0;
    n.impurity_decrease = 0.0;
  }
  return compact(tree);
}

TreeModel tree_fit_weighted(const TreeData& data, std::span<const double> multiplicity,
                            const std::array<double, 2>& weights, const TreeParams& params, SplitMix64& rng) {
  if (data.n_rows() == 0) throw_usage("EmptyInput", "no training rows");
  if (!multiplicity.empty() && multiplicity.size() != data.n_rows())
    throw_usage("DimensionMismatch", "multiplicity length differs from row count");
  Builder builder(data, multiplicity, weights, params, rng);
  return prune_cost_complexity(builder.build(), params.ccp_alpha);
}

TreeModel tree_fit(const TreeData& data, const TreeParams& params) {
  SplitMix64 rng(params.seed);
  return tree_fit_weighted(data, {}, class_weights(data.labels(), params.class_weight), params, rng);
}

TreeModel tree_fit(const Matrix& x, const Labels& y, const TreeParams& params) {
  if (x.rows() == 0) throw_usage("EmptyInput", "no training rows");
  return tree_fit(TreeData(x, y), params);
}

}  // namespace tabkit
