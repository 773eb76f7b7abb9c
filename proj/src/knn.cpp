#include "tabkit/knn.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "tabkit/error.hpp"

namespace tabkit {
namespace {

struct Neighbor {
  double dist;
  std::size_t index;
};

// The k nearest rows, nearest first; equal distances keep the lower index.
std::vector<Neighbor> nearest(const KnnModel& m, std::span<const double> q) {
  if (q.size() != m.x.cols()) throw_usage("DimensionMismatch", "feature count differs from the model");
  std::vector<Neighbor> all(m.x.rows());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = {knn_distance(q, m.x.row(i), m.params.metric), i};
  auto closer = [](const Neighbor& a, const Neighbor& b) {
    return a.dist < b.dist || (a.dist == b.dist && a.index < b.index);
  };
  const std::size_t k = std::min(m.params.k, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end(), closer);
  all.resize(k);
  return all;
}

// Per-class vote weights.
std::array<double, 2> votes(const KnnModel& m, const std::vector<Neighbor>& nb) {
  std::array<double, 2> w{};
  if (m.params.weights == KnnWeights::Distance) {
    bool exact = false;
    for (const auto& n : nb)
      if (n.dist == 0.0) {
        exact = true;
        w[static_cast<std::size_t>(m.y[n.index])] += 1.0;
      }
    if (exact) return w;
    for (const auto& n : nb) w[static_cast<std::size_t>(m.y[n.index])] += 1.0 / n.dist;
    return w;
  }
  for (const auto& n : nb) w[static_cast<std::size_t>(m.y[n.index])] += 1.0;
  return w;
}

}  // namespace

double knn_distance(std::span<const double> a, std::span<const double> b, KnnMetric metric) {
  double s = 0.0;
  if (metric == KnnMetric::Manhattan) {
    for (std::size_t j = 0; j < a.size(); ++j) s += std::abs(a[j] - b[j]);
    return s;
  }
  for (std::size_t j = 0; j < a.size(); ++j) s += (a[j] - b[j]) * (a[j] - b[j]);
  return std::sqrt(s);
}

double KnnModel::score(std::span<const double> q) const {
  const auto w = votes(*this, nearest(*this, q));
  const double total = w[0] + w[1];
  return total > 0.0 ? w[1] / total : 0.0;
}

int KnnModel::predict(std::span<const double> q) const {
  const auto nb = nearest(*this, q);
  const auto w = votes(*this, nb);
  if (w[1] > w[0]) return 1;
  if (w[1] < w[0] || params.weights == KnnWeights::Distance) return 0;
  std::array<double, 2> dist{};
  for (const auto& n : nb) dist[static_cast<std::size_t>(y[n.index])] += n.dist;
  return dist[1] < dist[0] ? 1 : 0;
}

KnnModel knn_fit(const Matrix& x, const Labels& y, const KnnParams& params) {
  if (x.rows() == 0) throw_usage("EmptyInput", "no training rows");
  if (x.rows() != y.size()) throw_usage("DimensionMismatch", "row count differs from label count");
  if (params.k == 0 || params.k > x.rows())
    throw_usage("InvalidParameter", "k = " + std::to_string(params.k) + " must be in [1, n_train]");
  return KnnModel{x, y, params};
}

}  // namespace tabkit
