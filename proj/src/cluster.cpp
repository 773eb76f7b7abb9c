#include "tabkit/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tabkit/error.hpp"
#include "tabkit/parallel.hpp"

namespace tabkit {
namespace {

double sq_dist(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double d = a[j] - b[j];
    s += d * d;
  }
  return s;
}

std::size_t nearest(std::span<const double> x, const Matrix& centroids, double* dist = nullptr) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.rows(); ++c) {
    const double d = sq_dist(x, centroids.row(c));
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  if (dist) *dist = best_d;
  return best;
}

Matrix centroid_means(const Matrix& z, const std::vector<std::size_t>& labels, std::size_t k,
                      std::vector<std::size_t>& counts) {
  Matrix c(k, z.cols());
  counts.assign(k, 0);
  for (std::size_t i = 0; i < z.rows(); ++i) {
    ++counts[labels[i]];
    auto row = z.row(i);
    auto dst = c.row(labels[i]);
    for (std::size_t j = 0; j < z.cols(); ++j) dst[j] += row[j];
  }
  for (std::size_t a = 0; a < k; ++a)
    if (counts[a])
      for (double& v : c.row(a)) v /= static_cast<double>(counts[a]);
  return c;
}

}  // namespace

std::vector<std::size_t> assign_nearest(const Matrix& z, const Matrix& centroids) {
  std::vector<std::size_t> labels(z.rows());
  for (std::size_t i = 0; i < z.rows(); ++i) labels[i] = nearest(z.row(i), centroids);
  return labels;
}

double inertia_of(const Matrix& z, const Matrix& centroids, const std::vector<std::size_t>& labels) {
  double s = 0.0;
  for (std::size_t i = 0; i < z.rows(); ++i) s += sq_dist(z.row(i), centroids.row(labels[i]));
  return s;
}

Matrix kmeanspp_init(const Matrix& z, std::size_t k, SplitMix64& rng) {
  const std::size_t n = z.rows();
  Matrix centers(k, z.cols());
  std::size_t first = static_cast<std::size_t>(rng.below(n));
  std::copy(z.row(first).begin(), z.row(first).end(), centers.row(0).begin());
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = sq_dist(z.row(i), centers.row(0));
  for (std::size_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (double d : d2) total += d;
    std::size_t pick = 0;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double acc = 0.0;
      pick = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        acc += d2[i];
        if (acc > target && d2[i] > 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<std::size_t>(rng.below(n));
    }
    std::copy(z.row(pick).begin(), z.row(pick).end(), centers.row(c).begin());
    for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], sq_dist(z.row(i), centers.row(c)));
  }
  return centers;
}

LloydRun lloyd(const Matrix& z, Matrix centroids, std::size_t max_iter, double tol) {
  const std::size_t n = z.rows(), k = centroids.rows();
  LloydRun run;
  std::vector<std::size_t> labels = assign_nearest(z, centroids);
  std::vector<std::size_t> counts;
  run.inertia_trace.push_back(inertia_of(z, centroids, labels));

  for (std::size_t iter = 1; iter <= max_iter; ++iter) {
    run.n_iter = iter;
    Matrix updated = centroid_means(z, labels, k, counts);
    // An emptied cluster takes the point farthest from its own centroid
    // (among clusters that can spare one).
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c]) continue;
      std::size_t far = n;
      double far_d = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (counts[labels[i]] <= 1) continue;
        const double d = sq_dist(z.row(i), updated.row(labels[i]));
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      if (far == n) break;
      labels[far] = c;
      updated = centroid_means(z, labels, k, counts);
    }
    double shift = 0.0;
    for (std::size_t c = 0; c < k; ++c) shift += sq_dist(centroids.row(c), updated.row(c));
    centroids = std::move(updated);

    auto reassigned = assign_nearest(z, centroids);
    run.inertia_trace.push_back(inertia_of(z, centroids, reassigned));
    const bool stable = reassigned == labels;
    labels = std::move(reassigned);
    // Stable labels mean the centroids are exactly their clusters' means.
    if (stable || shift < tol) break;
  }
  run.labels = std::move(labels);
  run.centroids = std::move(centroids);
  run.inertia = run.inertia_trace.back();
  return run;
}

KMeansModel kmeans_fit(const Matrix& z, std::size_t k, std::uint64_t seed, const KMeansOptions& options) {
  const std::size_t n = z.rows();
  if (n == 0 || z.cols() == 0) throw_usage("EmptyInput", "k-means needs a nonempty matrix");
  if (k < 1 || k > n) throw_usage("KTooLarge", "k = " + std::to_string(k) + " must be in [1, " + std::to_string(n) + "]");
  const std::size_t restarts = std::max<std::size_t>(options.n_init, 1);
  std::vector<LloydRun> runs(restarts);
  parallel_for(restarts, options.threads, [&](std::size_t r) {
    SplitMix64 rng(stream_seed(seed, r));
    runs[r] = lloyd(z, kmeanspp_init(z, k, rng), options.max_iter, options.tol);
  });
  std::size_t best = 0;
  for (std::size_t r = 1; r < restarts; ++r)
    if (runs[r].inertia < runs[best].inertia) best = r;
  KMeansModel m;
  m.centroids = std::move(runs[best].centroids);
  m.labels = std::move(runs[best].labels);
  m.inertia = runs[best].inertia;
  m.n_iter = runs[best].n_iter;
  m.seed = seed;
  m.best_restart = best;
  return m;
}

double silhouette(const Matrix& z, const std::vector<std::size_t>& labels) {
  const std::size_t n = z.rows();
  if (labels.size() != n) throw_usage("RowMismatch", "label count differs from row count");
  if (n < 3) throw_usage("TooFewPoints", "silhouette needs at least 3 points");
  std::size_t k = 0;
  for (auto l : labels) k = std::max(k, l + 1);
  std::vector<std::size_t> sizes(k, 0);
  for (auto l : labels) ++sizes[l];
  if (k < 2) throw_usage("SingleCluster", "silhouette needs at least 2 clusters");
  for (std::size_t c = 0; c < k; ++c)
    if (!sizes[c]) throw_usage("EmptyCluster", "cluster " + std::to_string(c) + " has no points");

  double total = 0.0;
  std::vector<double> sums(k);
  for (std::size_t i = 0; i < n; ++i) {
    std::fill(sums.begin(), sums.end(), 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      sums[labels[j]] += std::sqrt(sq_dist(z.row(i), z.row(j)));
    }
    const std::size_t own = labels[i];
    if (sizes[own] == 1) continue;  // s_i = 0
    const double a = sums[own] / static_cast<double>(sizes[own] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c)
      if (c != own) b = std::min(b, sums[c] / static_cast<double>(sizes[c]));
    const double denom = std::max(a, b);
    if (denom > 0.0) total += (b - a) / denom;
  }
  return total / static_cast<double>(n);
}

KSelectionReport select_k(const Matrix& z, std::size_t k_min, std::size_t k_max, std::uint64_t seed,
                          const KMeansOptions& options) {
  if (k_min < 2 || k_min > k_max || k_max + 1 > z.rows())
    throw_usage("InvalidKRange", "need 2 <= k_min <= k_max <= n-1");
  KSelectionReport report;
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t k = k_min; k <= k_max; ++k) {
    const KMeansModel m = kmeans_fit(z, k, seed, options);
    const double s = silhouette(z, m.labels);
    report.entries.push_back({k, m.inertia, s});
    if (s > best) {
      best = s;
      report.chosen_k = k;
    }
  }
  return report;
}

ClusterProfile characterize(const KMeansModel& model, const Table& original) {
  if (model.labels.size() != original.n_rows())
    throw_usage("RowMismatch", "model has " + std::to_string(model.labels.size()) + " labels, table has " +
                                   std::to_string(original.n_rows()) + " rows");
  ClusterProfile p;
  p.features = original.numeric_column_names();
  const std::size_t k = model.k();
  p.sizes.assign(k, 0);
  for (auto l : model.labels) ++p.sizes[l];
  p.means = Matrix(k, p.features.size());
  for (std::size_t f = 0; f < p.features.size(); ++f) {
    const auto& col = original.column(p.features[f]).numeric;
    std::vector<double> sum(k, 0.0);
    std::vector<std::size_t> cnt(k, 0);
    for (std::size_t i = 0; i < col.size(); ++i) {
      if (std::isnan(col[i])) continue;
      sum[model.labels[i]] += col[i];
      ++cnt[model.labels[i]];
    }
    for (std::size_t c = 0; c < k; ++c)
      p.means(c, f) = cnt[c] ? sum[c] / static_cast<double>(cnt[c]) : std::numeric_limits<double>::quiet_NaN();
  }
  return p;
}

}  // namespace tabkit
