#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tabkit/matrix.hpp"
#include "tabkit/rng.hpp"
#include "tabkit/tabular.hpp"

namespace tabkit {

struct KMeansModel {
  Matrix centroids;                 ///< k x d
  std::vector<std::size_t> labels;  ///< per row, in [0, k)
  double inertia = 0.0;             ///< sum of squared distances to assigned centroids
  std::size_t n_iter = 0;           ///< Lloyd iterations of the winning restart
  std::uint64_t seed = 0;
  std::size_t best_restart = 0;

  std::size_t k() const noexcept { return centroids.rows(); }
};

struct KMeansOptions {
  std::size_t n_init = 10;
  std::size_t max_iter = 300;
  double tol = 1e-6;  ///< stop when the total squared centroid shift is below this
  unsigned threads = 1;
};

/// Result of one Lloyd descent from given initial centroids.
struct LloydRun {
  Matrix centroids;
  std::vector<std::size_t> labels;
  double inertia = 0.0;
  std::size_t n_iter = 0;
  /// Inertia after every assignment step; nonincreasing.
  std::vector<double> inertia_trace;
};

/// k-means++ seeding: first center uniform, then each next center drawn with
/// probability proportional to squared distance to the nearest chosen center.
Matrix kmeanspp_init(const Matrix& z, std::size_t k, SplitMix64& rng);

/// Lloyd iterations. Ties in assignment go to the lowest centroid index. An
/// emptied cluster receives the point farthest from its own centroid. The
/// returned labels are the argmin assignment for the returned centroids, and
/// each centroid is the mean of its points.
LloydRun lloyd(const Matrix& z, Matrix initial_centroids, std::size_t max_iter, double tol);

/// Best of n_init k-means++ restarts by inertia (ties to the lower restart
/// index). Restart r draws from stream r of `seed`. Throws EmptyInput or
/// KTooLarge.
KMeansModel kmeans_fit(const Matrix& z, std::size_t k, std::uint64_t seed, const KMeansOptions& options = {});

/// Assigns rows to the nearest centroid (ties to the lowest index).
std::vector<std::size_t> assign_nearest(const Matrix& z, const Matrix& centroids);
double inertia_of(const Matrix& z, const Matrix& centroids, const std::vector<std::size_t>& labels);

/// Mean silhouette over all points; a point in a singleton cluster scores 0.
/// Throws TooFewPoints (n < 3), SingleCluster, or EmptyCluster when a label
/// in [0, max label] has no members.
double silhouette(const Matrix& z, const std::vector<std::size_t>& labels);

struct KSelectionEntry {
  std::size_t k;
  double inertia;
  double silhouette;
};

struct KSelectionReport {
  std::vector<KSelectionEntry> entries;
  std::size_t chosen_k = 0;  ///< argmax silhouette, ties to the smaller k
};

/// Fits every k in [k_min, k_max] with the same seed and restart policy.
/// Throws InvalidKRange unless 2 <= k_min <= k_max <= n-1.
KSelectionReport select_k(const Matrix& z, std::size_t k_min, std::size_t k_max, std::uint64_t seed,
                          const KMeansOptions& options = {});

struct ClusterProfile {
  std::vector<std::string> features;
  std::vector<std::size_t> sizes;  ///< per cluster
  Matrix means;                    ///< clusters x features, missing cells skipped
};

/// Per-cluster means of every numeric column of `original`. Throws
/// RowMismatch when the label count differs from the row count.
ClusterProfile characterize(const KMeansModel& model, const Table& original);

}  // namespace tabkit
