#include <doctest.h>

#include <map>
#include <numeric>

#include "support.hpp"
#include "tabkit/cluster.hpp"

using namespace tabkit;
using tabkit::test::error_code;
using tabkit::test::random_matrix;

namespace {

Matrix blobs(const std::vector<std::vector<double>>& centers, std::size_t per, double sd, SplitMix64& rng) {
  Matrix z(centers.size() * per, centers[0].size());
  for (std::size_t c = 0; c < centers.size(); ++c)
    for (std::size_t i = 0; i < per; ++i)
      for (std::size_t j = 0; j < z.cols(); ++j) z(c * per + i, j) = centers[c][j] + rng.normal(0, sd);
  return z;
}

// Silhouette by direct pairwise evaluation.
double silhouette_oracle(const Matrix& z, const std::vector<std::size_t>& labels) {
  const std::size_t n = z.rows();
  const std::size_t k = *std::max_element(labels.begin(), labels.end()) + 1;
  double total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> sum(k, 0.0);
    std::vector<std::size_t> cnt(k, 0);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      double d = 0;
      for (std::size_t c = 0; c < z.cols(); ++c) d += (z(i, c) - z(j, c)) * (z(i, c) - z(j, c));
      sum[labels[j]] += std::sqrt(d);
      ++cnt[labels[j]];
    }
    if (cnt[labels[i]] == 0) continue;
    const double a = sum[labels[i]] / static_cast<double>(cnt[labels[i]]);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c)
      if (c != labels[i] && cnt[c]) b = std::min(b, sum[c] / static_cast<double>(cnt[c]));
    total += (b - a) / std::max(a, b);
  }
  return total / static_cast<double>(n);
}

}  // namespace

TEST_CASE("k = 1 gives the column means and total sum of squares") {
  SplitMix64 rng(1);
  const Matrix z = random_matrix(25, 3, rng);
  const auto m = kmeans_fit(z, 1, 5);
  const auto means = column_means(z);
  double ss = 0;
  for (std::size_t i = 0; i < 25; ++i)
    for (std::size_t j = 0; j < 3; ++j) ss += (z(i, j) - means[j]) * (z(i, j) - means[j]);
  for (std::size_t j = 0; j < 3; ++j) CHECK(m.centroids(0, j) == doctest::Approx(means[j]).epsilon(1e-12));
  CHECK(m.inertia == doctest::Approx(ss).epsilon(1e-12));
}

TEST_CASE("k = n gives zero inertia") {
  SplitMix64 rng(2);
  const Matrix z = random_matrix(8, 2, rng);
  CHECK(kmeans_fit(z, 8, 3).inertia <= 1e-20);
  CHECK(error_code([&] { kmeans_fit(z, 9, 3); }) == "KTooLarge");
  CHECK(error_code([] { kmeans_fit(Matrix(), 1, 3); }) == "EmptyInput");
}

TEST_CASE("two separated blobs match the exhaustive optimum") {
  SplitMix64 rng(3);
  const Matrix z = blobs({{0, 0}, {6, 6}}, 5, 0.7, rng);
  const auto m = kmeans_fit(z, 2, 17);
  CHECK(std::abs(m.inertia - tabkit::test::best_two_partition_inertia(z)) <= 1e-9);
}

TEST_CASE("model invariants hold after fitting") {
  SplitMix64 rng(4);
  for (int rep = 0; rep < 10; ++rep) {
    const Matrix z = random_matrix(40 + rng.below(40), 3, rng);
    const std::size_t k = 2 + rng.below(5);
    const auto m = kmeans_fit(z, k, rng());
    CHECK(std::abs(m.inertia - inertia_of(z, m.centroids, m.labels)) <= 1e-9);
    CHECK(assign_nearest(z, m.centroids) == m.labels);
    for (std::size_t c = 0; c < k; ++c) {
      std::vector<double> mean(3, 0.0);
      std::size_t count = 0;
      for (std::size_t i = 0; i < z.rows(); ++i)
        if (m.labels[i] == c) {
          ++count;
          for (std::size_t j = 0; j < 3; ++j) mean[j] += z(i, j);
        }
      REQUIRE(count > 0);
      for (std::size_t j = 0; j < 3; ++j) CHECK(std::abs(mean[j] / count - m.centroids(c, j)) <= 1e-9);
    }
  }
}

TEST_CASE("Lloyd inertia never increases") {
  SplitMix64 rng(5);
  for (int rep = 0; rep < 20; ++rep) {
    const Matrix z = random_matrix(60, 2, rng);
    SplitMix64 init(rng());
    const auto run = lloyd(z, kmeanspp_init(z, 4, init), 300, 1e-6);
    for (std::size_t t = 1; t < run.inertia_trace.size(); ++t)
      CHECK(run.inertia_trace[t] <= run.inertia_trace[t - 1] + 1e-12);
  }
}

TEST_CASE("assignment ties go to the lowest index") {
  const Matrix z = Matrix::from_rows({{0.0}});
  const Matrix c = Matrix::from_rows({{1.0}, {-1.0}});
  CHECK(assign_nearest(z, c) == std::vector<std::size_t>{0});
}

TEST_CASE("fixed seed is reproducible across thread counts") {
  SplitMix64 rng(6);
  const Matrix z = random_matrix(120, 3, rng);
  KMeansOptions one, four;
  four.threads = 4;
  const auto a = kmeans_fit(z, 4, 99, one), b = kmeans_fit(z, 4, 99, four), c = kmeans_fit(z, 4, 99, one);
  CHECK(a.labels == b.labels);
  CHECK(a.centroids == b.centroids);
  CHECK(a.inertia == b.inertia);
  CHECK(a.centroids == c.centroids);
}

TEST_CASE("k-means++ seeding follows the squared-distance law") {
  // Points 0, 2, 3, 5 on a line; the first center is uniform and the second is
  // drawn with probability D^2 / sum D^2. Chi-square over the 12 ordered pairs.
  const std::vector<double> pts{0, 2, 3, 5};
  Matrix z(4, 1);
  for (std::size_t i = 0; i < 4; ++i) z(i, 0) = pts[i];
  std::map<std::pair<double, double>, int> observed;
  const int draws = 1000;
  for (int t = 0; t < draws; ++t) {
    SplitMix64 rng(stream_seed(2024, static_cast<std::uint64_t>(t)));
    const Matrix c = kmeanspp_init(z, 2, rng);
    ++observed[{c(0, 0), c(1, 0)}];
  }
  double chi2 = 0;
  for (double a : pts) {
    double denom = 0;
    for (double b : pts) denom += (a - b) * (a - b);
    for (double b : pts) {
      if (a == b) continue;
      const double expected = draws * 0.25 * (a - b) * (a - b) / denom;
      const double o = observed[{a, b}];
      chi2 += (o - expected) * (o - expected) / expected;
    }
  }
  // 11 degrees of freedom; the 0.999 quantile is 31.26.
  CHECK(chi2 < 31.26);
}

TEST_CASE("silhouette") {
  SplitMix64 rng(7);
  const Matrix z = blobs({{0, 0}, {20, 20}}, 15, 0.5, rng);
  std::vector<std::size_t> labels(30);
  for (std::size_t i = 15; i < 30; ++i) labels[i] = 1;
  const double s = silhouette(z, labels);
  CHECK(s == doctest::Approx(silhouette_oracle(z, labels)).epsilon(1e-12));
  CHECK(s > 0.9);

  CHECK(error_code([&] { silhouette(z, std::vector<std::size_t>(30, 0)); }) == "SingleCluster");
  CHECK(error_code([] { silhouette(Matrix(2, 1), {0, 1}); }) == "TooFewPoints");

  for (int rep = 0; rep < 10; ++rep) {
    const Matrix r = random_matrix(25, 2, rng);
    std::vector<std::size_t> lab(25);
    for (std::size_t i = 0; i < 25; ++i) lab[i] = i < 3 ? i : rng.below(3);
    const double v = silhouette(r, lab);
    CHECK(v >= -1.0);
    CHECK(v <= 1.0);
    CHECK(v == doctest::Approx(silhouette_oracle(r, lab)).epsilon(1e-12));
  }
}

TEST_CASE("select_k recovers three blobs") {
  SplitMix64 rng(8);
  const Matrix z = blobs({{0, 0}, {10, 0}, {5, 9}}, 30, 0.8, rng);
  const auto r = select_k(z, 2, 6, 5);
  CHECK(r.chosen_k == 3);
  REQUIRE(r.entries.size() == 5);
  for (std::size_t i = 1; i < r.entries.size(); ++i) CHECK(r.entries[i].inertia <= r.entries[i - 1].inertia + 1e-9);
  CHECK(error_code([&] { select_k(z, 1, 4, 5); }) == "InvalidKRange");
  CHECK(error_code([&] { select_k(z, 2, 90, 5); }) == "InvalidKRange");
}

TEST_CASE("characterize reports per-cluster means in original units") {
  Table t("t");
  t.add_column(Column::make_numeric("a", {1, 2, 3, 10, 12, 14}));
  t.add_column(Column::make_categorical("c", {"x", "y", "x", "y", "x", "y"}));
  t.add_column(Column::make_numeric("b", {0, 0, 0, 5, 5, 5}));
  KMeansModel m;
  m.centroids = Matrix(2, 1);
  m.labels = {0, 0, 0, 1, 1, 1};
  const auto p = characterize(m, t);
  CHECK(p.features == std::vector<std::string>{"a", "b"});
  CHECK(p.sizes == std::vector<std::size_t>{3, 3});
  CHECK(p.means(0, 0) == 2.0);
  CHECK(p.means(1, 0) == 12.0);
  for (std::size_t f = 0; f < 2; ++f) {
    const double global = f == 0 ? 42.0 / 6 : 15.0 / 6;
    CHECK(3 * p.means(0, f) + 3 * p.means(1, f) == doctest::Approx(6 * global));
  }
  m.labels.pop_back();
  CHECK(error_code([&] { characterize(m, t); }) == "RowMismatch");

  KMeansModel single;
  single.centroids = Matrix(1, 1);
  single.labels.assign(6, 0);
  const auto g = characterize(single, t);
  CHECK(g.means(0, 0) == doctest::Approx(7.0));
}
