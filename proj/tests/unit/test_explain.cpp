#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "support.hpp"
#include "tabkit/explain.hpp"

using namespace tabkit;
using tabkit::test::error_code;
using tabkit::test::random_matrix;

namespace {

// Smooth model with interactions over 8 inputs.
double nonlinear(std::span<const double> x) {
  return std::tanh(x[0] + 0.5 * x[1] * x[2]) + 0.8 * x[3] - 0.3 * x[4] * x[4] + std::sin(x[5]) * x[6] + 0.1 * x[7];
}

double range_of(const ModelFn& f, const Matrix& pts) {
  double lo = 1e300, hi = -1e300;
  for (std::size_t i = 0; i < pts.rows(); ++i) {
    lo = std::min(lo, f(pts.row(i)));
    hi = std::max(hi, f(pts.row(i)));
  }
  return hi - lo;
}

}  // namespace

TEST_CASE("additive model with a zero-mean background") {
  const Matrix bg = Matrix::from_rows({{1, -2}, {-1, 2}});
  const ModelFn f = [](std::span<const double> x) { return x[0] + x[1]; };
  const std::vector<double> x{3.0, -0.5};
  const auto e = shap_exact(f, bg, x);
  CHECK(e.values[0] == doctest::Approx(3.0));
  CHECK(e.values[1] == doctest::Approx(-0.5));
  CHECK(e.base_value == doctest::Approx(0.0));
}

TEST_CASE("dummy feature and efficiency") {
  SplitMix64 rng(81);
  const Matrix bg = random_matrix(10, 8, rng);
  const ModelFn ignores = [](std::span<const double> x) { return x[0] * x[1] + std::exp(x[2]); };
  const Matrix pts = random_matrix(5, 8, rng);
  for (std::size_t i = 0; i < pts.rows(); ++i) {
    const auto e = shap_exact(ignores, bg, pts.row(i));
    for (std::size_t j = 3; j < 8; ++j) CHECK(e.values[j] == 0.0);
    const double sum = std::accumulate(e.values.begin(), e.values.end(), 0.0);
    CHECK(std::abs(e.base_value + sum - e.output) <= 1e-9);
    CHECK(e.output == doctest::Approx(ignores(pts.row(i))).epsilon(1e-14));
  }
}

TEST_CASE("symmetry and linearity") {
  SplitMix64 rng(82);
  Matrix bg = random_matrix(6, 4, rng);
  for (std::size_t i = 0; i < bg.rows(); ++i) bg(i, 1) = bg(i, 0);
  std::vector<double> x{0.7, 0.7, -1.0, 2.0};
  const ModelFn sym = [](std::span<const double> v) { return v[0] * v[1] + v[0] + v[1] + v[2] * v[3]; };
  const auto e = shap_exact(sym, bg, x);
  CHECK(e.values[0] == doctest::Approx(e.values[1]).epsilon(1e-12));

  const ModelFn f = [](std::span<const double> v) { return v[0] * v[2] - v[3]; };
  const ModelFn g = [](std::span<const double> v) { return std::cos(v[1]) + v[2] * v[2]; };
  const ModelFn h = [&](std::span<const double> v) { return 2.5 * f(v) - 0.5 * g(v); };
  const auto ef = shap_exact(f, bg, x), eg = shap_exact(g, bg, x), eh = shap_exact(h, bg, x);
  for (std::size_t j = 0; j < 4; ++j) CHECK(eh.values[j] == doctest::Approx(2.5 * ef.values[j] - 0.5 * eg.values[j]));
}

TEST_CASE("sampling agrees with exact enumeration") {
  SplitMix64 rng(83);
  const Matrix bg = random_matrix(12, 8, rng);
  const Matrix pts = random_matrix(3, 8, rng);
  const double range = range_of(nonlinear, random_matrix(200, 8, rng));
  for (std::size_t i = 0; i < pts.rows(); ++i) {
    const auto exact = shap_exact(nonlinear, bg, pts.row(i));
    const auto sampled = shap_sample(nonlinear, bg, pts.row(i), 2000, 17);
    CHECK(tabkit::test::max_abs_diff(exact.values, sampled.values) <= 0.05 * range);
    const double sum = std::accumulate(sampled.values.begin(), sampled.values.end(), 0.0);
    CHECK(std::abs(sampled.base_value + sum - sampled.output) <= 1e-9);
  }
}

TEST_CASE("sampling is deterministic in the seed and thread count") {
  SplitMix64 rng(84);
  const Matrix bg = random_matrix(8, 8, rng);
  const Matrix x = random_matrix(1, 8, rng);
  const auto a = shap_sample(nonlinear, bg, x.row(0), 64, 3, 1);
  const auto b = shap_sample(nonlinear, bg, x.row(0), 64, 3, 4);
  const auto c = shap_sample(nonlinear, bg, x.row(0), 64, 4, 1);
  CHECK(a.values == b.values);
  CHECK(a.values != c.values);
  for (std::size_t q : {1, 2, 5}) {
    const auto s = shap_sample(nonlinear, bg, x.row(0), q, 9);
    const double sum = std::accumulate(s.values.begin(), s.values.end(), 0.0);
    CHECK(std::abs(s.base_value + sum - s.output) <= 1e-9);
  }
}

TEST_CASE("more permutations do not drift away from the exact values") {
  SplitMix64 rng(85);
  const Matrix bg = random_matrix(10, 8, rng);
  const Matrix x = random_matrix(1, 8, rng);
  const auto exact = shap_exact(nonlinear, bg, x.row(0));
  int violations = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const double small = tabkit::test::max_abs_diff(exact.values, shap_sample(nonlinear, bg, x.row(0), 16, seed).values);
    const double big = tabkit::test::max_abs_diff(exact.values, shap_sample(nonlinear, bg, x.row(0), 1024, seed + 100).values);
    if (big > small) ++violations;
  }
  CHECK(violations <= 1);
}

TEST_CASE("summary ranking") {
  SplitMix64 rng(86);
  const Matrix bg = random_matrix(10, 5, rng);
  const Matrix inst = random_matrix(7, 5, rng);
  const ModelFn only0 = [](std::span<const double> x) { return 3 * x[0]; };
  const auto s = shap_summary(only0, bg, inst, 0, 1);
  CHECK(s.entries[0].feature == 0);
  CHECK(s.n_instances == 7);
  for (std::size_t i = 1; i < s.entries.size(); ++i) {
    CHECK(s.entries[i].mean_abs == 0.0);
    CHECK(s.entries[i].feature == i);  // ties keep index order
  }
  const auto one = shap_summary(nonlinear, random_matrix(6, 8, rng), random_matrix(1, 8, rng), 0, 1);
  for (std::size_t i = 1; i < one.entries.size(); ++i) CHECK(one.entries[i - 1].mean_abs >= one.entries[i].mean_abs);

  const Matrix single = random_matrix(1, 5, rng);
  const ModelFn lin = [](std::span<const double> x) { return x[0] - 2 * x[1] + 0.5 * x[4]; };
  const auto sum1 = shap_summary(lin, bg, single, 0, 1);
  const auto e = shap_exact(lin, bg, single.row(0));
  for (const auto& entry : sum1.entries) CHECK(entry.mean_abs == doctest::Approx(std::abs(e.values[entry.feature])));
}

TEST_CASE("explain errors") {
  const ModelFn f = [](std::span<const double> x) { return x[0]; };
  const std::vector<double> x13(13, 0.0), x2(2, 0.0);
  CHECK(error_code([&] { shap_exact(f, Matrix(3, 13), x13); }) == "TooManyFeatures");
  CHECK(error_code([&] { shap_exact(f, Matrix(0, 2), x2); }) == "EmptyBackground");
  CHECK(error_code([&] { shap_sample(f, Matrix(0, 2), x2, 5, 1); }) == "EmptyBackground");
  CHECK(error_code([&] { shap_exact(f, Matrix(3, 3), x2); }) == "DimensionMismatch");
  CHECK(error_code([&] { shap_sample(f, Matrix(3, 2), x2, 0, 1); }) == "InvalidParameter");
  CHECK(error_code([&] { shap_summary(f, Matrix(3, 2), Matrix(0, 2), 0, 1); }) == "EmptyInput");
}

TEST_CASE("sample_rows keeps order and draws without replacement") {
  Matrix x(30, 1);
  for (std::size_t i = 0; i < 30; ++i) x(i, 0) = static_cast<double>(i);
  const Matrix s = sample_rows(x, 10, 4);
  REQUIRE(s.rows() == 10);
  for (std::size_t i = 1; i < 10; ++i) CHECK(s(i, 0) > s(i - 1, 0));
  CHECK(sample_rows(x, 50, 4) == x);
  CHECK(sample_rows(x, 10, 4) == s);
}
