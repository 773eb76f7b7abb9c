#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "tabkit/error.hpp"
#include "tabkit/matrix.hpp"
#include "tabkit/rng.hpp"

namespace tabkit::test {

// Code of the tabkit::Error thrown by f, or "" when nothing is thrown.
template <class F>
std::string error_code(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return "";
}

template <class F>
ErrorKind error_kind(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  throw std::logic_error("no error thrown");
}

inline Matrix random_matrix(std::size_t rows, std::size_t cols, SplitMix64& rng, double sd = 1.0) {
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = rng.normal(0.0, sd);
  return m;
}

// Fresh scratch directory under the system temp directory.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("tabkit_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace tabkit::test

namespace tabkit::test {

// Minimum within-cluster sum of squares over every split of the rows into
// two nonempty groups. Exponential; meant for n <= 16.
inline double best_two_partition_inertia(const Matrix& z) {
  const std::size_t n = z.rows(), d = z.cols();
  double best = std::numeric_limits<double>::infinity();
  // Fixing row 0 in group 0 visits each partition once.
  for (std::uint32_t mask = 1; mask < (1u << (n - 1)); ++mask) {
    double total = 0;
    for (int g = 0; g < 2; ++g) {
      std::vector<double> mean(d, 0.0);
      std::size_t count = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const int gi = i == 0 ? 0 : static_cast<int>((mask >> (i - 1)) & 1u);
        if (gi != g) continue;
        ++count;
        for (std::size_t j = 0; j < d; ++j) mean[j] += z(i, j);
      }
      for (auto& m : mean) m /= static_cast<double>(count);
      for (std::size_t i = 0; i < n; ++i) {
        const int gi = i == 0 ? 0 : static_cast<int>((mask >> (i - 1)) & 1u);
        if (gi != g) continue;
        for (std::size_t j = 0; j < d; ++j) total += (z(i, j) - mean[j]) * (z(i, j) - mean[j]);
      }
    }
    best = std::min(best, total);
  }
  return best;
}

}  // namespace tabkit::test
