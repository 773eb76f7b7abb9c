#pragma once

#include <string>
#include <variant>
#include <vector>

#include "tabkit/matrix.hpp"

namespace tabkit {

/// Sample covariance C = X^T X / (n-1) of the column-centered input. The
/// input is centered internally, so already-centered data passes through
/// unchanged. The result is exactly symmetric. Throws TooFewRows (n < 2).
Matrix covariance(const Matrix& x);

struct EigenDecomposition {
  std::vector<double> values;  ///< descending
  Matrix vectors;              ///< column k pairs with values[k]
  int sweeps = 0;
  double off_diagonal = 0.0;   ///< largest |c_ij|, i != j, at exit
};

/// Symmetric eigendecomposition by cyclic Jacobi rotations. Stops once the
/// largest off-diagonal magnitude is <= 1e-12 * max(1, ||C||_F), or after
/// 100 sweeps (NoConvergence, message carries the residual). Each
/// eigenvector is signed so its largest-magnitude entry is positive.
/// Throws NotSymmetric when |c_ij - c_ji| > 1e-8.
EigenDecomposition eigh(const Matrix& c);

struct FixedK {
  std::size_t k;
};
struct VarianceTarget {
  double fraction;
};
using ComponentSelection = std::variant<FixedK, VarianceTarget>;

struct PcaModel {
  std::vector<double> mean;                      ///< length p
  Matrix components;                             ///< p x k, orthonormal columns
  std::vector<double> eigenvalues;               ///< all p, descending, clamped at 0
  std::vector<double> explained_variance_ratio;  ///< all p
  std::size_t k_retained = 0;

  std::size_t n_features() const noexcept { return mean.size(); }
  double cumulative_ratio(std::size_t k) const;
};

/// Centers, takes the covariance, and keeps either k components or the
/// smallest k whose cumulative ratio reaches the target fraction.
PcaModel fit_pca(const Matrix& z, const ComponentSelection& select);

/// Scores Z = (x - mean) V_k. Throws DimensionMismatch.
Matrix transform(const PcaModel& model, const Matrix& x);
/// x_hat = Z V_k^T + mean.
Matrix inverse_transform(const PcaModel& model, const Matrix& scores);

struct ScreePoint {
  std::size_t index;  ///< 1-based component number
  double eigenvalue;
  double ratio;
  double cumulative;
};
std::vector<ScreePoint> scree_data(const PcaModel& model);

struct LoadingTable {
  std::vector<std::string> features;
  std::vector<std::string> components;  ///< "PC1".."PCk"
  Matrix values;                        ///< features x components
};
/// Retained eigenvectors labelled by feature. Throws DimensionMismatch if the
/// name count differs from the model's feature count.
LoadingTable loadings(const PcaModel& model, const std::vector<std::string>& feature_names);

}  // namespace tabkit
