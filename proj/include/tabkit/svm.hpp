#pragma once

#include <optional>
#include <span>
#include <vector>

#include "tabkit/matrix.hpp"
#include "tabkit/preprocess.hpp"

namespace tabkit {

enum class GammaRule { Scale, Auto };

struct SvmParams {
  double c = 1.0;
  GammaRule gamma_rule = GammaRule::Scale;
  std::optional<double> gamma;  ///< overrides the rule when set
  double tol = 1e-3;
  std::size_t max_iter = 10'000'000;
  bool record_dual_trace = false;
};

/// RBF-kernel soft-margin classifier. Labels are {0, 1} outside and
/// {-1, +1} inside: class 1 maps to +1.
struct SvmModel {
  Matrix support_vectors;
  std::vector<double> dual_coef;  ///< alpha_i * y_i per support vector
  double intercept = 0.0;         ///< b in sum_i alpha_i y_i K(x_i, x) + b
  double c = 1.0;
  double gamma = 1.0;             ///< resolved value
  bool converged = false;
  std::size_t n_iter = 0;

  /// Signed decision value.
  double score(std::span<const double> x) const;
  int predict(std::span<const double> x) const { return score(x) > 0.0 ? 1 : 0; }
};

struct SvmFit {
  SvmModel model;
  std::vector<double> alpha;       ///< every training point, in [0, C]
  std::vector<double> dual_trace;  ///< sum(alpha) - alpha^T Q alpha / 2 per iteration, when recorded
};

double rbf_kernel(std::span<const double> a, std::span<const double> b, double gamma);

/// scale: 1 / (p * population variance of all entries), or 1 when that
/// variance is 0. auto: 1 / p.
double resolve_gamma(const Matrix& x, GammaRule rule);

/// SMO with second-order working-set selection. Stops when the maximal KKT
/// violation m(alpha) - M(alpha) is <= tol. The intercept is the mean of
/// y_i * grad_i over free vectors, else the midpoint of the feasible
/// interval. Throws SingleClass, LabelNotBinary, DimensionMismatch,
/// InvalidParameter. Hitting max_iter leaves converged = false.
SvmFit svm_fit_detailed(const Matrix& x, const Labels& y, const SvmParams& params);
SvmModel svm_fit(const Matrix& x, const Labels& y, const SvmParams& params);

}  // namespace tabkit
