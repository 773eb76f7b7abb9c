#pragma once

#include <span>
#include <vector>

#include "tabkit/matrix.hpp"
#include "tabkit/preprocess.hpp"

namespace tabkit {

enum class Penalty { L1, L2 };

struct LogRegParams {
  Penalty penalty = Penalty::L2;
  double c = 1.0;  ///< inverse regularization strength, > 0
  std::size_t max_iter = 2000;
  double tol = 1e-6;
};

/// P(y = 1 | x) = sigmoid(w.x + b).
struct LogRegModel {
  std::vector<double> weights;
  double bias = 0.0;
  Penalty penalty = Penalty::L2;
  double c = 1.0;
  bool converged = false;
  std::size_t n_iter = 0;
  /// Final stationarity measure: gradient norm (L2) or gradient-mapping
  /// norm (L1).
  double gradient_norm = 0.0;
  /// Objective after every accepted step, starting from the zero model.
  std::vector<double> objective_trace;

  double decision(std::span<const double> x) const;
  double predict_proba(std::span<const double> x) const;
  int predict(std::span<const double> x) const { return decision(x) > 0.0 ? 1 : 0; }
  std::size_t zero_weight_count() const;
};

/// Numerically stable logistic function.
double sigmoid(double t);

/// sum_i logloss_i + R(w), with R = ||w||_2^2 / (2C) (L2) or ||w||_1 / C
/// (L1). The bias is never penalized.
double logreg_objective(const Matrix& x, const Labels& y, std::span<const double> w, double b, Penalty penalty,
                        double c);

/// Gradient of logreg_objective: p weight partials followed by the bias
/// partial. For L1 the penalty contributes sign(w_j) / C (0 at w_j = 0).
std::vector<double> logreg_gradient(const Matrix& x, const Labels& y, std::span<const double> w, double b,
                                    Penalty penalty, double c);

/// Mean unpenalized log-loss of a fitted model.
double logreg_mean_logloss(const LogRegModel& m, const Matrix& x, const Labels& y);

/// L2: damped Newton steps with Armijo backtracking until the gradient norm
/// is <= tol. L1: proximal gradient (soft-thresholding) with backtracking and
/// monotone momentum until the gradient-mapping norm is <= tol. Running out
/// of iterations returns the model with converged = false.
/// Throws SingleClass or DimensionMismatch.
LogRegModel logreg_fit(const Matrix& x, const Labels& y, const LogRegParams& params);

}  // namespace tabkit
