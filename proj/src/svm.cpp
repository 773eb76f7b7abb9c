#include "tabkit/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tabkit/error.hpp"

namespace tabkit {

constexpr double kTau = 1e-12;

double rbf_kernel(std::span<const double> a, std::span<const double> b, double gamma) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += (a[j] - b[j]) * (a[j] - b[j]);
  return std::exp(-gamma * s);
}

double resolve_gamma(const Matrix& x, GammaRule rule) {
  const double p = static_cast<double>(x.cols());
  if (rule == GammaRule::Auto) return 1.0 / p;
  const auto& v = x.data();
  double m = 0.0;
  for (double e : v) m += e;
  m /= static_cast<double>(v.size());
  double var = 0.0;
  for (double e : v) var += (e - m) * (e - m);
  var /= static_cast<double>(v.size());
  return var > 0.0 ? 1.0 / (p * var) : 1.0;
}

double SvmModel::score(std::span<const double> x) const {
  if (x.size() != support_vectors.cols()) throw_usage("DimensionMismatch", "feature count differs from the model");
  double s = intercept;
  for (std::size_t i = 0; i < dual_coef.size(); ++i) s += dual_coef[i] * rbf_kernel(support_vectors.row(i), x, gamma);
  return s;
}

SvmFit svm_fit_detailed(const Matrix& x, const Labels& labels, const SvmParams& params) {
  const std::size_t n = x.rows();
  if (n != labels.size()) throw_usage("DimensionMismatch", "row count differs from label count");
  if (n == 0 || x.cols() == 0) throw_usage("EmptyInput", "no training rows");
  if (!(params.c > 0.0)) throw_usage("InvalidParameter", "C must be positive");
  std::vector<double> y(n);
  bool has[2] = {false, false};
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] != 0 && labels[i] != 1) throw_data("LabelNotBinary", "labels must be 0 or 1");
    has[labels[i]] = true;
    y[i] = labels[i] == 1 ? 1.0 : -1.0;
  }
  if (!has[0] || !has[1]) throw_data("SingleClass", "both classes are required");

  const double gamma = params.gamma ? *params.gamma : resolve_gamma(x, params.gamma_rule);
  const double c = params.c;
  // Q_ij = y_i y_j K_ij, kept in full.
  std::vector<double> q(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    q[i * n + i] = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = y[i] * y[j] * rbf_kernel(x.row(i), x.row(j), gamma);
      q[i * n + j] = v;
      q[j * n + i] = v;
    }
  }

  SvmFit out;
  std::vector<double> alpha(n, 0.0), grad(n, -1.0);
  auto dual = [&] {
    double d = 0.0;
    for (std::size_t i = 0; i < n; ++i) d += 0.5 * alpha[i] - 0.5 * alpha[i] * grad[i];
    return d;
  };
  if (params.record_dual_trace) out.dual_trace.push_back(0.0);

  std::size_t iter = 0;
  bool converged = false;
  while (iter < params.max_iter) {
    // Working set: i maximizes the violation, j the second-order gain.
    double gmax = -std::numeric_limits<double>::infinity(), gmax2 = gmax;
    std::size_t i = n, j = n;
    for (std::size_t t = 0; t < n; ++t) {
      if (y[t] > 0 ? alpha[t] < c : alpha[t] > 0.0) {
        const double v = -y[t] * grad[t];
        if (v >= gmax) {
          gmax = v;
          i = t;
        }
      }
    }
    double best = std::numeric_limits<double>::infinity();
    const double* qi = i < n ? &q[i * n] : nullptr;
    for (std::size_t t = 0; t < n; ++t) {
      if (!(y[t] > 0 ? alpha[t] > 0.0 : alpha[t] < c)) continue;
      const double v = y[t] * grad[t];
      if (v >= gmax2) gmax2 = v;
      const double diff = gmax + v;
      if (qi && diff > 0.0) {
        double quad = 2.0 - 2.0 * y[i] * y[t] * qi[t];
        if (quad <= 0.0) quad = kTau;
        const double gain = -(diff * diff) / quad;
        if (gain <= best) {
          best = gain;
          j = t;
        }
      }
    }
    if (gmax + gmax2 < params.tol || i == n || j == n) {
      converged = true;
      break;
    }
    ++iter;

    const double ai = alpha[i], aj = alpha[j];
    const double* qj = &q[j * n];
    if (y[i] != y[j]) {
      double quad = 2.0 + 2.0 * qi[j];
      if (quad <= 0.0) quad = kTau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0.0) {
        if (alpha[j] < 0.0) {
          alpha[j] = 0.0;
          alpha[i] = diff;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = -diff;
      }
      if (diff > 0.0) {
        if (alpha[i] > c) {
          alpha[i] = c;
          alpha[j] = c - diff;
        }
      } else if (alpha[j] > c) {
        alpha[j] = c;
        alpha[i] = c + diff;
      }
    } else {
      double quad = 2.0 - 2.0 * qi[j];
      if (quad <= 0.0) quad = kTau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > c) {
        if (alpha[i] > c) {
          alpha[i] = c;
          alpha[j] = sum - c;
        }
      } else if (alpha[j] < 0.0) {
        alpha[j] = 0.0;
        alpha[i] = sum;
      }
      if (sum > c) {
        if (alpha[j] > c) {
          alpha[j] = c;
          alpha[i] = sum - c;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = sum;
      }
    }
    const double di = alpha[i] - ai, dj = alpha[j] - aj;
    for (std::size_t t = 0; t < n; ++t) grad[t] += qi[t] * di + qj[t] * dj;
    if (params.record_dual_trace) out.dual_trace.push_back(dual());
  }

  double ub = std::numeric_limits<double>::infinity(), lb = -ub, sum_free = 0.0;
  std::size_t n_free = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = y[t] * grad[t];
    if (alpha[t] >= c) {
      if (y[t] < 0) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else if (alpha[t] <= 0.0) {
      if (y[t] > 0) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else {
      ++n_free;
      sum_free += yg;
    }
  }
  const double rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : 0.5 * (ub + lb);

  SvmModel& m = out.model;
  m.c = c;
  m.gamma = gamma;
  m.intercept = -rho;
  m.converged = converged;
  m.n_iter = iter;
  std::vector<std::size_t> sv;
  for (std::size_t t = 0; t < n; ++t)
    if (alpha[t] > 0.0) {
      sv.push_back(t);
      m.dual_coef.push_back(alpha[t] * y[t]);
    }
  m.support_vectors = x.select_rows(sv);
  out.alpha = std::move(alpha);
  return out;
}

SvmModel svm_fit(const Matrix& x, const Labels& y, const SvmParams& params) {
  return svm_fit_detailed(x, y, params).model;
}

}  // namespace tabkit
