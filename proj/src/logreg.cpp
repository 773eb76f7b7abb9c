#include "tabkit/logreg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tabkit/error.hpp"

namespace tabkit {
namespace {

double softplus(double u) { return std::max(u, 0.0) + std::log1p(std::exp(-std::abs(u))); }

double data_loss(const Matrix& x, const Labels& y, std::span<const double> w, double b) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    double t = b;
    auto row = x.row(i);
    for (std::size_t j = 0; j < w.size(); ++j) t += w[j] * row[j];
    s += y[i] ? softplus(-t) : softplus(t);
  }
  return s;
}

// Gradient of the data term; bias partial last.
std::vector<double> data_gradient(const Matrix& x, const Labels& y, std::span<const double> w, double b) {
  const std::size_t p = w.size();
  std::vector<double> g(p + 1, 0.0);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    double t = b;
    auto row = x.row(i);
    for (std::size_t j = 0; j < p; ++j) t += w[j] * row[j];
    const double r = sigmoid(t) - y[i];
    for (std::size_t j = 0; j < p; ++j) g[j] += r * row[j];
    g[p] += r;
  }
  return g;
}

double l1_norm(std::span<const double> w) {
  double s = 0.0;
  for (double v : w) s += std::abs(v);
  return s;
}

double sq_norm(std::span<const double> v) {
  double s = 0.0;
  for (double e : v) s += e * e;
  return s;
}

// Solves the symmetric positive definite system h d = g in place (Cholesky).
// Returns false when h is not numerically positive definite.
bool cholesky_solve(std::vector<double> h, std::size_t n, std::vector<double>& rhs) {
  for (std::size_t j = 0; j < n; ++j) {
    double d = h[j * n + j];
    for (std::size_t k = 0; k < j; ++k) d -= h[j * n + k] * h[j * n + k];
    if (!(d > 1e-300)) return false;
    d = std::sqrt(d);
    h[j * n + j] = d;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = h[i * n + j];
      for (std::size_t k = 0; k < j; ++k) s -= h[i * n + k] * h[j * n + k];
      h[i * n + j] = s / d;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    double s = rhs[i];
    for (std::size_t k = 0; k < i; ++k) s -= h[i * n + k] * rhs[k];
    rhs[i] = s / h[i * n + i];
  }
  for (std::size_t i = n; i-- > 0;) {
    double s = rhs[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= h[k * n + i] * rhs[k];
    rhs[i] = s / h[i * n + i];
  }
  return true;
}

void check_inputs(const Matrix& x, const Labels& y) {
  if (x.rows() != y.size()) throw_usage("DimensionMismatch", "row count differs from label count");
  bool has0 = false, has1 = false;
  for (int v : y) {
    if (v != 0 && v != 1) throw_data("LabelNotBinary", "labels must be 0 or 1");
    (v ? has1 : has0) = true;
  }
  if (!has0 || !has1) throw_data("SingleClass", "training labels contain a single class");
}

LogRegModel fit_l2(const Matrix& x, const Labels& y, const LogRegParams& params) {
  const std::size_t p = x.cols(), n = x.rows(), dim = p + 1;
  std::vector<double> theta(dim, 0.0);
  auto objective = [&](const std::vector<double>& th) {
    std::span<const double> w(th.data(), p);
    return logreg_objective(x, y, w, th[p], Penalty::L2, params.c);
  };

  LogRegModel m;
  m.penalty = Penalty::L2;
  m.c = params.c;
  double f = objective(theta);
  m.objective_trace.push_back(f);

  std::vector<double> h(dim * dim);
  for (std::size_t iter = 0; iter < params.max_iter; ++iter) {
    const auto g = logreg_gradient(x, y, std::span<const double>(theta.data(), p), theta[p], Penalty::L2, params.c);
    m.gradient_norm = std::sqrt(sq_norm(g));
    if (m.gradient_norm <= params.tol) {
      m.converged = true;
      break;
    }
    m.n_iter = iter + 1;

    // Hessian: X^T D X plus I/C on the weight block.
    std::fill(h.begin(), h.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      double t = theta[p];
      auto row = x.row(i);
      for (std::size_t j = 0; j < p; ++j) t += theta[j] * row[j];
      const double s = sigmoid(t);
      const double d = s * (1.0 - s);
      if (d == 0.0) continue;
      for (std::size_t a = 0; a < dim; ++a) {
        const double xa = a < p ? row[a] : 1.0;
        const double dxa = d * xa;
        for (std::size_t b = 0; b <= a; ++b) h[a * dim + b] += dxa * (b < p ? row[b] : 1.0);
      }
    }
    for (std::size_t a = 0; a < dim; ++a)
      for (std::size_t b = 0; b < a; ++b) h[b * dim + a] = h[a * dim + b];
    for (std::size_t j = 0; j < p; ++j) h[j * dim + j] += 1.0 / params.c;

    std::vector<double> dir = g;
    bool newton = cholesky_solve(h, dim, dir);
    if (!newton) {
      // Near-singular curvature (separable data, weak penalty): add a ridge.
      for (std::size_t a = 0; a < dim; ++a) h[a * dim + a] += 1e-8 * (1.0 + h[a * dim + a]);
      dir = g;
      newton = cholesky_solve(h, dim, dir);
      if (!newton) dir = g;
    }
    for (double& v : dir) v = -v;
    double slope = 0.0;
    for (std::size_t a = 0; a < dim; ++a) slope += g[a] * dir[a];
    if (slope >= 0.0) {
      dir = g;
      for (double& v : dir) v = -v;
      slope = -sq_norm(g);
    }

    double step = 1.0;
    std::vector<double> trial(dim);
    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt) {
      for (std::size_t a = 0; a < dim; ++a) trial[a] = theta[a] + step * dir[a];
      const double ft = objective(trial);
      // The slack absorbs rounding in the summed loss near the optimum.
      if (ft <= f + 1e-4 * step * slope + 1e-13 * std::abs(f)) {
        theta = trial;
        f = ft;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // no representable decrease left
    m.objective_trace.push_back(f);
  }
  if (!m.converged) {
    const auto g = logreg_gradient(x, y, std::span<const double>(theta.data(), p), theta[p], Penalty::L2, params.c);
    m.gradient_norm = std::sqrt(sq_norm(g));
    m.converged = m.gradient_norm <= params.tol;
  }
  m.weights.assign(theta.begin(), theta.begin() + static_cast<std::ptrdiff_t>(p));
  m.bias = theta[p];
  return m;
}

LogRegModel fit_l1(const Matrix& x, const Labels& y, const LogRegParams& params) {
  const std::size_t p = x.cols(), dim = p + 1;
  const double lambda = 1.0 / params.c;

  auto smooth = [&](const std::vector<double>& th) { return data_loss(x, y, std::span<const double>(th.data(), p), th[p]); };
  auto smooth_grad = [&](const std::vector<double>& th) {
    return data_gradient(x, y, std::span<const double>(th.data(), p), th[p]);
  };
  auto full = [&](const std::vector<double>& th) { return smooth(th) + lambda * l1_norm(std::span<const double>(th.data(), p)); };
  // prox of t*lambda*||w||_1 applied to a gradient step from `from`.
  auto prox_step = [&](const std::vector<double>& from, const std::vector<double>& g, double t) {
    std::vector<double> out(dim);
    for (std::size_t j = 0; j < p; ++j) {
      const double u = from[j] - t * g[j];
      const double thr = t * lambda;
      out[j] = u > thr ? u - thr : (u < -thr ? u + thr : 0.0);
    }
    out[p] = from[p] - t * g[p];
    return out;
  };
  // Backtracking on the quadratic upper bound of the smooth part.
  auto backtrack = [&](const std::vector<double>& from, double f_from, const std::vector<double>& g, double& t) {
    for (int bt = 0; bt < 80; ++bt) {
      auto cand = prox_step(from, g, t);
      double lin = 0.0, quad = 0.0;
      for (std::size_t a = 0; a < dim; ++a) {
        const double d = cand[a] - from[a];
        lin += g[a] * d;
        quad += d * d;
      }
      if (smooth(cand) <= f_from + lin + quad / (2.0 * t) + 1e-12 * std::abs(f_from)) return cand;
      t *= 0.5;
    }
    return prox_step(from, g, t);
  };

  LogRegModel m;
  m.penalty = Penalty::L1;
  m.c = params.c;
  std::vector<double> theta(dim, 0.0), prev = theta, extrap = theta;
  double F = full(theta);
  m.objective_trace.push_back(F);
  double t = 1.0, momentum = 1.0;

  for (std::size_t iter = 0; iter < params.max_iter; ++iter) {
    // Stationarity: gradient mapping at the current iterate.
    const auto g_cur = smooth_grad(theta);
    double t_check = t;
    const auto mapped = backtrack(theta, smooth(theta), g_cur, t_check);
    double gm = 0.0;
    for (std::size_t a = 0; a < dim; ++a) gm += (theta[a] - mapped[a]) * (theta[a] - mapped[a]);
    m.gradient_norm = std::sqrt(gm) / t_check;
    if (m.gradient_norm <= params.tol) {
      m.converged = true;
      break;
    }
    m.n_iter = iter + 1;

    // Accelerated candidate from the extrapolated point.
    const auto g_ex = smooth_grad(extrap);
    t = std::min(t * 2.0, 1e6);
    auto cand = backtrack(extrap, smooth(extrap), g_ex, t);
    double Fc = full(cand);
    if (Fc > F) {
      // Momentum overshot: restart and fall back to the plain step. With a
      // backtracked step size it cannot increase the objective, so any
      // increase seen here is rounding in the summed loss and is accepted.
      momentum = 1.0;
      cand = mapped;
      t = t_check;
      Fc = full(cand);
    }
    const double next_m = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
    const double beta = (momentum - 1.0) / next_m;
    momentum = next_m;
    prev = theta;
    theta = cand;
    for (std::size_t a = 0; a < dim; ++a) extrap[a] = theta[a] + beta * (theta[a] - prev[a]);
    F = Fc;
    m.objective_trace.push_back(F);
  }
  m.weights.assign(theta.begin(), theta.begin() + static_cast<std::ptrdiff_t>(p));
  m.bias = theta[p];
  return m;
}

}  // namespace

double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

double LogRegModel::decision(std::span<const double> x) const {
  if (x.size() != weights.size()) throw_usage("DimensionMismatch", "feature count differs from the model");
  double t = bias;
  for (std::size_t j = 0; j < x.size(); ++j) t += weights[j] * x[j];
  return t;
}

double LogRegModel::predict_proba(std::span<const double> x) const { return sigmoid(decision(x)); }

std::size_t LogRegModel::zero_weight_count() const {
  return static_cast<std::size_t>(std::count(weights.begin(), weights.end(), 0.0));
}

double logreg_objective(const Matrix& x, const Labels& y, std::span<const double> w, double b, Penalty penalty,
                        double c) {
  const double reg = penalty == Penalty::L2 ? sq_norm(w) / (2.0 * c) : l1_norm(w) / c;
  return data_loss(x, y, w, b) + reg;
}

std::vector<double> logreg_gradient(const Matrix& x, const Labels& y, std::span<const double> w, double b,
                                    Penalty penalty, double c) {
  auto g = data_gradient(x, y, w, b);
  for (std::size_t j = 0; j < w.size(); ++j) {
    if (penalty == Penalty::L2) g[j] += w[j] / c;
    else if (w[j] != 0.0) g[j] += (w[j] > 0 ? 1.0 : -1.0) / c;
  }
  return g;
}

double logreg_mean_logloss(const LogRegModel& m, const Matrix& x, const Labels& y) {
  if (x.rows() == 0) return 0.0;
  return data_loss(x, y, m.weights, m.bias) / static_cast<double>(x.rows());
}

LogRegModel logreg_fit(const Matrix& x, const Labels& y, const LogRegParams& params) {
  check_inputs(x, y);
  if (!(params.c > 0.0)) throw_usage("InvalidParameter", "C must be positive");
  return params.penalty == Penalty::L2 ? fit_l2(x, y, params) : fit_l1(x, y, params);
}

}  // namespace tabkit
