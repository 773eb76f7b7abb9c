#include "tabkit/pca.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "tabkit/error.hpp"

namespace tabkit {

Matrix covariance(const Matrix& x) {
  const std::size_t n = x.rows(), p = x.cols();
  if (n < 2) throw_usage("TooFewRows", "covariance needs at least 2 rows");
  const auto means = column_means(x);
  Matrix centered(n, p);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < p; ++j) centered(i, j) = x(i, j) - means[j];

  Matrix c(p, p);
  const double denom = static_cast<double>(n - 1);
  for (std::size_t a = 0; a < p; ++a)
    for (std::size_t b = a; b < p; ++b) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += centered(i, a) * centered(i, b);
      c(a, b) = c(b, a) = s / denom;
    }
  return c;
}

namespace {

double max_off_diagonal(const Matrix& a) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i + 1; j < a.cols(); ++j) m = std::max(m, std::abs(a(i, j)));
  return m;
}

}  // namespace

EigenDecomposition eigh(const Matrix& c) {
  const std::size_t p = c.rows();
  if (c.cols() != p) throw_usage("NotSymmetric", "matrix is not square");
  double frob = 0.0;
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j < p; ++j) {
      if (std::abs(c(i, j) - c(j, i)) > 1e-8) {
        throw_usage("NotSymmetric", "|c(" + std::to_string(i) + "," + std::to_string(j) + ") - c(" +
                                        std::to_string(j) + "," + std::to_string(i) + ")| exceeds 1e-8");
      }
      frob += c(i, j) * c(i, j);
    }
  frob = std::sqrt(frob);
  const double threshold = 1e-12 * std::max(1.0, frob);

  Matrix a(p, p);
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j < p; ++j) a(i, j) = 0.5 * (c(i, j) + c(j, i));
  Matrix v = Matrix::identity(p);

  EigenDecomposition out;
  constexpr int kMaxSweeps = 100;
  double off = max_off_diagonal(a);
  while (off > threshold && out.sweeps < kMaxSweeps) {
    ++out.sweeps;
    for (std::size_t r = 0; r + 1 < p; ++r) {
      for (std::size_t s = r + 1; s < p; ++s) {
        const double ars = a(r, s);
        if (std::abs(ars) < 1e-300) continue;
        // Rotation angle zeroing a(r,s): t = tan(theta), smaller root.
        const double theta = (a(s, s) - a(r, r)) / (2.0 * ars);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double cs = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * cs;

        for (std::size_t k = 0; k < p; ++k) {
          const double akr = a(k, r), aks = a(k, s);
          a(k, r) = cs * akr - sn * aks;
          a(k, s) = sn * akr + cs * aks;
        }
        for (std::size_t k = 0; k < p; ++k) {
          const double ark = a(r, k), ask = a(s, k);
          a(r, k) = cs * ark - sn * ask;
          a(s, k) = sn * ark + cs * ask;
        }
        a(r, s) = a(s, r) = 0.0;
        for (std::size_t k = 0; k < p; ++k) {
          const double vkr = v(k, r), vks = v(k, s);
          v(k, r) = cs * vkr - sn * vks;
          v(k, s) = sn * vkr + cs * vks;
        }
      }
    }
    off = max_off_diagonal(a);
  }
  out.off_diagonal = off;
  if (off > threshold) {
    std::ostringstream msg;
    msg << "Jacobi did not converge in " << kMaxSweeps << " sweeps; residual off-diagonal " << off;
    throw_numerical("NoConvergence", msg.str());
  }

  std::vector<std::size_t> order(p);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return a(x, x) > a(y, y); });

  out.values.resize(p);
  out.vectors = Matrix(p, p);
  for (std::size_t k = 0; k < p; ++k) {
    const std::size_t src = order[k];
    out.values[k] = a(src, src);
    std::size_t arg = 0;
    for (std::size_t i = 1; i < p; ++i)
      if (std::abs(v(i, src)) > std::abs(v(arg, src))) arg = i;
    const double sign = v(arg, src) < 0 ? -1.0 : 1.0;
    for (std::size_t i = 0; i < p; ++i) out.vectors(i, k) = sign * v(i, src);
  }
  return out;
}

double PcaModel::cumulative_ratio(std::size_t k) const {
  double s = 0.0;
  for (std::size_t i = 0; i < std::min(k, explained_variance_ratio.size()); ++i) s += explained_variance_ratio[i];
  return s;
}

PcaModel fit_pca(const Matrix& z, const ComponentSelection& select) {
  const std::size_t p = z.cols();
  if (p == 0) throw_usage("EmptyMatrix", "PCA needs at least one feature");
  const Matrix c = covariance(z);
  const EigenDecomposition eig = eigh(c);

  PcaModel m;
  m.mean = column_means(z);
  m.eigenvalues = eig.values;
  for (double& l : m.eigenvalues)
    if (l < 0.0) l = 0.0;
  const double total = std::accumulate(m.eigenvalues.begin(), m.eigenvalues.end(), 0.0);
  m.explained_variance_ratio.resize(p, 0.0);
  if (total > 0.0)
    for (std::size_t k = 0; k < p; ++k) m.explained_variance_ratio[k] = m.eigenvalues[k] / total;

  if (const auto* fixed = std::get_if<FixedK>(&select)) {
    if (fixed->k < 1 || fixed->k > p)
      throw_usage("InvalidComponentCount", "k must be in [1, " + std::to_string(p) + "]");
    m.k_retained = fixed->k;
  } else {
    const double target = std::get<VarianceTarget>(select).fraction;
    if (!(target > 0.0 && target <= 1.0)) throw_usage("InvalidVarianceTarget", "variance target must be in (0, 1]");
    m.k_retained = p;
    double cum = 0.0;
    for (std::size_t k = 0; k < p; ++k) {
      cum += m.explained_variance_ratio[k];
      // Tolerance keeps a target of exactly 1.0 reachable despite rounding.
      if (cum >= target - 1e-12) {
        m.k_retained = k + 1;
        break;
      }
    }
  }
  m.components = Matrix(p, m.k_retained);
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t k = 0; k < m.k_retained; ++k) m.components(i, k) = eig.vectors(i, k);
  return m;
}

Matrix transform(const PcaModel& model, const Matrix& x) {
  const std::size_t p = model.n_features();
  if (x.cols() != p) {
    throw_usage("DimensionMismatch", "input has " + std::to_string(x.cols()) + " columns, model has " +
                                         std::to_string(p));
  }
  Matrix out(x.rows(), model.k_retained);
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < p; ++j) {
      const double d = x(i, j) - model.mean[j];
      for (std::size_t k = 0; k < model.k_retained; ++k) out(i, k) += d * model.components(j, k);
    }
  return out;
}

Matrix inverse_transform(const PcaModel& model, const Matrix& scores) {
  if (scores.cols() != model.k_retained) throw_usage("DimensionMismatch", "score width differs from k_retained");
  const std::size_t p = model.n_features();
  Matrix out(scores.rows(), p);
  for (std::size_t i = 0; i < scores.rows(); ++i)
    for (std::size_t j = 0; j < p; ++j) {
      double s = model.mean[j];
      for (std::size_t k = 0; k < model.k_retained; ++k) s += scores(i, k) * model.components(j, k);
      out(i, j) = s;
    }
  return out;
}

std::vector<ScreePoint> scree_data(const PcaModel& model) {
  std::vector<ScreePoint> out;
  double cum = 0.0;
  for (std::size_t k = 0; k < model.eigenvalues.size(); ++k) {
    cum += model.explained_variance_ratio[k];
    out.push_back({k + 1, model.eigenvalues[k], model.explained_variance_ratio[k], cum});
  }
  return out;
}

LoadingTable loadings(const PcaModel& model, const std::vector<std::string>& feature_names) {
  if (feature_names.size() != model.n_features())
    throw_usage("DimensionMismatch", "feature name count differs from the model's feature count");
  LoadingTable t;
  t.features = feature_names;
  for (std::size_t k = 0; k < model.k_retained; ++k) t.components.push_back("PC" + std::to_string(k + 1));
  t.values = model.components;
  return t;
}

}  // namespace tabkit
