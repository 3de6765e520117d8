#include "hoi/copula.hpp"

#include "hoi/error.hpp"

#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/digamma.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace hoi {

void DataMatrix::validate() const {
  if (n_vars() < 1) throw Error(ErrorCode::InvalidData, "data has no variables");
  if (n_samples() < 3)
    throw Error(ErrorCode::InsufficientSamples,
                "need at least 3 samples, got " + std::to_string(n_samples()));
  if (!column_names.empty() && static_cast<Eigen::Index>(column_names.size()) != n_vars())
    throw Error(ErrorCode::InvalidData, "column_names size does not match the column count");
  for (Eigen::Index j = 0; j < n_vars(); ++j) {
    const auto col = values.col(j);
    for (Eigen::Index t = 0; t < col.size(); ++t) {
      if (!std::isfinite(col[t]))
        throw Error(ErrorCode::InvalidData, "non-finite entry at row " + std::to_string(t) +
                                                ", column " + std::to_string(j));
    }
    if ((col.array() == col[0]).all())
      throw Error(ErrorCode::DegenerateColumn, "column " + std::to_string(j) + " is constant");
  }
}

void CovarianceMatrix::validate() const {
  const auto n = sigma.rows();
  if (n < 1 || sigma.cols() != n)
    throw Error(ErrorCode::InvalidData, "covariance must be a non-empty square matrix");
  if (!sigma.allFinite()) throw Error(ErrorCode::InvalidData, "covariance has non-finite entries");
  const double scale = sigma.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(sigma(i, i) > 0.0))
      throw Error(ErrorCode::NotPositiveDefinite,
                  "diagonal entry " + std::to_string(i) + " is not strictly positive");
    for (Eigen::Index j = 0; j < i; ++j) {
      if (std::abs(sigma(i, j) - sigma(j, i)) > 1e-12 * scale)
        throw Error(ErrorCode::InvalidData, "covariance is not symmetric");
    }
  }
  if (n_samples_used < 0) throw Error(ErrorCode::InvalidData, "negative sample count");
}

Eigen::MatrixXi rank_columns(const DataMatrix& data) {
  data.validate();
  const auto samples = data.n_samples();
  Eigen::MatrixXi ranks(samples, data.n_vars());
  std::vector<Eigen::Index> order(static_cast<std::size_t>(samples));
  for (Eigen::Index j = 0; j < data.n_vars(); ++j) {
    const auto col = data.values.col(j);
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return col[a] < col[b]; });
    for (Eigen::Index r = 0; r < samples; ++r)
      ranks(order[static_cast<std::size_t>(r)], j) = static_cast<int>(r + 1);
  }
  return ranks;
}

namespace {

// Quantile grid Φ⁻¹(r / (T + 1)) for r = 1..T, built from the lower half so
// that grid[r] == -grid[T + 1 - r] exactly.
std::vector<double> normal_quantile_grid(Eigen::Index samples) {
  const boost::math::normal standard;
  const double denom = static_cast<double>(samples + 1);
  std::vector<double> grid(static_cast<std::size_t>(samples + 1), 0.0);
  for (Eigen::Index r = 1; r <= samples; ++r) {
    const Eigen::Index mirror = samples + 1 - r;
    if (r < mirror) {
      grid[static_cast<std::size_t>(r)] =
          boost::math::quantile(standard, static_cast<double>(r) / denom);
    } else if (r == mirror) {
      grid[static_cast<std::size_t>(r)] = 0.0;
    } else {
      grid[static_cast<std::size_t>(r)] = -grid[static_cast<std::size_t>(mirror)];
    }
  }
  return grid;
}

}  // namespace

DataMatrix copula_transform(const DataMatrix& data) {
  const Eigen::MatrixXi ranks = rank_columns(data);
  const auto grid = normal_quantile_grid(data.n_samples());
  DataMatrix out;
  out.column_names = data.column_names;
  out.values.resize(data.n_samples(), data.n_vars());
  for (Eigen::Index j = 0; j < data.n_vars(); ++j)
    for (Eigen::Index t = 0; t < data.n_samples(); ++t)
      out.values(t, j) = grid[static_cast<std::size_t>(ranks(t, j))];
  return out;
}

CovarianceMatrix estimate_covariance(const DataMatrix& data) {
  const auto samples = data.n_samples();
  if (samples < 3)
    throw Error(ErrorCode::InsufficientSamples,
                "need at least 3 samples, got " + std::to_string(samples));
  if (data.n_vars() < 1) throw Error(ErrorCode::InvalidData, "data has no variables");
  if (!data.values.allFinite()) throw Error(ErrorCode::InvalidData, "data has non-finite entries");

  const Eigen::MatrixXd centered = data.values.rowwise() - data.values.colwise().mean();
  const auto n = data.n_vars();
  CovarianceMatrix cov;
  cov.sigma.resize(n, n);
  const double denom = static_cast<double>(samples - 1);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = j; i < n; ++i) {
      const double v = centered.col(i).dot(centered.col(j)) / denom;
      cov.sigma(i, j) = v;
      cov.sigma(j, i) = v;
    }
  }
  cov.n_samples_used = samples;
  return cov;
}

CovarianceMatrix copula_covariance(const DataMatrix& data) {
  return estimate_covariance(copula_transform(data));
}

namespace {

template <class T>
bool cholesky_in_place(T* a, int n, int ld) noexcept {
  for (int j = 0; j < n; ++j) {
    T* colj = a + static_cast<std::ptrdiff_t>(j) * ld;
    T d = colj[j];
    for (int k = 0; k < j; ++k) {
      const T l = a[static_cast<std::ptrdiff_t>(k) * ld + j];
      d -= l * l;
    }
    if (!(d > 0.0) || !std::isfinite(d)) return false;
    d = std::sqrt(d);
    colj[j] = d;
    const T inv = T(1) / d;
    for (int i = j + 1; i < n; ++i) {
      T s = colj[i];
      for (int k = 0; k < j; ++k) {
        const T* colk = a + static_cast<std::ptrdiff_t>(k) * ld;
        s -= colk[i] * colk[j];
      }
      colj[i] = s * inv;
    }
  }
  return true;
}

}  // namespace

bool cholesky_lower(double* a, int n, int ld) noexcept { return cholesky_in_place(a, n, ld); }
bool cholesky_lower(long double* a, int n, int ld) noexcept { return cholesky_in_place(a, n, ld); }

double cholesky_jitter(const double* a, int n, int ld) noexcept {
  double trace = 0.0;
  for (int i = 0; i < n; ++i) trace += a[static_cast<std::ptrdiff_t>(i) * ld + i];
  return 1e-10 * trace / n;
}

double log_det(const Eigen::MatrixXd& sigma) {
  const int n = static_cast<int>(sigma.rows());
  Eigen::MatrixXd work = sigma;
  if (!cholesky_lower(work.data(), n, n)) {
    work = sigma;
    const double eps = cholesky_jitter(sigma.data(), n, n);
    work.diagonal().array() += eps;
    if (!cholesky_lower(work.data(), n, n))
      throw Error(ErrorCode::NotPositiveDefinite,
                  "Cholesky failed after jitter retry on a " + std::to_string(n) + "x" +
                      std::to_string(n) + " matrix");
  }
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += std::log(work(i, i));
  return 2.0 * sum;
}

EntropyValue gaussian_entropy_nats(const CovarianceMatrix& cov) {
  cov.validate();
  const double n = static_cast<double>(cov.n_vars());
  return {0.5 * (n * kLogTwoPiE + log_det(cov.sigma)), false};
}

double entropy_bias(int n, std::int64_t samples) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "entropy_bias needs n >= 1");
  if (samples <= n)
    throw Error(ErrorCode::InsufficientSamples,
                "entropy_bias needs T > n (n=" + std::to_string(n) +
                    ", T=" + std::to_string(samples) + ")");
  const double t = static_cast<double>(samples);
  double psi_sum = 0.0;
  for (int j = 1; j <= n; ++j) psi_sum += boost::math::digamma((t - j) / 2.0);
  return 0.5 * (n * std::log(2.0 / (t - 1.0)) + psi_sum);
}

EntropyValue bias_corrected_entropy(const CovarianceMatrix& cov) {
  if (cov.n_samples_used <= 0)
    throw Error(ErrorCode::InvalidArgument, "bias correction needs an estimated covariance");
  auto h = gaussian_entropy_nats(cov);
  h.nats -= entropy_bias(static_cast<int>(cov.n_vars()), cov.n_samples_used);
  h.bias_corrected = true;
  return h;
}

}  // namespace hoi
