#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace hoi {

/// Entropy of a univariate standard normal, ½·log(2πe), in nats.
inline constexpr double kUnitGaussianEntropy = 1.4189385332046727;

/// log(2πe)
inline constexpr double kLogTwoPiE = 2.0 * kUnitGaussianEntropy;

/// T samples (rows) by N variables (columns).
struct DataMatrix {
  Eigen::MatrixXd values;
  std::vector<std::string> column_names;

  Eigen::Index n_samples() const noexcept { return values.rows(); }
  Eigen::Index n_vars() const noexcept { return values.cols(); }

  /// Throws InvalidData / InsufficientSamples / DegenerateColumn.
  void validate() const;
};

struct CovarianceMatrix {
  Eigen::MatrixXd sigma;
  /// Number of samples behind the estimate; 0 for an analytic matrix.
  std::int64_t n_samples_used = 0;

  Eigen::Index n_vars() const noexcept { return sigma.rows(); }

  /// Checks shape, symmetry (1e-12 relative) and a strictly positive diagonal.
  void validate() const;
};

struct EntropyValue {
  double nats = 0.0;
  bool bias_corrected = false;
};

/// Ordinal ranks 1..T per column. Ties are broken by row index, so equal
/// values earlier in the column receive the smaller rank.
Eigen::MatrixXi rank_columns(const DataMatrix& data);

/// Maps every column onto standard-normal quantiles Φ⁻¹(rank / (T + 1)).
DataMatrix copula_transform(const DataMatrix& data);

/// Unbiased (T − 1) sample covariance. Does not apply the copula transform.
CovarianceMatrix estimate_covariance(const DataMatrix& data);

/// copula_transform followed by estimate_covariance.
CovarianceMatrix copula_covariance(const DataMatrix& data);

/// ½·[n·log(2πe) + log|Σ|] with log|Σ| taken from a Cholesky factor.
EntropyValue gaussian_entropy_nats(const CovarianceMatrix& cov);

/// Finite-sample bias of the Gaussian entropy of an n-variate covariance
/// estimated from T samples:
///   η(n, T) = ½·[n·log(2/(T−1)) + Σ_{j=1..n} ψ((T−j)/2)]
/// The corrected entropy is the raw entropy minus η. η < 0 and η → 0 as T grows.
double entropy_bias(int n, std::int64_t samples);

/// Applies entropy_bias to a raw entropy of `cov`. Requires n_samples_used > 0.
EntropyValue bias_corrected_entropy(const CovarianceMatrix& cov);

// ---------------------------------------------------------------------------
// Dense Cholesky helpers shared by the batched kernels and the reference path.

/// In-place lower Cholesky of the leading n×n block of a column-major matrix
/// with leading dimension `ld`. Only the lower triangle is read or written.
/// Returns false on a non-positive or non-finite pivot.
bool cholesky_lower(double* a, int n, int ld) noexcept;
bool cholesky_lower(long double* a, int n, int ld) noexcept;

/// Jitter added on the single retry after a failed factorization.
double cholesky_jitter(const double* a, int n, int ld) noexcept;

/// log|Σ| via Cholesky, retrying once with Σ + ε·I, ε = 1e-10·trace/N.
/// Throws NotPositiveDefinite when the retry fails as well.
double log_det(const Eigen::MatrixXd& sigma);

}  // namespace hoi
