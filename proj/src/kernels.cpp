#include "hoi/kernels.hpp"

#include "hoi/copula.hpp"

#include <cmath>
#include <limits>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace hoi {

namespace {
int g_workers = 0;
}

void set_workers(int workers) {
  g_workers = workers > 0 ? workers : 0;
#ifdef _OPENMP
  if (g_workers > 0) omp_set_num_threads(g_workers);
#endif
}

int workers() noexcept {
#ifdef _OPENMP
  return g_workers > 0 ? g_workers : omp_get_max_threads();
#else
  return 1;
#endif
}

namespace kernels {

namespace {

// Factor one matrix into `work` (dim²) and fill logdet / inverse diagonal.
// `col` is dim scratch.
FactorStatus factor_one(const double* src, int dim, Wide* work, Wide* col, Wide& logdet,
                        Wide* inv_diag) {
  const std::size_t sz = static_cast<std::size_t>(dim) * static_cast<std::size_t>(dim);
  for (std::size_t i = 0; i < sz; ++i) work[i] = src[i];
  auto status = FactorStatus::ok;
  if (!cholesky_lower(work, dim, dim)) {
    const double eps = cholesky_jitter(src, dim, dim);
    for (std::size_t i = 0; i < sz; ++i) work[i] = src[i];
    for (int i = 0; i < dim; ++i) work[static_cast<std::size_t>(i) * dim + i] += eps;
    if (!cholesky_lower(work, dim, dim)) {
      logdet = std::numeric_limits<Wide>::quiet_NaN();
      return FactorStatus::failed;
    }
    status = FactorStatus::jittered;
  }

  Wide sum = 0;
  for (int i = 0; i < dim; ++i) sum += std::log(work[static_cast<std::size_t>(i) * dim + i]);
  logdet = 2 * sum;

  // (A⁻¹)_jj = ‖L⁻¹ e_j‖²; x = L⁻¹ e_j vanishes above row j.
  for (int j = 0; j < dim; ++j) {
    Wide acc = 0;
    for (int i = j; i < dim; ++i) {
      Wide s = (i == j) ? 1 : 0;
      for (int k = j; k < i; ++k) s -= work[static_cast<std::size_t>(k) * dim + i] * col[k];
      col[i] = s / work[static_cast<std::size_t>(i) * dim + i];
      acc += col[i] * col[i];
    }
    inv_diag[j] = acc;
  }
  return status;
}

}  // namespace

void logdet_inv_diag(std::span<const double> mats, int dim, std::size_t count,
                     std::span<Wide> logdet, std::span<Wide> inv_diag,
                     std::span<FactorStatus> status) {
  const std::size_t sz = static_cast<std::size_t>(dim) * static_cast<std::size_t>(dim);
  const auto n = static_cast<std::ptrdiff_t>(count);
#pragma omp parallel
  {
    std::vector<Wide> work(sz);
    std::vector<Wide> col(static_cast<std::size_t>(dim));
#pragma omp for schedule(static)
    for (std::ptrdiff_t m = 0; m < n; ++m) {
      const auto u = static_cast<std::size_t>(m);
      status[u] = factor_one(mats.data() + u * sz, dim, work.data(), col.data(), logdet[u],
                             inv_diag.data() + u * static_cast<std::size_t>(dim));
    }
  }
}

void logdet_inv_diag_serial(std::span<const double> mats, int dim, std::size_t count,
                            std::span<Wide> logdet, std::span<Wide> inv_diag,
                            std::span<FactorStatus> status) {
  const std::size_t sz = static_cast<std::size_t>(dim) * static_cast<std::size_t>(dim);
  std::vector<Wide> work(sz);
  std::vector<Wide> col(static_cast<std::size_t>(dim));
  for (std::size_t m = 0; m < count; ++m)
    status[m] = factor_one(mats.data() + m * sz, dim, work.data(), col.data(), logdet[m],
                           inv_diag.data() + m * static_cast<std::size_t>(dim));
}

}  // namespace kernels
}  // namespace hoi
