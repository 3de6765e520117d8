#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

namespace hoi {

/// Worker count used by the OpenMP kernels; 0 restores the runtime default.
void set_workers(int workers);
int workers() noexcept;

namespace kernels {

/// Factorization and log-determinant arithmetic run in extended precision:
/// measures are small differences of O(1) log-determinants, and double
/// rounding alone would cost ~1e-16 absolute on every term.
using Wide = long double;

enum class FactorStatus : std::uint8_t { ok, jittered, failed };

/// For `count` packed column-major dim×dim SPD matrices, writes log|A| and the
/// diagonal of A⁻¹ (count×dim). A failed factorization is retried once with
/// A + ε·I, ε = 1e-10·trace/dim. Results per matrix do not depend on the
/// number of threads.
void logdet_inv_diag(std::span<const double> mats, int dim, std::size_t count,
                     std::span<Wide> logdet, std::span<Wide> inv_diag,
                     std::span<FactorStatus> status);

/// Same arithmetic on a single thread; kept for tests and benchmarks.
void logdet_inv_diag_serial(std::span<const double> mats, int dim, std::size_t count,
                            std::span<Wide> logdet, std::span<Wide> inv_diag,
                            std::span<FactorStatus> status);

}  // namespace kernels
}  // namespace hoi
