#pragma once

// Serial per-n-plet implementation. Every entropy comes from its own explicit
// sub-matrix and Eigen's LLT, and the measures follow their textbook
// definitions. Used by tests and benchmarks as the independent route against
// the batched kernels.

#include "hoi/copula.hpp"

#include <span>

namespace hoi::reference {

struct HoiValues {
  double tc = 0.0;
  double dtc = 0.0;
  double o = 0.0;
  double s = 0.0;
};

/// H of the principal sub-matrix on `members`, optionally bias corrected.
double subset_entropy(const CovarianceMatrix& cov, std::span<const int> members,
                      bool bias_correct);

HoiValues nplet_hoi(const CovarianceMatrix& cov, std::span<const int> members, bool bias_correct);

}  // namespace hoi::reference
