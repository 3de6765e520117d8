#include "hoi/reference.hpp"

#include "hoi/error.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <vector>

namespace hoi::reference {

namespace {

using Wide = long double;
using WideMatrix = Eigen::Matrix<Wide, Eigen::Dynamic, Eigen::Dynamic>;

// ½·log|Σ_S| minus the bias term: H(X_S) without its k·½·log(2πe) part.
Wide reduced_entropy(const CovarianceMatrix& cov, std::span<const int> members, bool bias_correct) {
  const auto k = static_cast<Eigen::Index>(members.size());
  if (k == 0) return 0;
  WideMatrix sub(k, k);
  for (Eigen::Index r = 0; r < k; ++r)
    for (Eigen::Index c = 0; c < k; ++c) sub(r, c) = cov.sigma(members[r], members[c]);
  Eigen::LLT<WideMatrix> llt(sub);
  if (llt.info() != Eigen::Success) {
    sub.diagonal().array() += 1e-10L * sub.trace() / static_cast<Wide>(k);
    llt.compute(sub);
    if (llt.info() != Eigen::Success)
      throw Error(ErrorCode::NotPositiveDefinite, "reference sub-matrix not positive definite");
  }
  Wide logdet = 0;
  for (Eigen::Index i = 0; i < k; ++i) logdet += 2 * std::log(llt.matrixLLT()(i, i));
  Wide h = logdet / 2;
  if (bias_correct) h -= entropy_bias(static_cast<int>(k), cov.n_samples_used);
  return h;
}

}  // namespace

double subset_entropy(const CovarianceMatrix& cov, std::span<const int> members,
                      bool bias_correct) {
  const auto k = static_cast<Wide>(members.size());
  return static_cast<double>(k * static_cast<Wide>(kLogTwoPiE) / 2 +
                             reduced_entropy(cov, members, bias_correct));
}

// The k·½·log(2πe) parts cancel in every measure, so the definitions are
// applied to the reduced entropies.
HoiValues nplet_hoi(const CovarianceMatrix& cov, std::span<const int> members, bool bias_correct) {
  const std::size_t k = members.size();
  const Wide joint = reduced_entropy(cov, members, bias_correct);
  Wide sum_singles = 0;
  Wide sum_conditional = 0;  // Σ_j H(X_j | X_−j)
  std::vector<int> rest;
  for (std::size_t j = 0; j < k; ++j) {
    sum_singles += reduced_entropy(cov, members.subspan(j, 1), bias_correct);
    rest.assign(members.begin(), members.end());
    rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(j));
    sum_conditional += joint - reduced_entropy(cov, rest, bias_correct);
  }
  const Wide tc = sum_singles - joint;
  const Wide dtc = joint - sum_conditional;
  HoiValues v;
  v.tc = static_cast<double>(tc);
  v.dtc = static_cast<double>(dtc);
  v.o = static_cast<double>(tc - dtc);
  v.s = static_cast<double>(tc + dtc);
  return v;
}

}  // namespace hoi::reference
