#pragma once

#include "hoi/copula.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace hoi {

using BigCount = boost::multiprecision::cpp_int;

/// Σ_{k=min..max} C(n, k), exact.
BigCount count_nplets(int n, int min_order, int max_order);

/// D covariance matrices over the same N variables. Immutable once built; the
/// per-variable entropies H(X_j) are computed here once and shared by every batch.
class CovSet {
 public:
  CovSet() = default;
  explicit CovSet(std::vector<CovarianceMatrix> covs);
  explicit CovSet(CovarianceMatrix cov);

  std::size_t size() const noexcept { return covs_.size(); }
  int n_vars() const noexcept { return n_vars_; }
  const CovarianceMatrix& operator[](std::size_t d) const { return covs_[d]; }
  const std::vector<CovarianceMatrix>& matrices() const noexcept { return covs_; }

  /// Raw (uncorrected) H(X_j) for dataset d.
  double single_entropy(std::size_t d, int j) const {
    return singles_[d * static_cast<std::size_t>(n_vars_) + static_cast<std::size_t>(j)];
  }
  /// ½·log Σ_jj, the part of H(X_j) above the unit-variance entropy.
  long double single_reduced(std::size_t d, int j) const {
    return reduced_[d * static_cast<std::size_t>(n_vars_) + static_cast<std::size_t>(j)];
  }

  /// η(k, T_d) for k = 0..N; η(0, ·) = 0. Throws when dataset d is analytic.
  std::span<const double> bias_table(std::size_t d) const;
  bool all_estimated() const noexcept;

 private:
  std::vector<CovarianceMatrix> covs_;
  std::vector<double> singles_;
  std::vector<long double> reduced_;
  std::vector<double> bias_;  // D × (N + 1), empty rows for analytic matrices
  int n_vars_ = 0;
};

/// A batch of B n-plets. Fixed-order batches store a B×K index matrix with
/// strictly increasing rows; mixed-order batches store a B×N 0/1 mask matrix.
/// Both expose the sorted member list of every row.
class NpletBatch {
 public:
  enum class Mode { fixed_order, mixed_order };

  NpletBatch() = default;

  /// Validated constructors. Throw InvalidNplet on out-of-range, unsorted,
  /// empty or duplicated rows.
  static NpletBatch fixed(int n_vars, int order, std::vector<int> indices);
  static NpletBatch mixed(int n_vars, std::vector<std::uint8_t> masks);
  /// Mixed-order batch from explicit member lists.
  static NpletBatch mixed_from_members(int n_vars, const std::vector<std::vector<int>>& rows);

  Mode mode() const noexcept { return mode_; }
  int n_vars() const noexcept { return n_vars_; }
  std::size_t size() const noexcept { return orders_.size(); }
  bool empty() const noexcept { return orders_.empty(); }

  /// K for fixed-order batches; largest row order for mixed ones.
  int max_order() const noexcept { return max_order_; }
  int order(std::size_t b) const { return orders_[b]; }

  /// Sorted variable indices of row b.
  std::span<const int> members(std::size_t b) const {
    return {members_.data() + offsets_[b], static_cast<std::size_t>(orders_[b])};
  }
  /// Offset of row b into any per-member array laid out row after row.
  std::size_t member_offset(std::size_t b) const { return offsets_[b]; }
  std::size_t total_members() const noexcept { return members_.size(); }

  /// Mask row (mixed-order batches only).
  std::span<const std::uint8_t> mask(std::size_t b) const {
    return {masks_.data() + b * static_cast<std::size_t>(n_vars_),
            static_cast<std::size_t>(n_vars_)};
  }

  // Unchecked builders used by the enumerators and optimizers.
  void reset(Mode mode, int n_vars);
  void push_members(std::span<const int> sorted_members);

 private:
  void validate_unique() const;

  Mode mode_ = Mode::fixed_order;
  int n_vars_ = 0;
  int max_order_ = 0;
  std::vector<int> members_;
  std::vector<std::size_t> offsets_;
  std::vector<int> orders_;
  std::vector<std::uint8_t> masks_;
};

/// Streams every k-subset of {0..n-1} in lexicographic order, batch_size rows
/// at a time. Holds only the current combination and the current batch.
class CombinationStream {
 public:
  CombinationStream(int n, int k, std::size_t batch_size);

  /// Refills `batch` with the next rows; returns false once exhausted.
  bool next(NpletBatch& batch);

  std::uint64_t emitted() const noexcept { return emitted_; }

 private:
  int n_;
  int k_;
  std::size_t batch_size_;
  std::vector<int> current_;
  bool done_ = false;
  std::uint64_t emitted_ = 0;
};

inline CombinationStream enumerate_order(int n, int k, std::size_t batch_size) {
  return CombinationStream(n, k, batch_size);
}

/// Packed sub-covariance matrices. Matrix (b, d) is a dim×dim column-major
/// block starting at ((b·D + d)·dim²).
struct SubCovBatch {
  std::size_t batch = 0;
  std::size_t datasets = 0;
  int dim = 0;
  std::vector<double> values;
  /// N − popcount per row; all zero for fixed-order batches.
  std::vector<int> pad_counts;

  std::span<const double> matrix(std::size_t b, std::size_t d) const {
    const auto sz = static_cast<std::size_t>(dim) * static_cast<std::size_t>(dim);
    return {values.data() + (b * datasets + d) * sz, sz};
  }
  double at(std::size_t b, std::size_t d, int i, int j) const {
    return matrix(b, d)[static_cast<std::size_t>(j) * static_cast<std::size_t>(dim) +
                        static_cast<std::size_t>(i)];
  }
};

/// Principal sub-matrices selected by each fixed-order row.
SubCovBatch extract_subcov_batch(const CovSet& covs, const NpletBatch& batch);

/// N×N matrices keeping the masked variables in place and replacing every
/// other row/column with the matching row/column of the identity.
SubCovBatch pad_subcov_batch(const CovSet& covs, const NpletBatch& batch);

/// Entropies needed by every measure, per (n-plet, dataset).
/// Per-member arrays are laid out row by row: row b, dataset d, member j lives at
/// (offset_b·D + d·k_b + j), where offset_b = batch.member_offset(b).
struct EntropyTerms {
  std::size_t batch = 0;
  std::size_t datasets = 0;
  std::vector<int> orders;
  std::vector<std::size_t> offsets;
  std::vector<double> h_joint;          // B × D
  std::vector<double> h_singles;        // ragged B × D × k
  std::vector<double> h_leave_one_out;  // ragged B × D × k
  // The same terms minus their unit-variance part dim·½·log(2πe). That part
  // cancels exactly in every measure, so the measures are built from these.
  // Kept in extended precision, like the kernel that produces them.
  std::vector<long double> r_joint;
  std::vector<long double> r_singles;
  std::vector<long double> r_leave_one_out;

  double joint(std::size_t b, std::size_t d) const { return h_joint[b * datasets + d]; }
  std::span<const double> singles(std::size_t b, std::size_t d) const {
    return {h_singles.data() + offsets[b] * datasets + d * static_cast<std::size_t>(orders[b]),
            static_cast<std::size_t>(orders[b])};
  }
  std::span<const double> leave_one_out(std::size_t b, std::size_t d) const {
    return {h_leave_one_out.data() + offsets[b] * datasets +
                d * static_cast<std::size_t>(orders[b]),
            static_cast<std::size_t>(orders[b])};
  }
};

/// Batched entropy terms. Fixed-order batches go through extract_subcov_batch,
/// mixed-order batches through pad_subcov_batch; the padded unit block is
/// removed exactly and never bias corrected.
EntropyTerms entropy_terms(const CovSet& covs, const NpletBatch& batch, bool bias_correct);

/// Hex bitmask of a member list, most significant nibble first (variable 0 is bit 0).
std::string mask_hex(std::span<const int> members, int n_vars);

}  // namespace hoi
