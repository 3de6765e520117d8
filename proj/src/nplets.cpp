#include "hoi/nplets.hpp"

#include "hoi/error.hpp"
#include "hoi/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace hoi {

BigCount count_nplets(int n, int min_order, int max_order) {
  if (n < 1 || min_order < 1 || min_order > max_order || max_order > n)
    throw Error(ErrorCode::InvalidOrderRange,
                "need 1 <= min <= max <= n (n=" + std::to_string(n) + ", min=" +
                    std::to_string(min_order) + ", max=" + std::to_string(max_order) + ")");
  BigCount total = 0;
  BigCount binom = 1;  // C(n, k), walked up from k = 0
  for (int k = 1; k <= max_order; ++k) {
    binom = binom * (n - k + 1) / k;
    if (k >= min_order) total += binom;
  }
  return total;
}

// ---------------------------------------------------------------------------

CovSet::CovSet(CovarianceMatrix cov) : CovSet(std::vector<CovarianceMatrix>{std::move(cov)}) {}

CovSet::CovSet(std::vector<CovarianceMatrix> covs) : covs_(std::move(covs)) {
  if (covs_.empty()) throw Error(ErrorCode::InvalidArgument, "CovSet needs at least one matrix");
  n_vars_ = static_cast<int>(covs_.front().n_vars());
  const auto n = static_cast<std::size_t>(n_vars_);
  singles_.resize(covs_.size() * n);
  reduced_.resize(covs_.size() * n);
  bias_.assign(covs_.size() * (n + 1), 0.0);
  for (std::size_t d = 0; d < covs_.size(); ++d) {
    const auto& c = covs_[d];
    c.validate();
    if (c.n_vars() != n_vars_)
      throw Error(ErrorCode::InvalidArgument, "all covariance matrices must share N");
    for (std::size_t j = 0; j < n; ++j) {
      const double var = c.sigma(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j));
      singles_[d * n + j] = 0.5 * (kLogTwoPiE + std::log(var));
      reduced_[d * n + j] = 0.5L * std::log(static_cast<long double>(var));
    }
    if (c.n_samples_used > 0) {
      // η(k, T) for every k the data supports; deeper orders are rejected on use.
      for (std::size_t k = 1; k <= n; ++k) {
        if (static_cast<std::int64_t>(k) >= c.n_samples_used) {
          bias_[d * (n + 1) + k] = std::numeric_limits<double>::quiet_NaN();
          continue;
        }
        bias_[d * (n + 1) + k] = entropy_bias(static_cast<int>(k), c.n_samples_used);
      }
    }
  }
}

std::span<const double> CovSet::bias_table(std::size_t d) const {
  if (covs_[d].n_samples_used <= 0)
    throw Error(ErrorCode::InvalidArgument,
                "bias correction requested for analytic covariance " + std::to_string(d));
  const auto n = static_cast<std::size_t>(n_vars_);
  return {bias_.data() + d * (n + 1), n + 1};
}

bool CovSet::all_estimated() const noexcept {
  return std::all_of(covs_.begin(), covs_.end(),
                     [](const CovarianceMatrix& c) { return c.n_samples_used > 0; });
}

// ---------------------------------------------------------------------------

void NpletBatch::reset(Mode mode, int n_vars) {
  mode_ = mode;
  n_vars_ = n_vars;
  max_order_ = 0;
  members_.clear();
  offsets_.clear();
  orders_.clear();
  masks_.clear();
}

void NpletBatch::push_members(std::span<const int> sorted_members) {
  offsets_.push_back(members_.size());
  orders_.push_back(static_cast<int>(sorted_members.size()));
  members_.insert(members_.end(), sorted_members.begin(), sorted_members.end());
  max_order_ = std::max(max_order_, static_cast<int>(sorted_members.size()));
  if (mode_ == Mode::mixed_order) {
    const auto base = masks_.size();
    masks_.resize(base + static_cast<std::size_t>(n_vars_), 0);
    for (int v : sorted_members) masks_[base + static_cast<std::size_t>(v)] = 1;
  }
}

void NpletBatch::validate_unique() const {
  std::vector<std::size_t> rows(size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  auto less = [&](std::size_t a, std::size_t b) {
    const auto ma = members(a), mb = members(b);
    return std::lexicographical_compare(ma.begin(), ma.end(), mb.begin(), mb.end());
  };
  std::sort(rows.begin(), rows.end(), less);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto ma = members(rows[i - 1]), mb = members(rows[i]);
    if (std::equal(ma.begin(), ma.end(), mb.begin(), mb.end()))
      throw Error(ErrorCode::InvalidNplet, "duplicate n-plet in batch at row " +
                                               std::to_string(std::max(rows[i - 1], rows[i])));
  }
}

NpletBatch NpletBatch::fixed(int n_vars, int order, std::vector<int> indices) {
  if (n_vars < 1 || order < 1 || order > n_vars)
    throw Error(ErrorCode::InvalidOrderRange, "fixed-order batch needs 1 <= K <= N");
  if (indices.size() % static_cast<std::size_t>(order) != 0)
    throw Error(ErrorCode::InvalidNplet, "index count is not a multiple of K");
  NpletBatch batch;
  batch.reset(Mode::fixed_order, n_vars);
  const std::size_t rows = indices.size() / static_cast<std::size_t>(order);
  for (std::size_t b = 0; b < rows; ++b) {
    std::span<const int> row(indices.data() + b * static_cast<std::size_t>(order),
                             static_cast<std::size_t>(order));
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (row[j] < 0 || row[j] >= n_vars)
        throw Error(ErrorCode::InvalidNplet, "index " + std::to_string(row[j]) +
                                                 " out of range at row " + std::to_string(b));
      if (j > 0 && row[j] <= row[j - 1])
        throw Error(ErrorCode::InvalidNplet,
                    "indices not strictly increasing at row " + std::to_string(b));
    }
    batch.push_members(row);
  }
  batch.max_order_ = order;
  batch.validate_unique();
  return batch;
}

NpletBatch NpletBatch::mixed(int n_vars, std::vector<std::uint8_t> masks) {
  if (n_vars < 1) throw Error(ErrorCode::InvalidArgument, "mixed-order batch needs N >= 1");
  if (masks.size() % static_cast<std::size_t>(n_vars) != 0)
    throw Error(ErrorCode::InvalidNplet, "mask length is not a multiple of N");
  NpletBatch batch;
  batch.reset(Mode::mixed_order, n_vars);
  const std::size_t rows = masks.size() / static_cast<std::size_t>(n_vars);
  std::vector<int> members;
  for (std::size_t b = 0; b < rows; ++b) {
    members.clear();
    for (int v = 0; v < n_vars; ++v) {
      const auto bit = masks[b * static_cast<std::size_t>(n_vars) + static_cast<std::size_t>(v)];
      if (bit > 1) throw Error(ErrorCode::InvalidNplet, "mask entries must be 0 or 1");
      if (bit) members.push_back(v);
    }
    if (members.empty())
      throw Error(ErrorCode::InvalidNplet, "empty mask at row " + std::to_string(b));
    batch.push_members(members);
  }
  batch.validate_unique();
  return batch;
}

NpletBatch NpletBatch::mixed_from_members(int n_vars, const std::vector<std::vector<int>>& rows) {
  std::vector<std::uint8_t> masks(rows.size() * static_cast<std::size_t>(n_vars), 0);
  for (std::size_t b = 0; b < rows.size(); ++b) {
    for (int v : rows[b]) {
      if (v < 0 || v >= n_vars)
        throw Error(ErrorCode::InvalidNplet, "index " + std::to_string(v) + " out of range");
      auto& bit = masks[b * static_cast<std::size_t>(n_vars) + static_cast<std::size_t>(v)];
      if (bit) throw Error(ErrorCode::InvalidNplet, "repeated index in row " + std::to_string(b));
      bit = 1;
    }
  }
  return mixed(n_vars, std::move(masks));
}

// ---------------------------------------------------------------------------

CombinationStream::CombinationStream(int n, int k, std::size_t batch_size)
    : n_(n), k_(k), batch_size_(batch_size) {
  if (n < 1 || k < 1 || k > n)
    throw Error(ErrorCode::InvalidOrderRange,
                "need 1 <= k <= n (n=" + std::to_string(n) + ", k=" + std::to_string(k) + ")");
  if (batch_size == 0) throw Error(ErrorCode::InvalidArgument, "batch_size must be >= 1");
  current_.resize(static_cast<std::size_t>(k));
  std::iota(current_.begin(), current_.end(), 0);
}

bool CombinationStream::next(NpletBatch& batch) {
  batch.reset(NpletBatch::Mode::fixed_order, n_);
  if (done_) return false;
  while (batch.size() < batch_size_) {
    batch.push_members(current_);
    ++emitted_;
    // Advance to the lexicographic successor.
    int i = k_ - 1;
    while (i >= 0 && current_[static_cast<std::size_t>(i)] == n_ - k_ + i) --i;
    if (i < 0) {
      done_ = true;
      break;
    }
    ++current_[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < k_; ++j)
      current_[static_cast<std::size_t>(j)] = current_[static_cast<std::size_t>(j - 1)] + 1;
  }
  return true;
}

// ---------------------------------------------------------------------------

SubCovBatch extract_subcov_batch(const CovSet& covs, const NpletBatch& batch) {
  if (batch.mode() != NpletBatch::Mode::fixed_order)
    throw Error(ErrorCode::InvalidArgument, "extract_subcov_batch needs a fixed-order batch");
  if (batch.n_vars() != covs.n_vars())
    throw Error(ErrorCode::InvalidNplet, "batch N does not match the covariance set");
  const int k = batch.max_order();
  SubCovBatch out;
  out.batch = batch.size();
  out.datasets = covs.size();
  out.dim = k;
  out.pad_counts.assign(batch.size(), 0);
  const auto sz = static_cast<std::size_t>(k) * static_cast<std::size_t>(k);
  out.values.resize(out.batch * out.datasets * sz);

  const auto rows = static_cast<std::ptrdiff_t>(batch.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t bi = 0; bi < rows; ++bi) {
    const auto b = static_cast<std::size_t>(bi);
    const auto idx = batch.members(b);
    for (std::size_t d = 0; d < out.datasets; ++d) {
      const auto& sigma = covs[d].sigma;
      double* dst = out.values.data() + (b * out.datasets + d) * sz;
      for (int c = 0; c < k; ++c)
        for (int r = 0; r < k; ++r)
          dst[static_cast<std::size_t>(c) * k + r] =
              sigma(idx[static_cast<std::size_t>(r)], idx[static_cast<std::size_t>(c)]);
    }
  }
  return out;
}

SubCovBatch pad_subcov_batch(const CovSet& covs, const NpletBatch& batch) {
  if (batch.mode() != NpletBatch::Mode::mixed_order)
    throw Error(ErrorCode::InvalidArgument, "pad_subcov_batch needs a mixed-order batch");
  if (batch.n_vars() != covs.n_vars())
    throw Error(ErrorCode::InvalidNplet, "batch N does not match the covariance set");
  const int n = covs.n_vars();
  SubCovBatch out;
  out.batch = batch.size();
  out.datasets = covs.size();
  out.dim = n;
  out.pad_counts.resize(batch.size());
  const auto sz = static_cast<std::size_t>(n) * static_cast<std::size_t>(n);
  for (std::size_t b = 0; b < batch.size(); ++b)
    if (batch.order(b) < 1)
      throw Error(ErrorCode::InvalidNplet, "empty mask at row " + std::to_string(b));
  out.values.resize(out.batch * out.datasets * sz);

  const auto rows = static_cast<std::ptrdiff_t>(batch.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t bi = 0; bi < rows; ++bi) {
    const auto b = static_cast<std::size_t>(bi);
    const auto mask = batch.mask(b);
    out.pad_counts[b] = n - batch.order(b);
    for (std::size_t d = 0; d < out.datasets; ++d) {
      const auto& sigma = covs[d].sigma;
      double* dst = out.values.data() + (b * out.datasets + d) * sz;
      // Σ masked on both sides plus the identity masked by the complement.
      for (int c = 0; c < n; ++c)
        for (int r = 0; r < n; ++r)
          dst[static_cast<std::size_t>(c) * n + r] =
              (mask[static_cast<std::size_t>(r)] && mask[static_cast<std::size_t>(c)])
                  ? sigma(r, c)
                  : (r == c ? 1.0 : 0.0);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

EntropyTerms entropy_terms(const CovSet& covs, const NpletBatch& batch, bool bias_correct) {
  const bool padded = batch.mode() == NpletBatch::Mode::mixed_order;
  const SubCovBatch sub = padded ? pad_subcov_batch(covs, batch) : extract_subcov_batch(covs, batch);

  const std::size_t rows = batch.size();
  const std::size_t nd = covs.size();
  const int dim = sub.dim;
  std::vector<kernels::Wide> logdet(rows * nd);
  std::vector<kernels::Wide> inv_diag(rows * nd * static_cast<std::size_t>(dim));
  std::vector<kernels::FactorStatus> status(rows * nd);
  kernels::logdet_inv_diag(sub.values, dim, rows * nd, logdet, inv_diag, status);

  for (std::size_t m = 0; m < status.size(); ++m) {
    if (status[m] == kernels::FactorStatus::failed)
      throw Error(ErrorCode::NotPositiveDefinite,
                  "sub-covariance not positive definite at n-plet " + std::to_string(m / nd) +
                      ", dataset " + std::to_string(m % nd));
  }

  std::vector<std::span<const double>> bias(nd);
  if (bias_correct) {
    for (std::size_t d = 0; d < nd; ++d) {
      bias[d] = covs.bias_table(d);
      if (std::isnan(bias[d][static_cast<std::size_t>(batch.max_order())]))
        throw Error(ErrorCode::InsufficientSamples,
                    "bias correction at order " + std::to_string(batch.max_order()) +
                        " needs more than " + std::to_string(covs[d].n_samples_used) + " samples");
    }
  }

  EntropyTerms terms;
  terms.batch = rows;
  terms.datasets = nd;
  terms.orders.resize(rows);
  terms.offsets.resize(rows);
  for (std::size_t b = 0; b < rows; ++b) {
    terms.orders[b] = batch.order(b);
    terms.offsets[b] = batch.member_offset(b);
  }
  terms.h_joint.resize(rows * nd);
  terms.h_singles.resize(batch.total_members() * nd);
  terms.h_leave_one_out.resize(batch.total_members() * nd);
  terms.r_joint.resize(rows * nd);
  terms.r_singles.resize(batch.total_members() * nd);
  terms.r_leave_one_out.resize(batch.total_members() * nd);

  const auto nrows = static_cast<std::ptrdiff_t>(rows);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t bi = 0; bi < nrows; ++bi) {
    const auto b = static_cast<std::size_t>(bi);
    const auto members = batch.members(b);
    const int k = static_cast<int>(members.size());
    for (std::size_t d = 0; d < nd; ++d) {
      const std::size_t m = b * nd + d;
      const std::size_t base = terms.offsets[b] * nd + d * static_cast<std::size_t>(k);
      double* singles = terms.h_singles.data() + base;
      double* loo = terms.h_leave_one_out.data() + base;
      long double* r_singles = terms.r_singles.data() + base;
      long double* r_loo = terms.r_leave_one_out.data() + base;
      const long double* inv = inv_diag.data() + m * static_cast<std::size_t>(dim);
      // Only the k retained variables enter; the unit pad block is exact and dropped.
      const long double ld = logdet[m];
      for (int j = 0; j < k; ++j) {
        const int var = members[static_cast<std::size_t>(j)];
        r_singles[j] = covs.single_reduced(d, var);
        if (bias_correct) r_singles[j] -= bias[d][1];
        singles[j] = static_cast<double>(0.5L * kLogTwoPiE + r_singles[j]);
        if (k == 1) {
          r_loo[j] = loo[j] = 0.0;
          continue;
        }
        const int pos = padded ? var : j;
        const long double r = 0.5L * (ld + std::log(inv[pos])) -
                              (bias_correct ? bias[d][static_cast<std::size_t>(k - 1)] : 0.0);
        r_loo[j] = r;
        loo[j] = static_cast<double>(0.5L * (k - 1) * kLogTwoPiE + r);
      }
      if (k == 1) {
        terms.r_joint[m] = r_singles[0];
        terms.h_joint[m] = singles[0];
        continue;
      }
      const long double r =
          0.5L * ld - (bias_correct ? bias[d][static_cast<std::size_t>(k)] : 0.0);
      terms.r_joint[m] = r;
      terms.h_joint[m] = static_cast<double>(0.5L * k * kLogTwoPiE + r);
    }
  }
  return terms;
}

std::string mask_hex(std::span<const int> members, int n_vars) {
  const int digits = std::max(1, (n_vars + 3) / 4);
  std::vector<int> nibbles(static_cast<std::size_t>(digits), 0);
  for (int v : members) nibbles[static_cast<std::size_t>(v / 4)] |= 1 << (v % 4);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(static_cast<std::size_t>(digits));
  for (int i = digits - 1; i >= 0; --i) out.push_back(kHex[nibbles[static_cast<std::size_t>(i)]]);
  return out;
}

}  // namespace hoi
