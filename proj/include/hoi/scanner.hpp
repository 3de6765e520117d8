#pragma once

#include "hoi/measures.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

namespace hoi {

struct ScanProgress {
  std::uint64_t visited = 0;  // n-plets, counted once regardless of D
  std::uint64_t batches = 0;
  int order = 0;
  double elapsed_seconds = 0.0;
};

struct ScanOptions {
  int min_order = 3;
  int max_order = 0;  // 0 or negative means N
  std::size_t batch_size = 10000;
  bool bias_correct = false;
  std::function<void(const ScanProgress&)> on_batch;
};

/// Receives every batch in enumeration order (orders ascending, lexicographic
/// within an order) on the calling thread.
class Reducer {
 public:
  virtual ~Reducer() = default;
  virtual void consume(const NpletBatch& batch, const HoiBatch& hoi) = 0;
};

struct ScoredNplet {
  std::vector<int> members;
  double tc = 0.0;
  double dtc = 0.0;
  double o = 0.0;
  double s = 0.0;

  double value(Measure m) const noexcept;
};

/// k best n-plets per dataset for one measure. Equal values are ordered by the
/// lexicographically smaller member list.
class TopKReducer final : public Reducer {
 public:
  TopKReducer(Measure measure, Direction direction, std::size_t k);

  void consume(const NpletBatch& batch, const HoiBatch& hoi) override;

  std::size_t datasets() const noexcept { return heaps_.size(); }
  /// Best first.
  std::vector<ScoredNplet> results(std::size_t dataset) const;

 private:
  struct Entry {
    double score;  // direction-adjusted: larger is better
    ScoredNplet item;
  };
  static bool better(double sa, std::span<const int> ma, double sb, std::span<const int> mb);

  Measure measure_;
  Direction direction_;
  std::size_t k_;
  std::vector<std::vector<Entry>> heaps_;  // worst on top
};

/// Fixed-range histogram of one measure per dataset, with under/overflow bins.
class HistogramReducer final : public Reducer {
 public:
  HistogramReducer(Measure measure, std::size_t bins, double lo, double hi);

  void consume(const NpletBatch& batch, const HoiBatch& hoi) override;

  std::size_t bins() const noexcept { return bins_; }
  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return hi_; }
  /// bins + 2 counts: [underflow, bin 0 .. bin n−1, overflow]
  const std::vector<std::uint64_t>& counts(std::size_t dataset) const { return counts_[dataset]; }
  std::size_t datasets() const noexcept { return counts_.size(); }

 private:
  Measure measure_;
  std::size_t bins_;
  double lo_;
  double hi_;
  std::vector<std::vector<std::uint64_t>> counts_;
};

class CallbackReducer final : public Reducer {
 public:
  using Fn = std::function<void(const NpletBatch&, const HoiBatch&)>;
  explicit CallbackReducer(Fn fn) : fn_(std::move(fn)) {}
  void consume(const NpletBatch& batch, const HoiBatch& hoi) override { fn_(batch, hoi); }

 private:
  Fn fn_;
};

struct ScanStats {
  std::uint64_t visited = 0;
  std::uint64_t batches = 0;
};

/// Visits every n-plet with min_order <= k <= max_order exactly once.
ScanStats scan(const CovSet& covs, const ScanOptions& options, Reducer& reducer);

// ---------------------------------------------------------------------------
// Informational fingerprint

inline constexpr std::size_t kFeatureCount = 21;

/// Column names of the fingerprint, in storage order.
const std::array<std::string_view, kFeatureCount>& feature_names();

struct FeatureVector {
  std::array<double, kFeatureCount> values{};

  double get(std::string_view name) const;
};

/// Collects the fingerprint from a scan over orders 2..N. Order-2 rows feed the
/// pairwise MI statistics; orders >= 3 feed the measure statistics.
class FeatureAccumulator final : public Reducer {
 public:
  FeatureAccumulator(int n_vars, std::size_t datasets);

  void consume(const NpletBatch& batch, const HoiBatch& hoi) override;
  std::vector<FeatureVector> finish() const;

 private:
  struct Stats {
    std::array<double, 4> max;
    std::array<double, 4> min;
    std::array<double, 4> sum{};
    std::array<double, 4> system{};
    int o_max_order = 0;
    int o_min_order = 0;
    std::uint64_t hoi_count = 0;
    std::uint64_t synergistic = 0;
    std::vector<double> mi;
  };
  int n_vars_;
  std::vector<Stats> stats_;
};

std::vector<FeatureVector> extract_features(const CovSet& covs, bool bias_correct,
                                            int exhaustive_limit = 20,
                                            std::size_t batch_size = 10000);

}  // namespace hoi
