#include "hoi/scanner.hpp"

#include "hoi/error.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace hoi {

double ScoredNplet::value(Measure m) const noexcept {
  switch (m) {
    case Measure::tc: return tc;
    case Measure::dtc: return dtc;
    case Measure::o: return o;
    case Measure::s: return s;
  }
  return tc;
}

// ---------------------------------------------------------------------------

TopKReducer::TopKReducer(Measure measure, Direction direction, std::size_t k)
    : measure_(measure), direction_(direction), k_(k) {
  if (k == 0) throw Error(ErrorCode::InvalidArgument, "top-k needs k >= 1");
}

bool TopKReducer::better(double sa, std::span<const int> ma, double sb, std::span<const int> mb) {
  if (sa != sb) return sa > sb;
  return std::lexicographical_compare(ma.begin(), ma.end(), mb.begin(), mb.end());
}

void TopKReducer::consume(const NpletBatch& batch, const HoiBatch& hoi) {
  if (heaps_.empty()) heaps_.resize(hoi.datasets);
  const double sign = direction_ == Direction::max ? 1.0 : -1.0;
  const auto& vals = hoi.values(measure_);
  auto heap_less = [](const Entry& a, const Entry& b) {
    return better(a.score, a.item.members, b.score, b.item.members);
  };
  for (std::size_t d = 0; d < hoi.datasets; ++d) {
    auto& heap = heaps_[d];
    for (std::size_t b = 0; b < hoi.batch; ++b) {
      const double score = sign * vals[b * hoi.datasets + d];
      const auto members = batch.members(b);
      if (heap.size() == k_) {
        const Entry& worst = heap.front();
        if (!better(score, members, worst.score, worst.item.members)) continue;
        std::pop_heap(heap.begin(), heap.end(), heap_less);
        heap.pop_back();
      }
      const std::size_t m = b * hoi.datasets + d;
      heap.push_back(Entry{score, ScoredNplet{std::vector<int>(members.begin(), members.end()),
                                              hoi.tc[m], hoi.dtc[m], hoi.o[m], hoi.s[m]}});
      std::push_heap(heap.begin(), heap.end(), heap_less);
    }
  }
}

std::vector<ScoredNplet> TopKReducer::results(std::size_t dataset) const {
  if (dataset >= heaps_.size()) return {};
  std::vector<Entry> sorted = heaps_[dataset];
  std::sort(sorted.begin(), sorted.end(), [](const Entry& a, const Entry& b) {
    return better(a.score, a.item.members, b.score, b.item.members);
  });
  std::vector<ScoredNplet> out;
  out.reserve(sorted.size());
  for (auto& e : sorted) out.push_back(std::move(e.item));
  return out;
}

// ---------------------------------------------------------------------------

HistogramReducer::HistogramReducer(Measure measure, std::size_t bins, double lo, double hi)
    : measure_(measure), bins_(bins), lo_(lo), hi_(hi) {
  if (bins == 0 || !(hi > lo) || !std::isfinite(lo) || !std::isfinite(hi))
    throw Error(ErrorCode::InvalidArgument, "histogram needs bins >= 1 and lo < hi");
}

void HistogramReducer::consume(const NpletBatch&, const HoiBatch& hoi) {
  if (counts_.empty()) counts_.assign(hoi.datasets, std::vector<std::uint64_t>(bins_ + 2, 0));
  const auto& vals = hoi.values(measure_);
  const double width = (hi_ - lo_) / static_cast<double>(bins_);
  for (std::size_t b = 0; b < hoi.batch; ++b) {
    for (std::size_t d = 0; d < hoi.datasets; ++d) {
      const double v = vals[b * hoi.datasets + d];
      std::size_t slot;
      if (v < lo_) {
        slot = 0;
      } else if (v >= hi_) {
        slot = bins_ + 1;
      } else {
        slot = 1 + std::min(bins_ - 1, static_cast<std::size_t>((v - lo_) / width));
      }
      ++counts_[d][slot];
    }
  }
}

// ---------------------------------------------------------------------------

ScanStats scan(const CovSet& covs, const ScanOptions& options, Reducer& reducer) {
  const int n = covs.n_vars();
  const int max_order = options.max_order > 0 ? options.max_order : n;
  if (options.min_order < 1 || options.min_order > max_order || max_order > n)
    throw Error(ErrorCode::InvalidOrderRange,
                "scan orders " + std::to_string(options.min_order) + ".." +
                    std::to_string(max_order) + " invalid for N=" + std::to_string(n));
  if (options.batch_size == 0) throw Error(ErrorCode::InvalidArgument, "batch_size must be >= 1");

  const auto start = std::chrono::steady_clock::now();
  ScanStats stats;
  NpletBatch batch;
  for (int k = options.min_order; k <= max_order; ++k) {
    CombinationStream stream(n, k, options.batch_size);
    while (stream.next(batch)) {
      if (batch.empty()) break;
      const HoiBatch hoi = compute_hoi_batch(covs, batch, options.bias_correct);
      reducer.consume(batch, hoi);
      stats.visited += batch.size();
      ++stats.batches;
      if (options.on_batch) {
        const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - start;
        options.on_batch(ScanProgress{stats.visited, stats.batches, k, dt.count()});
      }
    }
  }
  return stats;
}

// ---------------------------------------------------------------------------

const std::array<std::string_view, kFeatureCount>& feature_names() {
  static constexpr std::array<std::string_view, kFeatureCount> kNames{
      "tc_max",     "tc_min",       "tc_mean",     "tc_system",   "dtc_max",
      "dtc_min",    "dtc_mean",     "dtc_system",  "o_max",       "o_min",
      "o_mean",     "o_system",     "s_max",       "s_min",       "s_mean",
      "s_system",   "mi_mean",      "mi_std",      "o_max_order", "o_min_order",
      "synergy_proportion"};
  return kNames;
}

double FeatureVector::get(std::string_view name) const {
  const auto& names = feature_names();
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end())
    throw Error(ErrorCode::InvalidArgument, "unknown feature " + std::string(name));
  return values[static_cast<std::size_t>(it - names.begin())];
}

FeatureAccumulator::FeatureAccumulator(int n_vars, std::size_t datasets)
    : n_vars_(n_vars), stats_(datasets) {
  for (auto& s : stats_) {
    s.max.fill(-std::numeric_limits<double>::infinity());
    s.min.fill(std::numeric_limits<double>::infinity());
  }
}

void FeatureAccumulator::consume(const NpletBatch&, const HoiBatch& hoi) {
  for (std::size_t b = 0; b < hoi.batch; ++b) {
    const int k = hoi.orders[b];
    for (std::size_t d = 0; d < hoi.datasets; ++d) {
      auto& st = stats_[d];
      const std::size_t m = b * hoi.datasets + d;
      if (k == 2) {
        st.mi.push_back(hoi.tc[m]);
        continue;
      }
      if (k < 2) continue;
      const std::array<double, 4> v{hoi.tc[m], hoi.dtc[m], hoi.o[m], hoi.s[m]};
      for (std::size_t i = 0; i < 4; ++i) {
        if (v[i] > st.max[i]) {
          st.max[i] = v[i];
          if (i == 2) st.o_max_order = k;
        }
        if (v[i] < st.min[i]) {
          st.min[i] = v[i];
          if (i == 2) st.o_min_order = k;
        }
        st.sum[i] += v[i];
      }
      if (k == n_vars_) st.system = v;
      if (v[2] < 0.0) ++st.synergistic;
      ++st.hoi_count;
    }
  }
}

std::vector<FeatureVector> FeatureAccumulator::finish() const {
  std::vector<FeatureVector> out(stats_.size());
  for (std::size_t d = 0; d < stats_.size(); ++d) {
    const auto& st = stats_[d];
    auto& f = out[d].values;
    if (st.hoi_count == 0)
      throw Error(ErrorCode::InvalidOrderRange, "fingerprint needs at least one n-plet of order >= 3");
    const double count = static_cast<double>(st.hoi_count);
    for (std::size_t i = 0; i < 4; ++i) {
      f[i * 4 + 0] = st.max[i];
      f[i * 4 + 1] = st.min[i];
      f[i * 4 + 2] = st.sum[i] / count;
      f[i * 4 + 3] = st.system[i];
    }
    double mean = 0.0;
    for (double x : st.mi) mean += x;
    if (!st.mi.empty()) mean /= static_cast<double>(st.mi.size());
    double var = 0.0;
    for (double x : st.mi) var += (x - mean) * (x - mean);
    if (!st.mi.empty()) var /= static_cast<double>(st.mi.size());
    f[16] = mean;
    f[17] = std::sqrt(var);
    f[18] = static_cast<double>(st.o_max_order) / n_vars_;
    f[19] = static_cast<double>(st.o_min_order) / n_vars_;
    f[20] = static_cast<double>(st.synergistic) / count;
  }
  return out;
}

std::vector<FeatureVector> extract_features(const CovSet& covs, bool bias_correct,
                                            int exhaustive_limit, std::size_t batch_size) {
  const int n = covs.n_vars();
  if (n > exhaustive_limit)
    throw Error(ErrorCode::ExhaustiveLimitExceeded,
                "N=" + std::to_string(n) + " exceeds the exhaustive limit of " +
                    std::to_string(exhaustive_limit) + "; use greedy or anneal instead");
  if (n < 3) throw Error(ErrorCode::InvalidOrderRange, "fingerprint needs N >= 3");
  FeatureAccumulator acc(n, covs.size());
  ScanOptions options;
  options.min_order = 2;
  options.max_order = n;
  options.batch_size = batch_size;
  options.bias_correct = bias_correct;
  scan(covs, options, acc);
  return acc.finish();
}

}  // namespace hoi
