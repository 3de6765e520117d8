#pragma once

#include "hoi/nplets.hpp"

#include <array>
#include <optional>
#include <string_view>
#include <vector>

namespace hoi {

enum class Measure { tc, dtc, o, s };
enum class Direction { max, min };

inline constexpr std::array<Measure, 4> kAllMeasures{Measure::tc, Measure::dtc, Measure::o,
                                                     Measure::s};

std::string_view to_string(Measure m) noexcept;
std::string_view to_string(Direction d) noexcept;
std::optional<Measure> parse_measure(std::string_view text) noexcept;
std::optional<Direction> parse_direction(std::string_view text) noexcept;

/// Per (n-plet, dataset) values in nats, each stored B×D row-major.
struct HoiBatch {
  std::size_t batch = 0;
  std::size_t datasets = 0;
  std::vector<int> orders;
  std::vector<double> tc;
  std::vector<double> dtc;
  std::vector<double> o;
  std::vector<double> s;

  const std::vector<double>& values(Measure m) const noexcept;
  double value(Measure m, std::size_t b, std::size_t d) const {
    return values(m)[b * datasets + d];
  }
};

/// I(X_i; X_j) = H(X_i) + H(X_j) − H(X_i, X_j).
double pairwise_mi(const CovarianceMatrix& cov, int i, int j, bool bias_correct);

/// Σ_j H(X_j) − H(X)
std::vector<double> tc_from_terms(const EntropyTerms& terms);
/// (1 − k)·H(X) + Σ_j H(X_−j)
std::vector<double> dtc_from_terms(const EntropyTerms& terms);
/// (k − 2)·H(X) + Σ_j [H(X_j) − H(X_−j)]. Negative values mean synergy dominates.
std::vector<double> o_information(const EntropyTerms& terms);
/// TC + DTC
std::vector<double> s_information(const EntropyTerms& terms);

/// All four measures from a single set of entropy terms.
HoiBatch hoi_from_terms(const EntropyTerms& terms);

/// entropy_terms followed by hoi_from_terms.
HoiBatch compute_hoi_batch(const CovSet& covs, const NpletBatch& batch, bool bias_correct);

}  // namespace hoi
