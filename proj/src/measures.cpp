#include "hoi/measures.hpp"

#include "hoi/error.hpp"

#include <cmath>

namespace hoi {

std::string_view to_string(Measure m) noexcept {
  switch (m) {
    case Measure::tc: return "tc";
    case Measure::dtc: return "dtc";
    case Measure::o: return "o";
    case Measure::s: return "s";
  }
  return "?";
}

std::string_view to_string(Direction d) noexcept { return d == Direction::max ? "max" : "min"; }

std::optional<Measure> parse_measure(std::string_view text) noexcept {
  if (text == "tc") return Measure::tc;
  if (text == "dtc") return Measure::dtc;
  if (text == "o" || text == "oinfo") return Measure::o;
  if (text == "s" || text == "sinfo") return Measure::s;
  return std::nullopt;
}

std::optional<Direction> parse_direction(std::string_view text) noexcept {
  if (text == "max") return Direction::max;
  if (text == "min") return Direction::min;
  return std::nullopt;
}

const std::vector<double>& HoiBatch::values(Measure m) const noexcept {
  switch (m) {
    case Measure::tc: return tc;
    case Measure::dtc: return dtc;
    case Measure::o: return o;
    case Measure::s: return s;
  }
  return tc;
}

double pairwise_mi(const CovarianceMatrix& cov, int i, int j, bool bias_correct) {
  const auto n = static_cast<int>(cov.n_vars());
  if (i < 0 || j < 0 || i >= n || j >= n)
    throw Error(ErrorCode::InvalidNplet, "pairwise_mi index out of range");
  if (i == j) throw Error(ErrorCode::InvalidNplet, "pairwise_mi needs two distinct variables");
  Eigen::Matrix2d pair;
  pair << cov.sigma(i, i), cov.sigma(i, j), cov.sigma(j, i), cov.sigma(j, j);
  // The ½·log(2πe) terms cancel; only the log-determinants remain.
  double mi = 0.5 * (std::log(pair(0, 0)) + std::log(pair(1, 1)) - log_det(pair));
  if (bias_correct) {
    if (cov.n_samples_used <= 0)
      throw Error(ErrorCode::InvalidArgument, "bias correction needs an estimated covariance");
    mi -= 2.0 * entropy_bias(1, cov.n_samples_used) - entropy_bias(2, cov.n_samples_used);
  }
  return mi;
}

namespace {

struct RowTerms {
  long double joint;
  std::span<const long double> singles;
  std::span<const long double> loo;
};

// Reduced terms of (b, d); see EntropyTerms::r_joint.
RowTerms row_terms(const EntropyTerms& terms, std::size_t b, std::size_t d) {
  const auto k = static_cast<std::size_t>(terms.orders[b]);
  const std::size_t base = terms.offsets[b] * terms.datasets + d * k;
  return {terms.r_joint[b * terms.datasets + d], {terms.r_singles.data() + base, k},
          {terms.r_leave_one_out.data() + base, k}};
}

template <class RowFn>
std::vector<double> per_row(const EntropyTerms& terms, RowFn fn) {
  std::vector<double> out(terms.batch * terms.datasets);
  for (std::size_t b = 0; b < terms.batch; ++b)
    for (std::size_t d = 0; d < terms.datasets; ++d) {
      const auto t = row_terms(terms, b, d);
      out[b * terms.datasets + d] =
          static_cast<double>(fn(terms.orders[b], t.joint, t.singles, t.loo));
    }
  return out;
}

using Span = std::span<const long double>;

long double sum(Span xs) {
  long double acc = 0;
  for (long double x : xs) acc += x;
  return acc;
}

long double tc_row(int, long double joint, Span singles, Span) { return sum(singles) - joint; }

long double dtc_row(int k, long double joint, Span, Span loo) {
  return (1 - k) * joint + sum(loo);
}

long double o_row(int k, long double joint, Span singles, Span loo) {
  long double acc = (k - 2) * joint;
  for (std::size_t j = 0; j < singles.size(); ++j) acc += singles[j] - loo[j];
  return acc;
}

}  // namespace

std::vector<double> tc_from_terms(const EntropyTerms& terms) { return per_row(terms, tc_row); }

std::vector<double> dtc_from_terms(const EntropyTerms& terms) { return per_row(terms, dtc_row); }

std::vector<double> o_information(const EntropyTerms& terms) { return per_row(terms, o_row); }

std::vector<double> s_information(const EntropyTerms& terms) {
  return per_row(terms, [](int k, long double joint, Span singles, Span loo) {
    return tc_row(k, joint, singles, loo) + dtc_row(k, joint, singles, loo);
  });
}

HoiBatch hoi_from_terms(const EntropyTerms& terms) {
  HoiBatch out;
  out.batch = terms.batch;
  out.datasets = terms.datasets;
  out.orders = terms.orders;
  const std::size_t n = terms.batch * terms.datasets;
  out.tc.resize(n);
  out.dtc.resize(n);
  out.o.resize(n);
  out.s.resize(n);
  const auto rows = static_cast<std::ptrdiff_t>(terms.batch);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t bi = 0; bi < rows; ++bi) {
    const auto b = static_cast<std::size_t>(bi);
    const int k = terms.orders[b];
    for (std::size_t d = 0; d < terms.datasets; ++d) {
      const auto t = row_terms(terms, b, d);
      const std::size_t m = b * terms.datasets + d;
      const long double tc = tc_row(k, t.joint, t.singles, t.loo);
      const long double dtc = dtc_row(k, t.joint, t.singles, t.loo);
      out.tc[m] = static_cast<double>(tc);
      out.dtc[m] = static_cast<double>(dtc);
      out.o[m] = static_cast<double>(o_row(k, t.joint, t.singles, t.loo));
      out.s[m] = static_cast<double>(tc + dtc);
    }
  }
  return out;
}

HoiBatch compute_hoi_batch(const CovSet& covs, const NpletBatch& batch, bool bias_correct) {
  return hoi_from_terms(entropy_terms(covs, batch, bias_correct));
}

}  // namespace hoi
