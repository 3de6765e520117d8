#include "hoi/kernels.hpp"
#include "hoi/reference.hpp"
#include "hoi/scanner.hpp"
#include "hoi/synthetic.hpp"
#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <set>

using namespace hoi;
using hoi::test::code_of;

namespace {

std::vector<std::vector<int>> members_of(const std::vector<ScoredNplet>& xs) {
  std::vector<std::vector<int>> out;
  for (const auto& x : xs) out.push_back(x.members);
  return out;
}

CovSet sampled_set(int n, std::size_t datasets, std::uint64_t seed) {
  std::vector<CovarianceMatrix> mats;
  const auto sys = synthetic::block_concat(std::vector<CovarianceMatrix>{
      synthetic::r_system_cov(3, 1.0), synthetic::s_system_cov(n - 5, 0.8)});
  for (std::size_t d = 0; d < datasets; ++d)
    mats.push_back(copula_covariance(synthetic::sample_gaussian(sys.cov, 400, seed + d)));
  return CovSet(mats);
}

}  // namespace

TEST_CASE("scan visits every n-plet once, in enumeration order") {
  std::mt19937_64 rng(3);
  const CovSet covs(hoi::test::random_spd(9, rng));
  ScanOptions opts;
  opts.min_order = 2;
  opts.batch_size = 17;
  std::vector<std::vector<int>> seen;
  std::uint64_t progress_calls = 0;
  opts.on_batch = [&](const ScanProgress& p) {
    ++progress_calls;
    CHECK(p.visited <= 502);
  };
  CallbackReducer r([&](const NpletBatch& b, const HoiBatch&) {
    for (std::size_t i = 0; i < b.size(); ++i) seen.emplace_back(b.members(i).begin(), b.members(i).end());
  });
  const auto stats = scan(covs, opts, r);
  std::vector<std::vector<int>> want;
  for (int k = 2; k <= 9; ++k) {
    const auto c = hoi::test::naive_combinations(9, k);
    want.insert(want.end(), c.begin(), c.end());
  }
  CHECK(seen == want);
  CHECK(stats.visited == 502);
  CHECK(progress_calls == stats.batches);

  opts.min_order = 5;
  opts.max_order = 4;
  CHECK(code_of([&] { scan(covs, opts, r); }) == ErrorCode::InvalidOrderRange);
}

TEST_CASE("top-1 max O on R(3, 1) is the full quadruplet") {
  const CovSet covs(synthetic::r_system_cov(3, 1.0));
  TopKReducer top(Measure::o, Direction::max, 1);
  scan(covs, ScanOptions{}, top);
  const auto best = top.results(0);
  REQUIRE(best.size() == 1);
  CHECK(best[0].members == std::vector<int>{0, 1, 2, 3});
  CHECK(best[0].o == doctest::Approx(0.34657359027997).epsilon(1e-10));

  TopKReducer all(Measure::o, Direction::max, 10);
  scan(covs, ScanOptions{}, all);
  CHECK(all.results(0).size() == 5);
  // (0,1,2) has Ω ≈ 0.085 and is last; the three Y-triplets tie at 0.1438 and keep lexicographic order.
  CHECK(members_of(all.results(0)) ==
        std::vector<std::vector<int>>{{0, 1, 2, 3}, {0, 1, 3}, {0, 2, 3}, {1, 2, 3}, {0, 1, 2}});
}

TEST_CASE("top-k and histogram are invariant to batch size and worker count") {
  const CovSet covs = sampled_set(10, 2, 500);
  std::vector<std::vector<ScoredNplet>> ref_top;
  std::vector<std::uint64_t> ref_hist;
  bool first = true;
  for (int w : {1, 4}) {
    set_workers(w);
    for (std::size_t bs : {std::size_t{1}, std::size_t{7}, std::size_t{1024}}) {
      ScanOptions opts;
      opts.batch_size = bs;
      opts.bias_correct = true;
      TopKReducer top(Measure::o, Direction::min, 12);
      HistogramReducer hist(Measure::s, 20, 0.0, 3.0);
      CallbackReducer both([&](const NpletBatch& b, const HoiBatch& h) {
        top.consume(b, h);
        hist.consume(b, h);
      });
      scan(covs, opts, both);
      if (first) {
        ref_top = {top.results(0), top.results(1)};
        ref_hist = hist.counts(1);
        first = false;
        continue;
      }
      for (std::size_t d = 0; d < 2; ++d) {
        const auto got = top.results(d);
        REQUIRE(got.size() == ref_top[d].size());
        for (std::size_t i = 0; i < got.size(); ++i) {
          CHECK(got[i].members == ref_top[d][i].members);
          CHECK(got[i].o == ref_top[d][i].o);
        }
      }
      CHECK(hist.counts(1) == ref_hist);
    }
  }
  set_workers(0);
  std::uint64_t total = 0;
  for (auto c : ref_hist) total += c;
  CHECK(total == 968);  // 2^10 − 1 − 10 − 45
}

TEST_CASE("top-k tie-break is lexicographic") {
  NpletBatch batch;
  batch.reset(NpletBatch::Mode::mixed_order, 6);
  const std::vector<std::vector<int>> rows{{1, 2, 3}, {0, 1, 2, 3}, {0, 4, 5}, {0, 1, 2}, {2, 3, 4}};
  for (const auto& r : rows) batch.push_members(r);
  HoiBatch h;
  h.batch = rows.size();
  h.datasets = 1;
  h.orders = {3, 4, 3, 3, 3};
  h.o = {0.5, 0.5, 0.5, 0.5, 0.7};
  h.tc = h.dtc = h.s = h.o;
  TopKReducer top(Measure::o, Direction::max, 4);
  top.consume(batch, h);
  CHECK(members_of(top.results(0)) ==
        std::vector<std::vector<int>>{{2, 3, 4}, {0, 1, 2}, {0, 1, 2, 3}, {0, 4, 5}});
  TopKReducer low(Measure::o, Direction::min, 2);
  low.consume(batch, h);
  CHECK(members_of(low.results(0)) == std::vector<std::vector<int>>{{0, 1, 2}, {0, 1, 2, 3}});
}

TEST_CASE("identical datasets reduce identically") {
  std::mt19937_64 rng(10);
  const auto c = hoi::test::random_spd(8, rng);
  const CovSet covs(std::vector<CovarianceMatrix>{c, c, c});
  TopKReducer top(Measure::s, Direction::max, 5);
  HistogramReducer hist(Measure::o, 8, -0.5, 0.5);
  CallbackReducer both([&](const NpletBatch& b, const HoiBatch& h) {
    top.consume(b, h);
    hist.consume(b, h);
  });
  scan(covs, ScanOptions{}, both);
  for (std::size_t d = 1; d < 3; ++d) {
    CHECK(members_of(top.results(d)) == members_of(top.results(0)));
    CHECK(hist.counts(d) == hist.counts(0));
  }
}

TEST_CASE("histogram bins") {
  CovarianceMatrix id;
  id.sigma = Eigen::MatrixXd::Identity(4, 4);
  HistogramReducer hist(Measure::o, 4, -1.0, 1.0);
  scan(CovSet(id), ScanOptions{}, hist);
  // All five Ω values are 0, which falls in bin [0, 0.5).
  CHECK(hist.counts(0) == std::vector<std::uint64_t>{0, 0, 0, 5, 0, 0});
  HistogramReducer shifted(Measure::o, 2, 1.0, 2.0);
  scan(CovSet(id), ScanOptions{}, shifted);
  CHECK(shifted.counts(0) == std::vector<std::uint64_t>{5, 0, 0, 0});
}

TEST_CASE("feature schema") {
  const auto& names = feature_names();
  CHECK(names.size() == 21);
  CHECK(names[0] == "tc_max");
  CHECK(names[3] == "tc_system");
  CHECK(names[16] == "mi_mean");
  CHECK(names[20] == "synergy_proportion");
  CHECK(std::set<std::string_view>(names.begin(), names.end()).size() == 21);
}

TEST_CASE("features on analytic identity are zero") {
  CovarianceMatrix id;
  id.sigma = Eigen::MatrixXd::Identity(6, 6);
  const auto f = extract_features(CovSet(id), false);
  REQUIRE(f.size() == 1);
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    const auto name = feature_names()[i];
    if (name == "o_max_order" || name == "o_min_order") continue;
    CHECK_MESSAGE(std::abs(f[0].values[i]) < 1e-10, name);
  }
  CHECK(f[0].get("synergy_proportion") == 0.0);
}

TEST_CASE("features on R(4,1) and S(4,1)") {
  const auto r = extract_features(CovSet(synthetic::r_system_cov(4, 1.0)), false)[0];
  CHECK(r.get("synergy_proportion") == 0.0);
  CHECK(r.get("o_max_order") == 1.0);
  CHECK(r.get("o_max") == doctest::Approx(0.5815754049028392).epsilon(1e-10));
  CHECK(r.get("tc_system") == doctest::Approx(1.3862943611198908).epsilon(1e-10));

  const CovSet s(synthetic::s_system_cov(4, 1.0));
  const auto f = extract_features(s, false)[0];
  CHECK(f.get("o_min") < 0.0);
  // Every n-plet without the collider (variable 4) has Ω = 0, so the minimum contains it.
  TopKReducer top(Measure::o, Direction::min, 1);
  scan(s, ScanOptions{}, top);
  const auto best = top.results(0)[0].members;
  CHECK(std::find(best.begin(), best.end(), 4) != best.end());
  CHECK(top.results(0)[0].o == doctest::Approx(f.get("o_min")).epsilon(1e-12));
}

TEST_CASE("features match a naive recomputation at N <= 8") {
  for (int n : {3, 5, 8}) {
    std::mt19937_64 rng(static_cast<std::uint64_t>(n));
    auto c = hoi::test::random_spd(n, rng);
    c.n_samples_used = 300;
    for (bool bias : {false, true}) {
      const auto f = extract_features(CovSet(c), bias, 20, 5)[0];
      std::array<std::vector<double>, 4> vals;
      std::vector<double> mi;
      std::vector<int> orders;
      for (int k = 2; k <= n; ++k) {
        for (const auto& m : hoi::test::naive_combinations(n, k)) {
          const auto h = reference::nplet_hoi(c, m, bias);
          if (k == 2) {
            mi.push_back(h.tc);
            continue;
          }
          vals[0].push_back(h.tc);
          vals[1].push_back(h.dtc);
          vals[2].push_back(h.o);
          vals[3].push_back(h.s);
          orders.push_back(k);
        }
      }
      const char* prefix[] = {"tc", "dtc", "o", "s"};
      for (int m = 0; m < 4; ++m) {
        const auto& v = vals[static_cast<std::size_t>(m)];
        const std::string p = prefix[m];
        const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
        CHECK(std::abs(f.get(p + "_mean") - mean) < 1e-9);
        CHECK(std::abs(f.get(p + "_max") - *std::max_element(v.begin(), v.end())) < 1e-9);
        CHECK(std::abs(f.get(p + "_min") - *std::min_element(v.begin(), v.end())) < 1e-9);
        CHECK(std::abs(f.get(p + "_system") - v.back()) < 1e-9);
        CHECK(f.get(p + "_min") <= f.get(p + "_mean"));
        CHECK(f.get(p + "_mean") <= f.get(p + "_max"));
      }
      const double mi_mean = std::accumulate(mi.begin(), mi.end(), 0.0) / static_cast<double>(mi.size());
      double var = 0.0;
      for (double x : mi) var += (x - mi_mean) * (x - mi_mean);
      var /= static_cast<double>(mi.size());
      CHECK(std::abs(f.get("mi_mean") - mi_mean) < 1e-9);
      CHECK(std::abs(f.get("mi_std") - std::sqrt(var)) < 1e-9);
      const auto& o = vals[2];
      const auto imax = std::max_element(o.begin(), o.end()) - o.begin();
      const auto imin = std::min_element(o.begin(), o.end()) - o.begin();
      CHECK(f.get("o_max_order") == doctest::Approx(orders[static_cast<std::size_t>(imax)] / double(n)));
      CHECK(f.get("o_min_order") == doctest::Approx(orders[static_cast<std::size_t>(imin)] / double(n)));
      const auto neg = std::count_if(o.begin(), o.end(), [](double x) { return x < 0.0; });
      CHECK(f.get("synergy_proportion") ==
            doctest::Approx(static_cast<double>(neg) / static_cast<double>(o.size())));
      CHECK(f.get("o_max_order") > 0.0);
      CHECK(f.get("o_max_order") <= 1.0);
    }
  }
}

TEST_CASE("features are deterministic and limited") {
  const CovSet covs = sampled_set(9, 2, 7);
  const auto a = extract_features(covs, true, 20, 10000);
  set_workers(4);
  const auto b = extract_features(covs, true, 20, 3);
  set_workers(0);
  REQUIRE(a.size() == 2);
  for (std::size_t d = 0; d < 2; ++d) CHECK(a[d].values == b[d].values);
  CHECK(code_of([&] { extract_features(covs, true, 8); }) == ErrorCode::ExhaustiveLimitExceeded);
  CHECK(code_of([] { (void)FeatureVector{}.get("nope"); }) == ErrorCode::InvalidArgument);
}
