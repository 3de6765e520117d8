#include "hoi/measures.hpp"
#include "hoi/synthetic.hpp"
#include "support.hpp"

#include <doctest.h>

#include <numeric>

using namespace hoi;
using namespace hoi::synthetic;
using hoi::test::code_of;

TEST_CASE("R and S system covariances") {
  Eigen::MatrixXd r(3, 3), s(3, 3);
  r << 2, 1, 1, 1, 2, 1, 1, 1, 1;
  s << 1, 0, 1, 0, 1, 1, 1, 1, 3;
  CHECK(r_system_cov(2, 1.0).sigma == r);
  CHECK(s_system_cov(2, 1.0).sigma == s);
  CHECK(r_system_cov(4, 0.0).sigma == Eigen::MatrixXd::Identity(5, 5));
  CHECK(s_system_cov(4, 0.0).sigma == Eigen::MatrixXd::Identity(5, 5));
  const auto s5 = s_system_cov(5, 0.7);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j)
      if (i != j) CHECK(s5.sigma(i, j) == 0.0);
  CHECK(code_of([] { r_system_cov(0, 1.0); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("block_concat") {
  const auto r = r_system_cov(2, 1.0);
  const auto one = block_concat(std::vector<CovarianceMatrix>{r});
  CHECK(one.cov.sigma == r.sigma);
  REQUIRE(one.blocks.size() == 1);
  CHECK(one.blocks[0].size == 3);

  const auto two = block_concat(std::vector<CovarianceMatrix>{r, s_system_cov(2, 1.0)});
  CHECK(two.blocks[1].begin == 3);
  CHECK(two.cov.sigma.block(0, 3, 3, 3).isZero());
  const std::vector<int> all{0, 1, 2, 3, 4, 5};
  const auto g = ground_truth_hoi(two.cov, all);
  CHECK(std::abs(g.o) < 1e-10);

  // An identity block leaves Ω of non-identity n-plets unchanged.
  CovarianceMatrix id;
  id.sigma = Eigen::MatrixXd::Identity(3, 3);
  const auto padded = block_concat(std::vector<CovarianceMatrix>{r, id});
  for (const auto& m : hoi::test::naive_combinations(3, 3)) {
    CHECK(std::abs(ground_truth_hoi(padded.cov, m).o - ground_truth_hoi(r, m).o) < 1e-12);
    auto with_id = m;
    with_id.push_back(4);
    CHECK(std::abs(ground_truth_hoi(padded.cov, with_id).o - ground_truth_hoi(r, m).o) < 1e-12);
  }
}

TEST_CASE("ground_truth_hoi") {
  const std::vector<int> triplet{0, 1, 2};
  CHECK(ground_truth_hoi(r_system_cov(2, 1.0), triplet).o ==
        doctest::Approx(0.14384103622589173).epsilon(1e-10));
  CHECK(ground_truth_hoi(s_system_cov(2, 1.0), triplet).o ==
        doctest::Approx(-0.14384103622588995).epsilon(1e-10));
  const auto r = r_system_cov(4, 1.0);
  for (const auto& pair : hoi::test::naive_combinations(5, 2))
    CHECK(std::abs(ground_truth_hoi(r, pair).o) < 1e-12);
  const auto full = ground_truth_hoi(r, std::vector<int>{0, 1, 2, 3, 4});
  CHECK(full.tc == doctest::Approx(1.3862943611198908).epsilon(1e-12));
  CHECK(full.dtc == doctest::Approx(0.8047189562170516).epsilon(1e-12));
  CHECK(full.o == doctest::Approx(0.5815754049028392).epsilon(1e-12));
  CHECK(full.s == doctest::Approx(2.1910133173369424).epsilon(1e-12));
}

TEST_CASE("S-system synergy is local to the collider") {
  for (int n : {2, 4, 6}) {
    const auto s = s_system_cov(n, 1.0);
    for (int k = 3; k <= n; ++k)
      for (const auto& m : hoi::test::naive_combinations(n, k))  // sources only
        CHECK(std::abs(ground_truth_hoi(s, m).o) < 1e-10);
  }
}

TEST_CASE("R-system redundancy grows with the number of sources") {
  for (double c : {0.5, 1.0}) {
    for (int n = 2; n <= 10; ++n) {
      const auto r = r_system_cov(n, c);
      double prev = -1.0;
      for (int m = 1; m <= n; ++m) {
        std::vector<int> members(static_cast<std::size_t>(m));
        std::iota(members.begin(), members.end(), 0);
        members.push_back(n);  // Y
        const double o = ground_truth_hoi(r, members).o;
        CHECK(o >= prev - 1e-12);
        prev = o;
      }
    }
  }
}

TEST_CASE("sample_gaussian") {
  CovarianceMatrix id;
  id.sigma = Eigen::MatrixXd::Identity(3, 3);
  const auto x = sample_gaussian(id, 100000, 17);
  const auto cov = estimate_covariance(x);
  CHECK((cov.sigma - id.sigma).cwiseAbs().maxCoeff() < 0.02);
  CHECK(sample_gaussian(id, 50, 3).values == sample_gaussian(id, 50, 3).values);
  CHECK(sample_gaussian(id, 50, 3).values != sample_gaussian(id, 50, 4).values);

  CovarianceMatrix ones;
  ones.sigma = Eigen::MatrixXd::Ones(2, 2);
  const auto d = sample_gaussian(ones, 1000, 5);
  CHECK((d.values.col(0) - d.values.col(1)).cwiseAbs().maxCoeff() < 1e-5);

  CovarianceMatrix bad;
  bad.sigma.resize(2, 2);
  bad.sigma << 1, 2, 2, 1;
  CHECK(code_of([&] { sample_gaussian(bad, 10, 1); }) == ErrorCode::NotPositiveDefinite);
}

TEST_CASE("sampled whole-system Ω has the ground-truth sign") {
  const std::vector<int> all{0, 1, 2, 3, 4};
  int r_ok = 0, s_ok = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto r = copula_covariance(sample_gaussian(r_system_cov(4, 1.0), 5000, seed));
    const auto s = copula_covariance(sample_gaussian(s_system_cov(4, 1.0), 5000, 1000 + seed));
    const auto hr = compute_hoi_batch(CovSet(r), NpletBatch::fixed(5, 5, all), true);
    const auto hs = compute_hoi_batch(CovSet(s), NpletBatch::fixed(5, 5, all), true);
    r_ok += hr.o[0] > 0.0;
    s_ok += hs.o[0] < 0.0;
  }
  CHECK(r_ok >= 19);
  CHECK(s_ok >= 19);
}

TEST_CASE("PGM spec JSON") {
  const auto spec = PgmSpec::from_json(
      R"({"blocks":[{"kind":"R","n_sources":3,"c":1.0},{"kind":"S","n_sources":2,"c":0.5},{"kind":"independent","n_sources":4}]})");
  CHECK(spec.n_vars() == 11);
  const auto sys = spec.build();
  CHECK(sys.cov.n_vars() == 11);
  CHECK(sys.blocks[2].begin == 7);
  CHECK(sys.cov.sigma.block(7, 7, 4, 4) == Eigen::MatrixXd::Identity(4, 4));
  const auto names = spec.variable_names();
  CHECK(names.front() == "b0_R_x1");
  CHECK(names[3] == "b0_R_y");
  CHECK(names[6] == "b1_S_y");
  CHECK(names.back() == "b2_I_x4");
  const auto again = PgmSpec::from_json(spec.to_json());
  CHECK(again.build().cov.sigma == sys.cov.sigma);

  CHECK(code_of([] { PgmSpec::from_json("{"); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { PgmSpec::from_json(R"({"blocks":[]})"); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { PgmSpec::from_json(R"({"blocks":[{"kind":"R","n_sources":0}]})"); }) ==
        ErrorCode::InvalidArgument);
}
