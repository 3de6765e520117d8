#include "hoi/kernels.hpp"
#include "hoi/measures.hpp"
#include "hoi/nplets.hpp"
#include "hoi/reference.hpp"
#include "hoi/synthetic.hpp"

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

using namespace hoi;

namespace {

struct Packed {
  std::vector<double> mats;
  std::vector<kernels::Wide> logdet, inv_diag;
  std::vector<kernels::FactorStatus> status;
};

Packed random_packed(int dim, std::size_t count) {
  std::mt19937_64 rng(42);
  std::normal_distribution<double> n01;
  const auto d = static_cast<std::size_t>(dim);
  Packed p;
  p.mats.resize(count * d * d);
  Eigen::MatrixXd a(dim, dim);
  for (std::size_t m = 0; m < count; ++m) {
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = n01(rng);
    Eigen::MatrixXd s = a * a.transpose() + Eigen::MatrixXd::Identity(dim, dim);
    std::copy(s.data(), s.data() + s.size(), p.mats.begin() + static_cast<std::ptrdiff_t>(m * d * d));
  }
  p.logdet.resize(count);
  p.inv_diag.resize(count * d);
  p.status.resize(count);
  return p;
}

void BM_KernelParallel(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  const auto count = static_cast<std::size_t>(state.range(1));
  auto p = random_packed(dim, count);
  for (auto _ : state) {
    kernels::logdet_inv_diag(p.mats, dim, count, p.logdet, p.inv_diag, p.status);
    benchmark::DoNotOptimize(p.logdet.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(count));
}

void BM_KernelSerial(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  const auto count = static_cast<std::size_t>(state.range(1));
  auto p = random_packed(dim, count);
  for (auto _ : state) {
    kernels::logdet_inv_diag_serial(p.mats, dim, count, p.logdet, p.inv_diag, p.status);
    benchmark::DoNotOptimize(p.logdet.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(count));
}

// Three R(3) blocks: 12 variables, every order-k n-plet in one batch.
CovSet bench_system() {
  const std::vector<CovarianceMatrix> blocks{synthetic::r_system_cov(3, 1.0),
                                             synthetic::r_system_cov(3, 0.7),
                                             synthetic::s_system_cov(3, 1.0)};
  return CovSet(synthetic::block_concat(blocks).cov);
}

NpletBatch whole_order(int n, int k) {
  NpletBatch batch;
  auto stream = enumerate_order(n, k, 1u << 20);
  stream.next(batch);
  return batch;
}

void BM_PipelineBatched(benchmark::State& state) {
  const auto covs = bench_system();
  const auto batch = whole_order(covs.n_vars(), static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(compute_hoi_batch(covs, batch, false));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(batch.size()));
}

void BM_PipelineReference(benchmark::State& state) {
  const auto covs = bench_system();
  const auto batch = whole_order(covs.n_vars(), static_cast<int>(state.range(0)));
  for (auto _ : state)
    for (std::size_t b = 0; b < batch.size(); ++b)
      benchmark::DoNotOptimize(reference::nplet_hoi(covs[0], batch.members(b), false));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(batch.size()));
}

}  // namespace

BENCHMARK(BM_KernelParallel)->ArgsProduct({{3, 8, 16}, {1024, 16384}});
BENCHMARK(BM_KernelSerial)->ArgsProduct({{3, 8, 16}, {1024, 16384}});
BENCHMARK(BM_PipelineBatched)->Arg(3)->Arg(6)->Arg(9);
BENCHMARK(BM_PipelineReference)->Arg(3)->Arg(6)->Arg(9);

BENCHMARK_MAIN();
