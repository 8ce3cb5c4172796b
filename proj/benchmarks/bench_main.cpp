#include <benchmark/benchmark.h>

#include <random>

#include "airway/eigen_sym3.hpp"
#include "airway/phantom.hpp"
#include "airway/postproc.hpp"
#include "airway/tensor.hpp"
#include "airway/vesselness.hpp"

using namespace airway;

namespace {

Phantom tube(std::size_t n) {
  PhantomSpec s;
  s.kind = PhantomKind::Bifurcation;
  s.grid = {{n, n, n}, {1, 1, 1}, {0, 0, 0}};
  s.radius = 0.1 * static_cast<double>(n);
  s.noise_sigma = 20.0;
  return make_phantom(s, 1);
}

void BM_GaussianSmooth(benchmark::State& state) {
  const auto img = tube(static_cast<std::size_t>(state.range(0))).image;
  const double sigma = static_cast<double>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(gaussian_smooth(img, sigma));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(img.size()));
}
BENCHMARK(BM_GaussianSmooth)->Args({64, 1})->Args({64, 4})->Unit(benchmark::kMillisecond);

void BM_Frangi(benchmark::State& state) {
  const auto img = tube(static_cast<std::size_t>(state.range(0))).image;
  const VesselnessParams p;
  for (auto _ : state) benchmark::DoNotOptimize(frangi(img, p));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(img.size()));
}
BENCHMARK(BM_Frangi)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_EigSym3(benchmark::State& state) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<Sym3> m(4096);
  for (auto& a : m) a = {u(rng), u(rng), u(rng), u(rng), u(rng), u(rng)};
  for (auto _ : state)
    for (const auto& a : m) benchmark::DoNotOptimize(eigenvalues_sym3(a));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(m.size()));
}
BENCHMARK(BM_EigSym3);

void BM_Conv3d(benchmark::State& state) {
  using namespace airway::nn;
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1, 1);
  auto rnd = [&](const Shape5& s, bool grad) {
    std::vector<double> v(s.size());
    for (auto& x : v) x = u(rng);
    return Tensor::from_values(s, std::move(v), grad);
  };
  const auto x = rnd({1, 4, n, n, n}, true);
  const auto w = rnd({8, 4, 3, 3, 3}, true);
  const auto b = rnd({1, 8, 1, 1, 1}, true);
  const bool backward = state.range(1) != 0;
  for (auto _ : state) {
    auto y = sum(conv3d(x, w, b));
    if (backward) y.backward();
    benchmark::DoNotOptimize(y.item());
  }
}
BENCHMARK(BM_Conv3d)->Args({16, 0})->Args({16, 1})->Args({32, 0})->Unit(benchmark::kMillisecond);

void BM_RegionGrow(benchmark::State& state) {
  const auto mask = tube(static_cast<std::size_t>(state.range(0))).mask;
  const auto seed = find_seed(mask).voxel;
  for (auto _ : state) benchmark::DoNotOptimize(region_grow(mask, seed));
}
BENCHMARK(BM_RegionGrow)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_LargestCc(benchmark::State& state) {
  std::mt19937_64 rng(7);
  std::bernoulli_distribution b(0.3);
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto mask = make_mask(Grid{{n, n, n}, {1, 1, 1}, {0, 0, 0}}, [&](std::size_t) { return b(rng); });
  for (auto _ : state) benchmark::DoNotOptimize(largest_cc(mask));
}
BENCHMARK(BM_LargestCc)->Arg(64)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
