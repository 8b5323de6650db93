// Parallel kernels against their serial reference twins.
//   ./bench_kernels --benchmark_filter=dot_scan
#include <benchmark/benchmark.h>

#include <vector>

#include "workbench/kernels.hpp"
#include "workbench/util.hpp"

namespace k = workbench::kernels;

namespace {

std::vector<double> random_values(std::size_t n, std::uint64_t seed) {
  workbench::SplitMix64 rng(seed);
  std::vector<double> v(n);
  for (auto& x : v) x = rng.normal();
  return v;
}

template <bool Parallel>
void dot_scan(benchmark::State& state) {
  const auto rows = static_cast<std::size_t>(state.range(0));
  const std::size_t dim = 64;
  const auto matrix = random_values(rows * dim, 1);
  const auto query = random_values(dim, 2);
  std::vector<double> out(rows);
  for (auto _ : state) {
    if constexpr (Parallel) {
      k::dot_scan(matrix, dim, query, out);
    } else {
      k::reference::dot_scan(matrix, dim, query, out);
    }
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(rows));
}

template <bool Parallel>
void pairwise(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto points = random_values(n * 64, 3);
  std::vector<double> out(n * n);
  for (auto _ : state) {
    if constexpr (Parallel) {
      k::pairwise_sq_distances(points, 64, out);
    } else {
      k::reference::pairwise_sq_distances(points, 64, out);
    }
    benchmark::DoNotOptimize(out.data());
  }
}

template <bool Parallel>
void affinities(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto points = random_values(n * 64, 4);
  std::vector<double> d(n * n), p(n * n);
  k::reference::pairwise_sq_distances(points, 64, d);
  for (auto _ : state) {
    if constexpr (Parallel) {
      k::conditional_affinities(d, n, 30.0, p);
    } else {
      k::reference::conditional_affinities(d, n, 30.0, p);
    }
    benchmark::DoNotOptimize(p.data());
  }
}

template <bool Parallel>
void tsne_gradient(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  auto p = random_values(n * n, 5);
  double total = 0;
  for (auto& x : p) total += (x = x * x);
  for (auto& x : p) x /= total;
  const auto y = random_values(n * 2, 6);
  std::vector<double> kernel(n * n), grad(n * 2);
  for (auto _ : state) {
    double z;
    if constexpr (Parallel) {
      z = k::tsne_gradient(p, 1.0, y, kernel, grad);
    } else {
      z = k::reference::tsne_gradient(p, 1.0, y, kernel, grad);
    }
    benchmark::DoNotOptimize(z);
  }
}

template <bool Parallel>
void affinity_messages(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto s = random_values(n * n, 7);
  std::vector<double> a(n * n, 0.0), r(n * n, 0.0);
  for (auto _ : state) {
    if constexpr (Parallel) {
      k::ap_responsibilities(s, a, r, n, 0.5);
      k::ap_availabilities(r, a, n, 0.5);
    } else {
      k::reference::ap_responsibilities(s, a, r, n, 0.5);
      k::reference::ap_availabilities(r, a, n, 0.5);
    }
    benchmark::DoNotOptimize(a.data());
  }
}

}  // namespace

BENCHMARK(dot_scan<true>)->Name("dot_scan/parallel")->Arg(10000)->Arg(100000);
BENCHMARK(dot_scan<false>)->Name("dot_scan/reference")->Arg(10000)->Arg(100000);
BENCHMARK(pairwise<true>)->Name("pairwise/parallel")->Arg(200)->Arg(800);
BENCHMARK(pairwise<false>)->Name("pairwise/reference")->Arg(200)->Arg(800);
BENCHMARK(affinities<true>)->Name("affinities/parallel")->Arg(200)->Arg(800);
BENCHMARK(affinities<false>)->Name("affinities/reference")->Arg(200)->Arg(800);
BENCHMARK(tsne_gradient<true>)->Name("tsne_gradient/parallel")->Arg(200)->Arg(800);
BENCHMARK(tsne_gradient<false>)->Name("tsne_gradient/reference")->Arg(200)->Arg(800);
BENCHMARK(affinity_messages<true>)->Name("ap_messages/parallel")->Arg(200)->Arg(800);
BENCHMARK(affinity_messages<false>)->Name("ap_messages/reference")->Arg(200)->Arg(800);

BENCHMARK_MAIN();
