#include <benchmark/benchmark.h>

#include <random>

#include "fraclap/basis.hpp"
#include "fraclap/kernels.hpp"

using namespace fraclap;

static Vec random_field(std::size_t m) {
  std::mt19937 gen(7);
  std::uniform_real_distribution<double> d(-1, 1);
  Vec v(m);
  for (auto& x : v) x = d(gen);
  return v;
}

static void transform(benchmark::State& state, Backend b, int dim) {
  const int n = int(state.range(0));
  BasisOptions opts;
  opts.backend = b;
  std::vector<Interval> bounds(dim, Interval{0.0, 1.0});
  const SpectralBasis basis = build_box_basis(bounds, 1.0 / (n + 1), opts);
  const Vec u = random_field(basis.size());
  for (auto _ : state) {
    Vec a = basis.analyze_raw(u);
    benchmark::DoNotOptimize(a.data());
  }
  state.SetItemsProcessed(state.iterations() * int64_t(basis.size()));
}

static void gemv(benchmark::State& state, kernels::Exec e) {
  const int n = int(state.range(0));
  Eigen::MatrixXd A = Eigen::MatrixXd::Random(n, n);
  const Vec x = random_field(n);
  Vec y(n);
  for (auto _ : state) {
    kernels::gemv(A, x.data(), y.data(), true, e);
    benchmark::DoNotOptimize(y.data());
  }
}

BENCHMARK_CAPTURE(transform, fftw_1d, Backend::fast, 1)->Arg(255)->Arg(1023)->Arg(4095);
BENCHMARK_CAPTURE(transform, serial_1d, Backend::serial_reference, 1)->Arg(255)->Arg(1023)->Arg(4095);
BENCHMARK_CAPTURE(transform, parallel_1d, Backend::parallel_reference, 1)->Arg(255)->Arg(1023)->Arg(4095);
BENCHMARK_CAPTURE(transform, fftw_2d, Backend::fast, 2)->Arg(31)->Arg(63);
BENCHMARK_CAPTURE(transform, serial_2d, Backend::serial_reference, 2)->Arg(31)->Arg(63);
BENCHMARK_CAPTURE(transform, parallel_2d, Backend::parallel_reference, 2)->Arg(31)->Arg(63);
BENCHMARK_CAPTURE(gemv, serial, kernels::Exec::serial)->Arg(512)->Arg(2048);
BENCHMARK_CAPTURE(gemv, parallel, kernels::Exec::parallel)->Arg(512)->Arg(2048);

BENCHMARK_MAIN();
