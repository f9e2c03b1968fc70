#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "pulsal/algebra.hpp"
#include "pulsal/encoder.hpp"
#include "pulsal/reconstruction.hpp"

using namespace pulsal;

namespace {

// Two interleaved positive trains with n pulses each on integer times.
template <TimeScalar T>
std::vector<BasicPulseTrain<T>> operands(std::size_t n) {
  std::mt19937_64 rng(42);
  std::uniform_int_distribution<int> gap(1, 50);
  std::vector<BasicPulseTrain<T>> out;
  for (int k = 0; k < 2; ++k) {
    std::vector<BasicPulse<T>> ps;
    long t = 0;
    for (std::size_t i = 0; i < n; ++i) {
      t += gap(rng);
      ps.push_back({T(t), Polarity::positive});
    }
    out.emplace_back(std::move(ps));
  }
  return out;
}

void BM_AddDouble(benchmark::State& state) {
  const auto ops = operands<double>(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(add_n<double>(ops, AdderOptions{0.0, 0.0, LeakModel::linear}));
  state.SetItemsProcessed(state.iterations() * state.range(0) * 2);
}
BENCHMARK(BM_AddDouble)->Arg(1000)->Arg(10000);

void BM_AddExact(benchmark::State& state) {
  const auto ops = operands<Rational>(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(add_n<Rational>(ops));
  state.SetItemsProcessed(state.iterations() * state.range(0) * 2);
}
BENCHMARK(BM_AddExact)->Arg(100)->Arg(1000);

void BM_AddLeaky(benchmark::State& state) {
  IfcParams p{1e-3, 40.0, 0.0, 1e-6};
  const auto a = encode(SignalSource::sinusoid(10, 12, 0, 0.25), p).train();
  const auto b = encode(SignalSource::sinusoid(13, 12, 0, 0.25), p).train();
  for (auto _ : state) benchmark::DoNotOptimize(add_n({a, b}, AdderOptions{40.0, 0.0, LeakModel::compensated}));
}
BENCHMARK(BM_AddLeaky);

void BM_Encode(benchmark::State& state) {
  IfcParams p{1e-3, 40.0, 0.0, 1e-6};
  const auto s = SignalSource::sinusoid(23, 12, 0, 0.1);
  for (auto _ : state) benchmark::DoNotOptimize(encode(s, p));
}
BENCHMARK(BM_Encode)->Unit(benchmark::kMillisecond);

void BM_ReconstructWindowed(benchmark::State& state) {
  IfcParams p{1e-3, 40.0, 0.0, 1e-6};
  const auto t = encode(SignalSource::sinusoid(23, 12, 0, 0.25), p).train();
  for (auto _ : state) benchmark::DoNotOptimize(reconstruct_windowed(t, p));
}
BENCHMARK(BM_ReconstructWindowed)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
