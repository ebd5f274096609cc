// Serial reference vs OpenMP ensemble kernel, plus the pieces they spend
// their time in.
#include <benchmark/benchmark.h>

#include <random>

#include "revphase/ensemble.hpp"

using namespace revphase;

namespace {

EnsembleSpec spec_for(bool ar, std::size_t n) {
  const double fs = 16000.0;
  ArProfileSpec a;
  a.seed = 529;
  auto profile = ar ? sample_ar_profile(a, fs / 2.0) : FrequencyProfile::constant(rt60_to_alpha(0.5), 1.0, fs / 2.0);
  return EnsembleSpec{n, 1, SynthesisConfig{profile, default_filter_bank(fs), fs, ModelKind::Auto, {}},
                      {10.0, 100.0, 1000.0}};
}

void BM_EnsembleSerial(benchmark::State& st) {
  const auto spec = spec_for(st.range(0) != 0, 32);
  for (auto _ : st) benchmark::DoNotOptimize(ensemble_coefficients_serial(spec, spec.frequencies));
  st.SetItemsProcessed(st.iterations() * 32);
}

void BM_EnsembleOpenMP(benchmark::State& st) {
  const auto spec = spec_for(st.range(0) != 0, 32);
  for (auto _ : st) benchmark::DoNotOptimize(ensemble_coefficients(spec, spec.frequencies));
  st.SetItemsProcessed(st.iterations() * 32);
}

void BM_Synthesize(benchmark::State& st) {
  const auto spec = spec_for(st.range(0) != 0, 2);
  std::uint64_t seed = 0;
  for (auto _ : st) benchmark::DoNotOptimize(synthesize(spec.synthesis, ++seed));
}

void BM_ZeroPhaseBand(benchmark::State& st) {
  const auto bank = default_filter_bank(16000.0);
  std::mt19937_64 r(1);
  std::normal_distribution<double> d;
  std::vector<double> x(static_cast<std::size_t>(st.range(0)));
  for (auto& v : x) v = d(r);
  for (auto _ : st) {
    auto y = x;
    bank.apply(5, y);
    benchmark::DoNotOptimize(y.data());
  }
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

}  // namespace

// Arg 0: constant profile (RT60 0.5 s), 1: AR(8) seed 529.
BENCHMARK(BM_EnsembleSerial)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EnsembleOpenMP)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Synthesize)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ZeroPhaseBand)->Arg(1 << 14)->Arg(1 << 17)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
