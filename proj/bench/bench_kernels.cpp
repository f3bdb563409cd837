// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include "hanle/dynamics.hpp"
#include "hanle/kernels.hpp"
#include "hanle/spectral.hpp"

namespace {

using namespace hanle;

struct ModalFixture {
  ModalPropagator prop;
  CVector y0;
  std::vector<double> times;

  explicit ModalFixture(int samples)
      : prop(build_liouvillian(TransitionSpec::eia().with_intensity(0.06).with_field(0.03))) {
    y0 = steady_state(build_liouvillian(TransitionSpec::eia().with_intensity(0.06)));
    for (int k = 0; k < samples; ++k) times.push_back(2500.0 * k / samples);
  }
};

void BM_modal_signal(benchmark::State& state, bool parallel) {
  const ModalFixture f(static_cast<int>(state.range(0)));
  const CVector a = f.prop.amplitudes(f.y0);
  const CVector weights = (a.array() * f.prop.mode_absorption().array()).matrix();
  const CVector& rates = f.prop.eigensystem().values;
  for (auto _ : state) {
    auto w = parallel ? kernels::modal_signal(rates, weights, 0.0, f.times)
                      : kernels::modal_signal_serial(rates, weights, 0.0, f.times);
    benchmark::DoNotOptimize(w.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_modal_states(benchmark::State& state, bool parallel) {
  const ModalFixture f(static_cast<int>(state.range(0)));
  const Eigensystem& e = f.prop.eigensystem();
  const CVector a = f.prop.amplitudes(f.y0);
  for (auto _ : state) {
    CMatrix s = parallel ? kernels::modal_states(e.vectors, a, e.values, f.prop.steady(), f.times)
                         : kernels::modal_states_serial(e.vectors, a, e.values, f.prop.steady(),
                                                        f.times);
    benchmark::DoNotOptimize(s.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_intensity_sweep(benchmark::State& state, bool parallel) {
  const std::vector<double> grid = log_grid(1e-3, 4.0, static_cast<int>(state.range(0)));
  for (auto _ : state) {
    auto rows = intensity_sweep(TransitionSpec::eia(), grid, 0.03, RabiConvention::clebsch_gordan,
                                parallel);
    benchmark::DoNotOptimize(rows.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_hanle_scan(benchmark::State& state, bool parallel) {
  std::vector<double> grid;
  for (int k = 0; k < state.range(0); ++k) grid.push_back(-0.1 + 0.2 * k / (state.range(0) - 1));
  const TransitionSpec spec = TransitionSpec::eia().with_intensity(0.06);
  for (auto _ : state) {
    auto w = parallel ? hanle_scan(spec, grid) : hanle_scan_serial(spec, grid);
    benchmark::DoNotOptimize(w.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK_CAPTURE(BM_modal_signal, serial, false)->Arg(4000)->Arg(40000);
BENCHMARK_CAPTURE(BM_modal_signal, parallel, true)->Arg(4000)->Arg(40000);
BENCHMARK_CAPTURE(BM_modal_states, serial, false)->Arg(4000);
BENCHMARK_CAPTURE(BM_modal_states, parallel, true)->Arg(4000);
BENCHMARK_CAPTURE(BM_intensity_sweep, serial, false)->Arg(8)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_intensity_sweep, parallel, true)->Arg(8)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_hanle_scan, serial, false)->Arg(41)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_hanle_scan, parallel, true)->Arg(41)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
