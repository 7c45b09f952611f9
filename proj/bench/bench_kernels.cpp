#include <benchmark/benchmark.h>

#include <numbers>

#include "sdcancel/lti.hpp"
#include "sdcancel/relay_model.hpp"
#include "sdcancel/sampled_data.hpp"
#include "sdcancel/synthesis.hpp"

using namespace sdcancel;

namespace {

struct Fixture {
  RelayParams params = reference_relay_params(100.0);
  CouplingChannel channel;
  LiftedPlant lifted;
  kernels::AffineGrid grid;
  kernels::FirCoefficients q;
  std::vector<double> omegas;
  std::vector<CouplingChannel> perturbations;
  StateSpace controller;

  Fixture() {
    const GeneralizedPlantSpec nominal = build_generalized_plant(params, channel);
    lifted = fsfh_lift(nominal, 16);
    omegas = log_grid(1e-3, std::numbers::pi / params.h, 256);

    CouplingChannel design = channel;
    design.extra_paths.push_back({0.1 * channel.nominal.r, 2.0});
    const RobustPlant rp =
        build_robust_plant(build_generalized_plant(params, design), 4, 0.01);
    const YoulaMaps maps = youla_closed_loop_maps(rp);
    grid = affine_grid(maps.channels[0], omegas, params.h);
    for (int l = 0; l < 8; ++l) q.push_back(Matrix::Constant(2, 2, 0.01 * (l + 1)));

    controller = synthesize_nominal(fsfh_lift(nominal, 4)).sys;
    perturbations = random_perturbations(channel, 0.1, 16, 28, params.h, 7);
  }
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

void BM_ResponseSweepSerial(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) {
    benchmark::DoNotOptimize(kernels::serial::response_sweep(f.lifted.sys, f.omegas));
  }
}
void BM_ResponseSweepOmp(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) {
    benchmark::DoNotOptimize(kernels::omp::response_sweep(f.lifted.sys, f.omegas));
  }
}

void BM_AffineSigmaSerial(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) {
    benchmark::DoNotOptimize(kernels::serial::affine_sigma_sweep(f.grid, f.q));
  }
}
void BM_AffineSigmaOmp(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) {
    benchmark::DoNotOptimize(kernels::omp::affine_sigma_sweep(f.grid, f.q));
  }
}

void BM_PerturbationSweepSerial(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        serial::perturbation_sweep(f.params, f.perturbations, f.controller, 28));
  }
}
void BM_PerturbationSweepOmp(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        omp::perturbation_sweep(f.params, f.perturbations, f.controller, 28));
  }
}

}  // namespace

BENCHMARK(BM_ResponseSweepSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ResponseSweepOmp)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AffineSigmaSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AffineSigmaOmp)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PerturbationSweepSerial)->Unit(benchmark::kMillisecond)->Iterations(2);
BENCHMARK(BM_PerturbationSweepOmp)->Unit(benchmark::kMillisecond)->Iterations(2);

BENCHMARK_MAIN();
