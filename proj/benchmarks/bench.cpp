#include <benchmark/benchmark.h>

#include "thermodiffuse/generators.hpp"
#include "thermodiffuse/langevin.hpp"
#include "thermodiffuse/linalg.hpp"
#include "thermodiffuse/rng.hpp"
#include "thermodiffuse/substrate.hpp"

namespace {

using namespace tdiff;

void bm_svd(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix w = gen_random_weights(n, 7, 1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(svd(w));
  }
}
BENCHMARK(bm_svd)->Arg(16)->Arg(64);

void bm_solve_spd(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  SubstrateConfig sub;
  sub.dim = n;
  const CouplingMatrix je = gram_coupling(gen_random_weights(n, 1, 0.2), sub);
  const CouplingMatrix jd = gram_coupling(gen_random_weights(n, 2, 0.2), sub);
  const BlockSystem sys = assemble_block(je, jd, nullptr, Vector(n, 0.1), Vector(n, 0.1), sub);
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_spd(sys.m, sys.bias));
  }
}
BENCHMARK(bm_solve_spd)->Arg(64)->Arg(128);

void bm_simulate(benchmark::State& state) {
  SubstrateConfig sub;
  sub.dim = 8;
  const CouplingMatrix je = gram_coupling(gen_random_weights(8, 1, 0.2), sub);
  const CouplingMatrix jd = gram_coupling(gen_random_weights(8, 2, 0.2), sub);
  const BlockSystem sys = assemble_block(je, jd, nullptr, Vector(8, 0.1), Vector(8, 0.1), sub);
  LangevinConfig lc;
  lc.n_steps = 400;
  lc.burn_in = 200;
  lc.n_replicas = 8;
  for (auto _ : state) {
    benchmark::DoNotOptimize(simulate(sys, sub, lc));
  }
}
BENCHMARK(bm_simulate);

void bm_rho_cell(benchmark::State& state) {
  SubstrateConfig sub;
  sub.dim = 64;
  const CouplingMatrix je = gram_coupling(gen_random_weights(64, 1, 0.2), sub);
  const CouplingMatrix jd = gram_coupling(gen_random_weights(64, 2, 0.2), sub);
  const SkipCoupling skip = skip_coupling(je, jd, 16, sub);
  std::vector<std::pair<Vector, Vector>> samples;
  Rng rng(3);
  for (int s = 0; s < 16; ++s) {
    Vector x(64), y(64);
    for (double& v : x) v = rng.next_normal();
    for (double& v : y) v = rng.next_normal();
    samples.emplace_back(x, y);
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(rho_skip(je, jd, skip, samples, sub));
  }
}
BENCHMARK(bm_rho_cell);

}  // namespace

BENCHMARK_MAIN();
