// Serial reference against the OpenMP Schur kernel, plus whole solves with each backend.
#include <benchmark/benchmark.h>

#include <random>

#include "qextrap/generators.hpp"
#include "qextrap/relaxations.hpp"
#include "qextrap/solver.hpp"

using namespace qextrap;
using namespace qextrap::conic;

namespace {

// One block of order n with one sparse symmetric constraint per upper-triangle entry and a few dense ones.
struct SchurCase {
  SchurBlock block;
  RMatrix x, zinv;
};

SchurCase make_case(int n) {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-1, 1);
  SchurCase c;
  c.block.order = n;
  int k = 0;
  for (int r = 0; r < n; ++r)
    for (int col = r; col < n; ++col, ++k) {
      c.block.constraint.push_back(k);
      std::vector<BlockEntry> es{{r, col, 1.0}};
      if (r != col) es.push_back({col, r, 1.0});
      c.block.mats.push_back(es);
    }
  for (int d = 0; d < 4; ++d, ++k) {
    c.block.constraint.push_back(k);
    std::vector<BlockEntry> es;
    for (int r = 0; r < n; ++r)
      for (int col = 0; col < n; ++col) es.push_back({r, col, u(rng)});
    c.block.mats.push_back(es);
  }
  RMatrix a = RMatrix::Random(n, n), b = RMatrix::Random(n, n);
  c.x = a * a.transpose() + RMatrix::Identity(n, n);
  c.zinv = (b * b.transpose() + RMatrix::Identity(n, n)).inverse();
  return c;
}

template <void (*Kernel)(const SchurBlock&, const RMatrix&, const RMatrix&, RMatrix&)>
void BM_Schur(benchmark::State& state) {
  const auto c = make_case(static_cast<int>(state.range(0)));
  const int m = static_cast<int>(c.block.mats.size());
  RMatrix out(m, m);
  for (auto _ : state) {
    out.setZero();
    Kernel(c.block, c.x, c.zinv, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.counters["constraints"] = m;
}

void BM_SolveFogbank(benchmark::State& state, const char* backend_name) {
  const auto fb = fogbank_suite(1.0, {1.0 / 3, 1.0 / 3, 1.0 / 3});
  Scenario s = fb.scenario;
  s.tau = 15 * kPi / 2;
  auto h = model_S_m(1.0, static_cast<int>(state.range(0)), s);
  add_fit_constraints(h, fb.noisy);
  h.program.set_objective(Sense::Minimize, h.value(0, 0, h.tau_index()));
  const auto backend = make_backend(backend_name);
  for (auto _ : state) {
    auto r = backend->solve(h.program, {});
    benchmark::DoNotOptimize(r.objective);
  }
}

}  // namespace

BENCHMARK(BM_Schur<schur_accumulate_reference>)->Name("schur/serial")->Arg(8)->Arg(16)->Arg(24)->Arg(32);
BENCHMARK(BM_Schur<schur_accumulate_parallel>)->Name("schur/parallel")->Arg(8)->Arg(16)->Arg(24)->Arg(32);
BENCHMARK_CAPTURE(BM_SolveFogbank, serial, "ipm-serial")->Arg(12)->Arg(24)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_SolveFogbank, parallel, "ipm")->Arg(12)->Arg(24)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
