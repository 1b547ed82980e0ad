#include <benchmark/benchmark.h>

#include "crpca/admm.hpp"
#include "crpca/gaussian_model.hpp"
#include "crpca/unfolded.hpp"

namespace {

using namespace crpca;

void BM_Svd(benchmark::State& state) {
  const Index n = state.range(0);
  Rng rng(1);
  const CMatrix m = draw_normal_matrix(n, n, rng, Field::complex);
  for (auto _ : state) {
    benchmark::DoNotOptimize(thin_svd(m));
  }
}
BENCHMARK(BM_Svd)->Arg(16)->Arg(30)->Arg(64);

void BM_Svt(benchmark::State& state) {
  const Index n = state.range(0);
  Rng rng(2);
  const CMatrix m = draw_normal_matrix(n, n, rng, Field::real);
  const RVector t = RVector::Constant(n, 1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(svt(m, t));
  }
}
BENCHMARK(BM_Svt)->Arg(16)->Arg(30)->Arg(64);

struct GaussianProblem {
  MeasurementOperators ops;
  CMatrix ys;
};

GaussianProblem make_problem(Index batch) {
  GaussianProblem p{sample_gaussian_operator(450, 30, 30, 3), CMatrix(450, batch)};
  for (Index b = 0; b < batch; ++b) {
    const Scene s = sample_scene(30, 30, 2, 27, static_cast<std::uint64_t>(b));
    p.ys.col(b) = observe(p.ops, s, 20.0, static_cast<std::uint64_t>(b)).y;
  }
  return p;
}

void BM_AdmmStep(benchmark::State& state) {
  const GaussianProblem p = make_problem(1);
  SolverConfig cfg = with_decay(SolverConfig{}, {DecayKind::log_det, 1.0});
  cfg.rho_init = 1.0;
  const CVector y = p.ys.col(0);
  SolverState st = admm_step(initial_state(p.ops, cfg), y, p.ops, cfg);
  for (auto _ : state) {
    benchmark::DoNotOptimize(admm_step(st, y, p.ops, cfg));
  }
}
BENCHMARK(BM_AdmmStep);

void BM_ForwardLayerBatch(benchmark::State& state) {
  const GaussianProblem p = make_problem(state.range(0));
  SolverConfig cfg = with_decay(SolverConfig{}, {DecayKind::log_det, 1.0});
  cfg.rho_init = 1.0;
  const UnfoldedModel model = matched_model(p.ops, cfg, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(forward_batch(model, p.ys));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ForwardLayerBatch)->Arg(1)->Arg(50);

}  // namespace

BENCHMARK_MAIN();
