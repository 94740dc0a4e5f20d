#include <random>

#include <benchmark/benchmark.h>

#include "graphsmile/autograd.hpp"
#include "graphsmile/dialogue_graph.hpp"
#include "graphsmile/gsf.hpp"
#include "graphsmile/model.hpp"
#include "graphsmile/synthetic.hpp"
#include "graphsmile/trainer.hpp"

using namespace graphsmile;

namespace {

Matrix uniform(std::size_t r, std::size_t c, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Matrix m(r, c);
  for (double& v : m.data()) v = u(rng);
  return m;
}

Dataset synthetic(std::size_t dialogues, std::size_t utterances) {
  SynthConfig c;
  c.num_dialogues = dialogues;
  c.utterances_per_dialogue = utterances;
  c.dims = {16, 16, 16};
  return generate(c, synthetic_scheme(c.num_emotions));
}

}  // namespace

static void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(1);
  const Matrix a = uniform(n, n, rng);
  const Matrix b = uniform(n, n, rng);
  for (auto _ : state) benchmark::DoNotOptimize(matmul(a, b));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Matmul)->RangeMultiplier(2)->Range(16, 256)->Complexity(benchmark::oNCubed);

static void BM_GsfForwardBackward(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  const auto depth = static_cast<std::size_t>(state.range(1));
  const std::size_t d = 64;
  std::mt19937_64 rng(2);
  const Window w{5, 5};
  const BimodalGraph g = build_bimodal_graph(m, w, ModalityPair::TV);
  Param weights = make_edge_weights(ModalityPair::TV, w);
  const Matrix x0 = uniform(2 * m, d, rng);
  GsfStack stack = GsfStack::create("gsf", depth, d, rng);
  GsfOptions opts;
  opts.dropout = 0.2;
  for (auto _ : state) {
    Tape tape;
    Var a = assemble_adjacency(g, tape.param(weights), true);
    const GsfOutput out = gsf_forward(a, tape.constant(x0), stack, opts, true, rng);
    tape.backward(sum(out.output));
    benchmark::ClobberMemory();
  }
}
BENCHMARK(BM_GsfForwardBackward)->Args({12, 2})->Args({12, 8})->Args({48, 4})->Args({96, 4});

static void BM_TrainEpoch(benchmark::State& state) {
  const Dataset ds = synthetic(16, static_cast<std::size_t>(state.range(0)));
  RunConfig rc;
  rc.dim = rc.hidden = 32;
  rc.depth = 4;
  rc.past = rc.future = 3;
  rc.segment = 6;
  rc.epochs = 1;
  rc.normalize_adjacency = true;
  for (auto _ : state) benchmark::DoNotOptimize(train(ds, nullptr, rc));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(ds.utterance_count()));
}
BENCHMARK(BM_TrainEpoch)->Arg(12)->Arg(48)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
