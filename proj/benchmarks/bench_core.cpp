#include <benchmark/benchmark.h>

#include "gownet/layers.hpp"
#include "gownet/model.hpp"
#include "gownet/text2graph.hpp"

using namespace gownet;

namespace {

Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-1, 1);
  return m;
}

Adjacency ring(std::size_t n) {
  Adjacency a{Matrix(n, n)};
  for (std::size_t i = 0; i < n; ++i) {
    a.data(i, (i + 1) % n) = 1.0;
    a.data((i + 1) % n, i) = 1.0;
  }
  return a;
}

void bm_normalize(benchmark::State& state) {
  const Adjacency a = ring(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(normalize_graph(a));
}

void bm_gcn_forward(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  const NormalizedAdjacency a_norm = normalize_graph(ring(n));
  const Matrix x = random_matrix(n, 64, rng);
  const Matrix w = random_matrix(64, 64, rng);
  const Matrix b = random_matrix(1, 64, rng);
  for (auto _ : state) {
    ad::Tape tape;
    benchmark::DoNotOptimize(
        layers::gcn_forward(tape, a_norm, tape.constant(x), {tape.param(w), tape.param(b)}));
  }
}

void bm_gpool_forward(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  Rng rng(2);
  const Adjacency a = ring(n);
  const Matrix x = random_matrix(n, 64, rng);
  const Matrix p = random_matrix(64, 1, rng);
  const std::vector<bool> mask(n, true);
  const int k = static_cast<int>((n + 1) / 2);
  for (auto _ : state) {
    ad::Tape tape;
    benchmark::DoNotOptimize(
        layers::gpool_forward(tape, a, tape.constant(x), tape.param(p), k, mask));
  }
}

void bm_hconv_forward(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  Rng rng(3);
  const NormalizedAdjacency a_norm = normalize_graph(ring(n));
  const Matrix x = random_matrix(n, 64, rng);
  ad::Tape proto;
  for (auto _ : state) {
    ad::Tape tape;
    layers::HConvParamIds hp;
    hp.kernel = tape.param(random_matrix(3 * 64, 32, rng));
    hp.conv_bias = tape.param(Matrix(1, 32));
    hp.gcn = {tape.param(random_matrix(64, 32, rng)), tape.param(Matrix(1, 32))};
    benchmark::DoNotOptimize(layers::hconv_forward(tape, a_norm, tape.constant(x), hp));
  }
}

void bm_model_forward_backward(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  Rng rng(4);
  ModelSpec spec;
  spec.arch = Arch::hconv_gpool_net;
  spec.channels = {64, 64, 32, 32};
  spec.n_classes = 4;
  spec.input_dim = 64;
  spec.dropout_keep = 1.0;
  const ModelParams params = build(spec, 5);

  TextGraph g;
  g.label = 1;
  g.n_real = n;
  g.adjacency = ring(n);
  g.features = random_matrix(n, 64, rng);
  for (std::size_t i = 0; i < n; ++i) g.nodes.push_back(Token{"w", static_cast<int>(i), Tag::noun});

  for (auto _ : state) {
    Rng fwd_rng(0);
    ForwardResult fr = forward(params, spec, g, /*train=*/true, fwd_rng);
    fr.tape.backward(fr.tape.softmax_cross_entropy(fr.logits, {g.label}));
    benchmark::DoNotOptimize(fr.tape.grad(fr.param_ids[0]));
  }
}

void bm_convert(benchmark::State& state) {
  const char* vocab[] = {"alpha", "beta", "gamma", "delta", "epsilon", "zeta", "eta", "theta"};
  Rng rng(6);
  std::string text;
  for (int i = 0; i < 200; ++i) text += std::string(i ? " " : "") + vocab[rng.uniform_int(8)];
  std::unordered_map<std::string, std::vector<double>> entries;
  for (const char* w : vocab) {
    std::vector<double> v(50);
    for (double& x : v) x = rng.uniform(-1, 1);
    entries.emplace(w, std::move(v));
  }
  const EmbeddingTable table(50, std::move(entries));
  ConversionConfig cfg;
  cfg.max_nodes = static_cast<int>(state.range(0));
  cfg.all_terms = true;
  for (auto _ : state) benchmark::DoNotOptimize(convert(text, 0, table, {}, cfg));
}

}  // namespace

BENCHMARK(bm_normalize)->Arg(64)->Arg(256);
BENCHMARK(bm_gcn_forward)->Arg(32)->Arg(128);
BENCHMARK(bm_gpool_forward)->Arg(32)->Arg(128);
BENCHMARK(bm_hconv_forward)->Arg(32)->Arg(128);
BENCHMARK(bm_model_forward_backward)->Arg(16)->Arg(64);
BENCHMARK(bm_convert)->Arg(32)->Arg(128);

BENCHMARK_MAIN();
