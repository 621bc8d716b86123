#include <benchmark/benchmark.h>

#include "cosnet/metrics/cider.hpp"
#include "cosnet/numerics/ops.hpp"
#include "cosnet/retrieval/sentence_pool.hpp"
#include "cosnet/transformer/attention.hpp"

namespace {

using namespace cosnet;

Tensor<float> random_matrix(std::size_t r, std::size_t c, Rng& rng) {
  Tensor<float> t({r, c});
  for (auto& x : t.values()) x = static_cast<float>(rng.normal());
  return t;
}

void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  const auto a = random_matrix(n, n, rng);
  const auto b = random_matrix(n, n, rng);
  for (auto _ : state) {
    Graph<float> g;
    benchmark::DoNotOptimize(matmul(g.constant(a), g.constant(b)).value().data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n * n));
}
BENCHMARK(BM_Matmul)->Arg(32)->Arg(64)->Arg(128);

void BM_AttentionForwardBackward(benchmark::State& state) {
  const auto tokens = static_cast<std::size_t>(state.range(0));
  const std::size_t dim = 64;
  Rng rng(2);
  ParameterStore<float> store;
  const auto params = make_attention(store, "attn", dim, 4, rng);
  const auto x = random_matrix(tokens, dim, rng);
  for (auto _ : state) {
    Graph<float> g;
    Var<float> v = g.variable(x);
    g.backward(sum(multi_head_attention(params, v, v, v)));
    benchmark::DoNotOptimize(g.grad(v.id()).data());
  }
}
BENCHMARK(BM_AttentionForwardBackward)->Arg(17)->Arg(50);

void BM_RetrieveTopK(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  retrieval::EmbeddingProvider provider(64, 3);
  retrieval::SentencePool pool;
  const std::vector<std::string> words = {"red", "dog", "near", "blue", "cat", "bird", "tree", "car"};
  Rng rng(4);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::string> s = {words[rng.below(words.size())], words[rng.below(words.size())],
                                  words[rng.below(words.size())]};
    pool.add({i, "img" + std::to_string(i / 5), s, provider.embed_sentence(s)});
  }
  const auto query = provider.embed_sentence(std::vector<std::string>{"red", "dog"});
  for (auto _ : state) benchmark::DoNotOptimize(retrieval::retrieve_top_k(query, pool, 5).sentence_ids.data());
}
BENCHMARK(BM_RetrieveTopK)->Arg(1000)->Arg(10000);

void BM_Cider(benchmark::State& state) {
  const auto images = static_cast<std::size_t>(state.range(0));
  const std::vector<std::string> words = {"a", "red", "dog", "near", "blue", "cat", "and", "small", "bird"};
  Rng rng(5);
  auto sentence = [&] {
    metrics::Caption c;
    for (int i = 0; i < 8; ++i) c.push_back(words[rng.below(words.size())]);
    return c;
  };
  std::vector<metrics::Caption> cands;
  std::vector<std::vector<metrics::Caption>> refs;
  for (std::size_t i = 0; i < images; ++i) {
    cands.push_back(sentence());
    refs.push_back({sentence(), sentence(), sentence(), sentence(), sentence()});
  }
  for (auto _ : state) benchmark::DoNotOptimize(metrics::cider(cands, refs));
}
BENCHMARK(BM_Cider)->Arg(100);

}  // namespace
