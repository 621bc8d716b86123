#include <benchmark/benchmark.h>

#include "cosnet/model/cosnet.hpp"

namespace {

using namespace cosnet;

model::ModelConfig small_config(std::size_t dim) {
  model::ModelConfig c;
  c.feature_dim = 64;
  c.model_dim = dim;
  c.heads = 4;
  c.visual_layers = 2;
  c.semantic_layers = 1;
  c.decoder_layers = 2;
  c.slots = 8;
  c.positions = 28;
  c.max_length = 16;
  c.word_vocab_size = 60;
  c.semantic_vocab_size = 40;
  return c;
}

model::TrainingExample example(Rng& rng) {
  model::TrainingExample ex;
  ex.image.global = Tensor<float>({64});
  ex.image.grid = Tensor<float>({16, 64});
  for (auto& x : ex.image.global.values()) x = static_cast<float>(rng.normal());
  for (auto& x : ex.image.grid.values()) x = static_cast<float>(rng.normal());
  ex.image.cues = {1, 4, 9, 12, 20, 33};
  for (int c = 0; c < 5; ++c) {
    std::vector<std::size_t> cap;
    for (int t = 0; t < 9; ++t) cap.push_back(4 + rng.below(56));
    ex.captions.push_back(cap);
  }
  ex.semantic_words = {1, 4, 7};
  return ex;
}

void BM_ExampleForwardBackward(benchmark::State& state) {
  const model::CosNetModel<float> net(small_config(static_cast<std::size_t>(state.range(0))), 1);
  Rng rng(2);
  const auto ex = example(rng);
  for (auto _ : state) {
    Graph<float> g;
    const auto loss = net.example_loss(g, ex);
    g.backward(loss.total);
    benchmark::DoNotOptimize(loss.total.value().data());
  }
}
BENCHMARK(BM_ExampleForwardBackward)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_BeamSearch(benchmark::State& state) {
  const model::CosNetModel<float> net(small_config(64), 1);
  Rng rng(3);
  const auto ex = example(rng);
  for (auto _ : state) benchmark::DoNotOptimize(net.caption(ex.image, static_cast<std::size_t>(state.range(0))));
}
BENCHMARK(BM_BeamSearch)->Arg(1)->Arg(3)->Unit(benchmark::kMillisecond);

}  // namespace
