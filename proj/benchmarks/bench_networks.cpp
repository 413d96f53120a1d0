#include <benchmark/benchmark.h>

#include "mono3d/attention.hpp"
#include "mono3d/decoder.hpp"
#include "mono3d/gradcheck.hpp"

using namespace mono3d;

namespace {

void BM_DecoderForward(benchmark::State& state) {
  const DecoderConfig cfg{static_cast<int>(state.range(0)), 2, 2 * static_cast<int>(state.range(0)),
                          static_cast<int>(state.range(0))};
  const auto inst = random_decoder_instance(1, 8, cfg);
  for (auto _ : state) benchmark::DoNotOptimize(predict(inst.sequence, inst.params));
}
BENCHMARK(BM_DecoderForward)->Arg(8)->Arg(32)->Arg(64);

void BM_DecoderBackward(benchmark::State& state) {
  const DecoderConfig cfg{static_cast<int>(state.range(0)), 2, 2 * static_cast<int>(state.range(0)),
                          static_cast<int>(state.range(0))};
  const auto inst = random_decoder_instance(2, 8, cfg);
  for (auto _ : state) benchmark::DoNotOptimize(backward(inst.sequence, inst.params, inst.target));
}
BENCHMARK(BM_DecoderBackward)->Arg(8)->Arg(32)->Arg(64);

void BM_CrossBranchAttention(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const auto m = random_mining_instance(3, side, side, 16, 8, 16);
  for (auto _ : state) benchmark::DoNotOptimize(cross_branch_attention(m.vit_tokens, m.local, m.params.attention));
}
BENCHMARK(BM_CrossBranchAttention)->Arg(4)->Arg(16)->Arg(32);

void BM_SpatialMiningBackward(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const auto m = random_mining_instance(4, side, side, 16, 8, 16);
  for (auto _ : state) {
    benchmark::DoNotOptimize(spatial_mining_backward(m.local, m.vit_tokens, m.params, m.depth_gt, m.d_tokens, 1.0));
  }
}
BENCHMARK(BM_SpatialMiningBackward)->Arg(4)->Arg(16);

}  // namespace
