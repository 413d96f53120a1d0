#include <benchmark/benchmark.h>

#include <random>

#include <Eigen/Geometry>

#include "mono3d/box3d.hpp"
#include "mono3d/camera.hpp"
#include "mono3d/rotation.hpp"
#include "mono3d/scene.hpp"

using namespace mono3d;

namespace {

Mat3 random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0, 1);
  return Eigen::Quaterniond(n(rng), n(rng), n(rng), n(rng)).normalized().toRotationMatrix();
}

std::vector<std::pair<OrientedBox3D, OrientedBox3D>> box_pairs(bool yaw_only, int count) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> c(-0.4, 0.4), d(0.5, 2.0), t(-3.14, 3.14);
  auto rot = [&] { return yaw_only ? axis_angle(Vec3::UnitZ(), t(rng)) : random_rotation(rng); };
  std::vector<std::pair<OrientedBox3D, OrientedBox3D>> out;
  for (int i = 0; i < count; ++i) {
    out.push_back({{Vec3::Zero(), Vec3(d(rng), d(rng), d(rng)), rot()},
                   {Vec3(c(rng), c(rng), c(rng)), Vec3(d(rng), d(rng), d(rng)), rot()}});
  }
  return out;
}

void BM_Iou3dGeneral(benchmark::State& state) {
  const auto pairs = box_pairs(false, 256);
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& [a, b] = pairs[i++ % pairs.size()];
    benchmark::DoNotOptimize(iou3d(a, b));
  }
}
BENCHMARK(BM_Iou3dGeneral);

void BM_Iou3dYawGeneralPath(benchmark::State& state) {
  const auto pairs = box_pairs(true, 256);
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& [a, b] = pairs[i++ % pairs.size()];
    benchmark::DoNotOptimize(iou3d(a, b));
  }
}
BENCHMARK(BM_Iou3dYawGeneralPath);

void BM_Iou3dBevFastPath(benchmark::State& state) {
  const auto pairs = box_pairs(true, 256);
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& [a, b] = pairs[i++ % pairs.size()];
    benchmark::DoNotOptimize(iou3d_bev_yaw(a, b));
  }
}
BENCHMARK(BM_Iou3dBevFastPath);

void BM_Iou3dMonteCarlo(benchmark::State& state) {
  const auto pairs = box_pairs(false, 16);
  std::size_t i = 0;
  const auto samples = static_cast<std::uint64_t>(state.range(0));
  for (auto _ : state) {
    const auto& [a, b] = pairs[i % pairs.size()];
    benchmark::DoNotOptimize(iou3d_monte_carlo(a, b, samples, i++));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Iou3dMonteCarlo)->Arg(10000)->Arg(1000000)->Unit(benchmark::kMillisecond);

void BM_ReasonCenter(benchmark::State& state) {
  const auto mode = state.range(0) ? DepthMode::FusedAverage : DepthMode::VirtualOnly;
  const CameraIntrinsics cam{1266.4, 1266.4, 816.3, 491.5, 1600, 900};
  RawHeadOutput raw;
  raw.u_norm = 0.43;
  raw.v_norm = 0.61;
  raw.d_v = 17.5;
  raw.H = 1.6;
  for (auto _ : state) {
    benchmark::DoNotOptimize(reason_center(raw, cam, {}, mode, 55.0));
  }
}
BENCHMARK(BM_ReasonCenter)->Arg(0)->Arg(1);

void BM_Rot6dToMatrix(benchmark::State& state) {
  const Rot6D r{Vec3(0.9, 0.1, -0.2), Vec3(0.3, 1.1, 0.05)};
  for (auto _ : state) benchmark::DoNotOptimize(rot6d_to_matrix(r));
}
BENCHMARK(BM_Rot6dToMatrix);

void BM_SynthScenes(benchmark::State& state) {
  const auto cfg = SynthConfig::outdoor();
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(synth_scenes(100, seed++, cfg));
  state.SetItemsProcessed(state.iterations() * 100);
}
BENCHMARK(BM_SynthScenes)->Unit(benchmark::kMillisecond);

}  // namespace
