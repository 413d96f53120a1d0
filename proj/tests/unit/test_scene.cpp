#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <unistd.h>

#include "mono3d/checkpoint.hpp"
#include "mono3d/error.hpp"
#include "mono3d/json_io.hpp"
#include "mono3d/scene.hpp"
#include "mono3d/toy_data.hpp"
#include "oracles.hpp"

using namespace mono3d;
namespace fs = std::filesystem;

namespace {

fs::path temp_path(const std::string& name) {
  return fs::temp_directory_path() / ("mono3d_test_" + std::to_string(::getpid()) + "_" + name);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ErrorKind kind_of(const auto& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::IoError;
}

std::string message_of(const auto& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

void expect_same_report(const MetricReport& a, const MetricReport& b, double tol) {
  EXPECT_NEAR(a.acc_25, b.acc_25, tol);
  EXPECT_NEAR(a.acc_50, b.acc_50, tol);
  EXPECT_NEAR(*a.mean_depth_error, *b.mean_depth_error, tol);
  EXPECT_NEAR(*a.mean_length_error, *b.mean_length_error, tol);
  EXPECT_NEAR(*a.mean_width_error, *b.mean_width_error, tol);
  EXPECT_NEAR(*a.mean_height_error, *b.mean_height_error, tol);
  EXPECT_EQ(a.count, b.count);
}

}  // namespace

TEST(Synth, Deterministic) {
  const auto a = synth_scenes(1, 77, SynthConfig::indoor());
  const auto b = synth_scenes(1, 77, SynthConfig::indoor());
  EXPECT_EQ(scene_to_json(a[0]), scene_to_json(b[0]));
  EXPECT_NE(scene_to_json(a[0]), scene_to_json(synth_scenes(1, 78, SynthConfig::indoor())[0]));
}

TEST(Synth, CentersProjectInsideImageAndHeightsExact) {
  for (auto kind : {SceneKind::Indoor, SceneKind::Outdoor}) {
    for (const auto& s : synth_scenes(200, 5, SynthConfig::for_kind(kind))) {
      EXPECT_NO_THROW(s.validate());
      for (const auto& o : s.objects) {
        const Point2D p = project(o.box3d.center, s.intrinsics);
        EXPECT_GE(p.u, 0.0);
        EXPECT_LE(p.u, s.intrinsics.width);
        EXPECT_GE(p.v, 0.0);
        EXPECT_LE(p.v, s.intrinsics.height);
        EXPECT_NEAR(o.h2d, s.intrinsics.fy * o.box3d.dims.z() / o.box3d.center.z(), 1e-9);
        if (kind == SceneKind::Outdoor) EXPECT_TRUE(is_yaw_only(o.box3d.rot));
      }
    }
  }
}

TEST(Synth, FocalPairsShareVirtualDepth) {
  const auto scenes = synth_scenes(100, 9, SynthConfig::outdoor());
  int pairs = 0;
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    if (!scenes[i].focal_pair_of) continue;
    ++pairs;
    const auto& pair = scenes[i];
    const auto& base = scenes[i - 1];
    ASSERT_EQ(*pair.focal_pair_of, base.image_id);
    EXPECT_DOUBLE_EQ(pair.intrinsics.fx, 2 * base.intrinsics.fx);
    ASSERT_EQ(pair.objects.size(), base.objects.size());
    for (std::size_t k = 0; k < base.objects.size(); ++k) {
      const double zb = base.objects[k].box3d.center.z(), zp = pair.objects[k].box3d.center.z();
      EXPECT_DOUBLE_EQ(zp, 2 * zb);
      const double vb = real_to_virtual_depth(zb, base.intrinsics, {});
      const double vp = real_to_virtual_depth(zp, pair.intrinsics, {});
      EXPECT_NEAR(vp / vb, 1.0, 1e-9);
    }
  }
  EXPECT_EQ(pairs, 10);
}

TEST(Synth, InvalidRanges) {
  auto cfg = SynthConfig::indoor();
  cfg.depth = {5.0, 1.0};
  EXPECT_EQ(kind_of([&] { synth_scenes(3, 1, cfg); }), ErrorKind::InvalidRanges);
  cfg = SynthConfig::indoor();
  cfg.min_objects = 0;
  EXPECT_EQ(kind_of([&] { cfg.validate(); }), ErrorKind::InvalidRanges);
}

TEST(RawBox, RoundTripBothProfiles) {
  for (auto kind : {SceneKind::Indoor, SceneKind::Outdoor}) {
    const auto profile = DatasetProfile::for_kind(kind);
    for (const auto& s : synth_scenes(50, 3, SynthConfig::for_kind(kind))) {
      for (const auto& o : s.objects) {
        const auto raw = raw_from_box(o.box3d, s.intrinsics, profile);
        EXPECT_TRUE(raw.satisfies_invariants());
        const auto back = box_from_raw(raw, s.intrinsics, profile, o.h2d);
        EXPECT_LE((back.center - o.box3d.center).norm(), 1e-9);
        EXPECT_GE(iou3d(back, o.box3d), 1.0 - 1e-6);
      }
    }
  }
}

TEST(Pipeline, PerfectPredictionsBothModes) {
  for (auto kind : {SceneKind::Indoor, SceneKind::Outdoor}) {
    const auto profile = DatasetProfile::for_kind(kind);
    const auto gt = synth_scenes(40, 21, SynthConfig::for_kind(kind));
    const auto raw = run_pipeline(gt, perfect_predictions(gt, profile, PredictionMode::Raw), profile).report;
    const auto box = run_pipeline(gt, perfect_predictions(gt, profile, PredictionMode::Box), profile).report;
    EXPECT_EQ(raw.acc_50, 1.0);
    EXPECT_LE(*raw.mean_depth_error, 1e-9);
    expect_same_report(raw, box, 1e-9);
  }
}

TEST(Pipeline, OneShiftedPredictionOfFour) {
  SceneRecord s;
  s.image_id = "img";
  s.intrinsics = {1000, 1000, 960, 540, 1920, 1080};
  for (int k = 0; k < 4; ++k) {
    SceneObject o;
    o.object_id = "o" + std::to_string(k);
    o.box3d = {Vec3(-2.0 + k, 0.2, 10.0), Vec3(1.0, 0.8, 1.2), oracle::rot_z(0.3 * k)};
    o.h2d = s.intrinsics.fy * 1.2 / 10.0;
    s.objects.push_back(o);
  }
  const std::vector<SceneRecord> gt{s};
  const auto profile = DatasetProfile::indoor();
  auto preds = perfect_predictions(gt, profile, PredictionMode::Box);
  auto& shifted = std::get<OrientedBox3D>(preds[2].payload);
  // Pick the shift with the sampling estimate, then confirm the band.
  double shift = 0.0;
  for (double x = 0.1; x < 1.0; x += 0.05) {
    auto b = shifted;
    b.center.x() += x;
    if (iou3d_monte_carlo(b, s.objects[2].box3d, 200000, 3) < 0.4) {
      shift = x;
      break;
    }
  }
  shifted.center.x() += shift;
  const double iou = iou3d_monte_carlo(shifted, s.objects[2].box3d, 200000, 4);
  ASSERT_GT(iou, 0.3);
  ASSERT_LT(iou, 0.45);
  const auto r = run_pipeline(gt, preds, profile);
  EXPECT_EQ(r.report.acc_25, 1.0);
  EXPECT_EQ(r.report.acc_50, 0.75);
}

TEST(Pipeline, UnmatchedAndMissing) {
  const auto profile = DatasetProfile::indoor();
  const auto gt = synth_scenes(3, 1, SynthConfig::indoor());
  auto preds = perfect_predictions(gt, profile, PredictionMode::Raw);
  const std::size_t total = preds.size();
  preds.pop_back();
  const auto r = run_pipeline(gt, preds, profile).report;
  EXPECT_EQ(r.count, total);
  EXPECT_NEAR(r.acc_25, double(total - 1) / double(total), 1e-15);
  preds.back().object_id = "ghost_7";
  EXPECT_EQ(kind_of([&] { run_pipeline(gt, preds, profile); }), ErrorKind::UnmatchedPrediction);
  EXPECT_NE(message_of([&] { run_pipeline(gt, preds, profile); }).find("ghost_7"), std::string::npos);
  preds = perfect_predictions(gt, profile, PredictionMode::Raw);
  preds.push_back(preds.front());
  EXPECT_EQ(kind_of([&] { run_pipeline(gt, preds, profile); }), ErrorKind::DuplicatePrediction);
}

TEST(Pipeline, FusedHelpsUnderVirtualDepthNoise) {
  const auto gt = synth_scenes(100, 31, SynthConfig::outdoor());
  auto fused = DatasetProfile::outdoor();
  auto virt = fused;
  virt.depth_mode = DepthMode::VirtualOnly;
  const auto exact = perfect_predictions(gt, fused, PredictionMode::Raw);
  expect_same_report(run_pipeline(gt, exact, fused).report, run_pipeline(gt, exact, virt).report, 1e-9);
  for (double eps : {0.05, 0.1, 0.2}) {
    auto noisy = exact;
    for (auto& p : noisy) std::get<RawPayload>(p.payload).raw.d_v *= 1.0 + eps;
    EXPECT_LT(*run_pipeline(gt, noisy, fused).report.mean_depth_error,
              *run_pipeline(gt, noisy, virt).report.mean_depth_error);
  }
}

TEST(Jsonl, RoundTripByteIdentical) {
  const auto scenes = synth_scenes(100, 13, SynthConfig::outdoor());
  const auto p1 = temp_path("a.jsonl"), p2 = temp_path("b.jsonl");
  write_scenes(p1, scenes);
  write_scenes(p2, read_scenes(p1));
  EXPECT_EQ(slurp(p1), slurp(p2));
  const auto preds = perfect_predictions(scenes, DatasetProfile::outdoor(), PredictionMode::Raw);
  write_predictions(p1, preds);
  write_predictions(p2, read_predictions(p1));
  EXPECT_EQ(slurp(p1), slurp(p2));
  auto boxes = perfect_predictions(scenes, DatasetProfile::outdoor(), PredictionMode::Box);
  write_predictions(p1, boxes);
  write_predictions(p2, read_predictions(p1));
  EXPECT_EQ(slurp(p1), slurp(p2));
  fs::remove(p1);
  fs::remove(p2);
}

TEST(Jsonl, SchemaErrors) {
  const auto line = scene_to_json(synth_scenes(1, 2, SynthConfig::indoor())[0]);
  auto without = line;
  const auto at = without.find("\"intrinsics\"");
  without.replace(at, std::string("\"intrinsics\"").size(), "\"camera\"");
  EXPECT_EQ(kind_of([&] { scene_from_json(without); }), ErrorKind::SchemaError);
  EXPECT_NE(message_of([&] { scene_from_json(without); }).find("intrinsics"), std::string::npos);

  auto with_nan = line;
  with_nan.replace(with_nan.find("\"fy\":") + 5, 1, "NaN,\"x\":1");
  EXPECT_EQ(kind_of([&] { scene_from_json(with_nan); }), ErrorKind::SchemaError);
  EXPECT_NE(message_of([&] { scene_from_json(with_nan); }).find("fy"), std::string::npos);

  EXPECT_EQ(kind_of([] { scene_from_json("{not json"); }), ErrorKind::ParseError);
  EXPECT_EQ(kind_of([] { prediction_from_json(R"({"image_id":"a","object_id":"b"})"); }), ErrorKind::SchemaError);
}

TEST(Jsonl, NaNRejectedInPredictionsAndBoxes) {
  EXPECT_EQ(kind_of([] {
              prediction_from_json(R"({"image_id":"a","object_id":"b","raw":{"u_norm":NaN,"v_norm":0.5,)"
                                   R"("d_v":1,"L":1,"W":1,"H":1,"rot6d":[1,0,0,0,1,0]}})");
            }),
            ErrorKind::SchemaError);
  EXPECT_EQ(kind_of([] {
              prediction_from_json(R"({"image_id":"a","object_id":"b","box":{"center":[0,0,Infinity],)"
                                   R"("dims":[1,1,1],"rot":[1,0,0,0,1,0,0,0,1]}})");
            }),
            ErrorKind::SchemaError);
}

TEST(Jsonl, ReadErrorsCarryLineNumbers) {
  const auto p = temp_path("bad.jsonl");
  const auto good = scene_to_json(synth_scenes(1, 2, SynthConfig::indoor())[0]);
  write_text_file(p, good + "\n" + "{\"image_id\":3}\n");
  const auto msg = message_of([&] { read_scenes(p); });
  EXPECT_NE(msg.find(":2"), std::string::npos) << msg;
  EXPECT_EQ(kind_of([&] { read_scenes(temp_path("absent.jsonl")); }), ErrorKind::IoError);
  const auto pred = prediction_to_json(perfect_predictions(synth_scenes(1, 2, SynthConfig::indoor()),
                                                           DatasetProfile::indoor(), PredictionMode::Raw)[0]);
  write_text_file(p, pred + "\n" + pred + "\n");
  EXPECT_EQ(kind_of([&] { read_predictions(p); }), ErrorKind::DuplicatePrediction);
  fs::remove(p);
}

TEST(Intrinsics, JsonRoundTrip) {
  const CameraIntrinsics c{721.5, 720.25, 609.5, 172.85, 1242, 375};
  const auto back = intrinsics_from_json(intrinsics_to_json(c));
  EXPECT_EQ(back.fx, c.fx);
  EXPECT_EQ(back.cy, c.cy);
  EXPECT_EQ(kind_of([] { intrinsics_from_json(R"({"fx":1,"fy":1,"cx":0.5,"cy":0.5,"width":1})"); }),
            ErrorKind::SchemaError);
}

TEST(ToyData, PerfectTargetsHaveZeroLossUnderIdentityReasoning) {
  const auto profile = DatasetProfile::indoor();
  const auto scenes = synth_scenes(5, 1, SynthConfig::indoor());
  const ToyEncoder enc({});
  const auto samples = build_toy_dataset(scenes, profile, enc);
  std::size_t objects = 0;
  for (const auto& s : scenes) objects += s.objects.size();
  ASSERT_EQ(samples.size(), objects);
  for (const auto& s : samples) {
    EXPECT_NO_THROW(s.sample.sequence.validate());
    EXPECT_EQ(loss(s.sample.target, s.sample.target), 0.0);
  }
  // Encoding is a pure function of the target when noise is off.
  EXPECT_EQ(enc.encode(samples[0].sample.target, nullptr).embeddings, samples[0].sample.sequence.embeddings);
}

TEST(Checkpoint, RoundTripAndCsv) {
  Checkpoint ck;
  ck.params = DecoderParams::random({8, 1, 16, 8}, 5);
  ck.train.seed = 123;
  ck.loss_history = {3.5, 1.25};
  const auto text = checkpoint_to_json(ck);
  const auto back = checkpoint_from_json(text);
  EXPECT_EQ(checkpoint_to_json(back), text);
  EXPECT_EQ(back.train.seed, 123u);
  EXPECT_EQ(loss_history_csv(ck.loss_history), "epoch,mean_loss\n1,3.5\n2,1.25\n");
  EXPECT_EQ(kind_of([] { read_checkpoint(temp_path("none.json")); }), ErrorKind::IoError);
}
