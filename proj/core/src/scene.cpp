#include "mono3d/scene.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include <Eigen/Geometry>
#include <fmt/format.h>

#include "mono3d/error.hpp"
#include "mono3d/rotation.hpp"

namespace mono3d {

std::string query_key(const std::string& image_id, const std::string& object_id) {
  return image_id + '\x1f' + object_id;
}

void SceneRecord::validate() const {
  std::set<std::string> ids;
  for (const auto& o : objects) {
    if (!ids.insert(o.object_id).second) {
      throw Error(ErrorKind::SchemaError, "duplicate object_id '" + o.object_id + "' in image '" + image_id + "'");
    }
    try {
      o.box3d.validate();
    } catch (const Error& e) {
      throw Error(ErrorKind::SchemaError, "object '" + o.object_id + "': " + e.what());
    }
    if (!(o.box3d.center.z() > 0.0)) {
      throw Error(ErrorKind::SchemaError, "object '" + o.object_id + "': box center must have Z > 0");
    }
  }
}

// ---------------------------------------------------------------------------
// Profiles

DatasetProfile DatasetProfile::indoor() { return {DepthMode::VirtualOnly, RotationFrame::Allocentric, {}}; }

DatasetProfile DatasetProfile::outdoor() { return {DepthMode::FusedAverage, RotationFrame::Allocentric, {}}; }

DatasetProfile DatasetProfile::for_kind(SceneKind kind) {
  return kind == SceneKind::Indoor ? indoor() : outdoor();
}

SynthConfig SynthConfig::indoor() { return {}; }

SynthConfig SynthConfig::outdoor() {
  SynthConfig c;
  c.kind = SceneKind::Outdoor;
  c.depth = {2.0, 60.0};
  c.length = {0.6, 5.0};
  c.width = {0.5, 2.2};
  c.height = {1.0, 2.2};
  c.yaw_only = true;
  return c;
}

SynthConfig SynthConfig::for_kind(SceneKind kind) { return kind == SceneKind::Indoor ? indoor() : outdoor(); }

void SynthConfig::validate() const {
  auto check = [](const Range& r, const char* name) {
    if (!(std::isfinite(r.lo) && std::isfinite(r.hi) && r.lo > 0.0 && r.lo <= r.hi)) {
      throw Error(ErrorKind::InvalidRanges, fmt::format("{} range [{}, {}] must satisfy 0 < lo <= hi", name, r.lo, r.hi));
    }
  };
  check(focal, "focal");
  check(depth, "depth");
  check(length, "length");
  check(width, "width");
  check(height, "height");
  if (min_objects < 1 || max_objects < min_objects) {
    throw Error(ErrorKind::InvalidRanges, "object count range must satisfy 1 <= min <= max");
  }
  if (focal_pairs && (focal.hi < 2.0 * focal.lo || depth.hi < 2.0 * depth.lo)) {
    throw Error(ErrorKind::InvalidRanges, "focal pairs need focal and depth ranges spanning a factor of 2");
  }
}

// ---------------------------------------------------------------------------
// Synthetic scenes

namespace {

struct ImageSize {
  double width, height;
};

constexpr ImageSize kIndoorSizes[] = {{640, 480}, {730, 530}, {1024, 768}};
constexpr ImageSize kOutdoorSizes[] = {{1242, 375}, {1600, 900}, {1920, 1080}};

std::array<double, 4> project_box2d(const OrientedBox3D& box, const CameraIntrinsics& cam) {
  double x1 = std::numeric_limits<double>::infinity(), y1 = x1;
  double x2 = -x1, y2 = -x1;
  for (const auto& c : corners(box)) {
    const Point2D p = project(c, cam);
    x1 = std::min(x1, p.u);
    y1 = std::min(y1, p.v);
    x2 = std::max(x2, p.u);
    y2 = std::max(y2, p.v);
  }
  return {std::clamp(x1, 0.0, cam.width), std::clamp(y1, 0.0, cam.height), std::clamp(x2, 0.0, cam.width),
          std::clamp(y2, 0.0, cam.height)};
}

Mat3 random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::Quaterniond q;
  do {
    q = Eigen::Quaterniond(normal(rng), normal(rng), normal(rng), normal(rng));
  } while (q.norm() < 1e-6);
  return q.normalized().toRotationMatrix();
}

void finish_object(SceneObject& o, const CameraIntrinsics& cam) {
  o.box2d = project_box2d(o.box3d, cam);
  o.h2d = cam.fy * o.box3d.dims.z() / o.box3d.center.z();
}

constexpr double kMinCornerDepth = 0.05;

SceneRecord sample_scene(int index, std::mt19937_64& rng, const SynthConfig& cfg, bool pair_base) {
  auto uniform = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  const auto& sizes = cfg.kind == SceneKind::Indoor ? kIndoorSizes : kOutdoorSizes;
  const ImageSize size = sizes[std::uniform_int_distribution<int>(0, 2)(rng)];

  SceneRecord rec;
  rec.image_id = fmt::format("scene_{:06d}", index);
  CameraIntrinsics& cam = rec.intrinsics;
  cam.width = size.width;
  cam.height = size.height;
  cam.fx = uniform(cfg.focal.lo, pair_base ? cfg.focal.hi / 2.0 : cfg.focal.hi);
  cam.fy = cam.fx * uniform(0.95, 1.05);
  if (pair_base) cam.fy = std::min(cam.fy, cfg.focal.hi / 2.0);
  cam.cx = cam.width * uniform(0.45, 0.55);
  cam.cy = cam.height * uniform(0.45, 0.55);

  const double depth_hi = pair_base ? cfg.depth.hi / 2.0 : cfg.depth.hi;
  const int count = std::uniform_int_distribution<int>(cfg.min_objects, cfg.max_objects)(rng);
  for (int k = 0; k < count; ++k) {
    SceneObject o;
    o.object_id = fmt::format("obj_{}", k);
    o.caption = "object " + o.object_id;
    for (int attempt = 0;; ++attempt) {
      if (attempt == 1000) throw Error(ErrorKind::InvalidRanges, "cannot place a box in front of the camera");
      const double Z = uniform(cfg.depth.lo, depth_hi);
      const Point2D p{uniform(0.0, cam.width), uniform(0.0, cam.height)};
      o.box3d.center = backproject_center(p, Z, cam);
      o.box3d.dims = Vec3(uniform(cfg.length.lo, cfg.length.hi), uniform(cfg.width.lo, cfg.width.hi),
                          uniform(cfg.height.lo, cfg.height.hi));
      o.box3d.rot = cfg.yaw_only ? axis_angle(Vec3::UnitZ(), uniform(-std::numbers::pi, std::numbers::pi))
                                 : random_rotation(rng);
      const auto cs = corners(o.box3d);
      const bool in_front =
          std::all_of(cs.begin(), cs.end(), [](const Point3D& c) { return c.z() > kMinCornerDepth; });
      if (in_front) break;
    }
    finish_object(o, cam);
    rec.objects.push_back(std::move(o));
  }
  return rec;
}

// Same image content with fx, fy and every depth doubled; X and Y stay put so
// each object's center projects to the same pixel.
SceneRecord focal_partner(const SceneRecord& base, int index) {
  SceneRecord rec = base;
  rec.image_id = fmt::format("scene_{:06d}", index);
  rec.focal_pair_of = base.image_id;
  rec.intrinsics.fx *= 2.0;
  rec.intrinsics.fy *= 2.0;
  for (auto& o : rec.objects) {
    o.box3d.center.z() *= 2.0;
    finish_object(o, rec.intrinsics);
  }
  return rec;
}

}  // namespace

std::vector<SceneRecord> synth_scenes(int n, std::uint64_t seed, const SynthConfig& config) {
  if (n < 1) throw Error(ErrorKind::InvalidRanges, "scene count must be >= 1");
  config.validate();
  std::mt19937_64 rng(seed);
  std::vector<SceneRecord> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    if (config.focal_pairs && i % 10 == 9) {
      out.push_back(focal_partner(out.back(), i));
    } else {
      const bool pair_base = config.focal_pairs && i % 10 == 8;
      out.push_back(sample_scene(i, rng, config, pair_base));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Head outputs <-> boxes

RawHeadOutput raw_from_box(const OrientedBox3D& box, const CameraIntrinsics& cam, const DatasetProfile& profile) {
  const Point2D p = project(box.center, cam);
  RawHeadOutput raw;
  raw.u_norm = p.u / cam.width;
  raw.v_norm = p.v / cam.height;
  raw.d_v = real_to_virtual_depth(box.center.z(), cam, profile.virtual_camera);
  raw.L = box.dims.x();
  raw.W = box.dims.y();
  raw.H = box.dims.z();
  const Mat3 R = profile.rotation_frame == RotationFrame::Allocentric ? egocentric_to_allocentric(box.rot, box.center)
                                                                      : box.rot;
  raw.rot6d = matrix_to_rot6d(R);
  return raw;
}

OrientedBox3D box_from_raw(const RawHeadOutput& raw, const CameraIntrinsics& cam, const DatasetProfile& profile,
                           std::optional<double> h2d) {
  OrientedBox3D box;
  box.center = reason_center(raw, cam, profile.virtual_camera, profile.depth_mode, h2d);
  box.dims = Vec3(raw.L, raw.W, raw.H);
  const Mat3 R = rot6d_to_matrix(raw.rot6d);
  box.rot = profile.rotation_frame == RotationFrame::Allocentric ? allocentric_to_egocentric(R, box.center) : R;
  return box;
}

std::vector<PredictionRecord> perfect_predictions(const std::vector<SceneRecord>& scenes,
                                                  const DatasetProfile& profile, PredictionMode mode) {
  std::vector<PredictionRecord> out;
  for (const auto& s : scenes) {
    for (const auto& o : s.objects) {
      PredictionRecord p;
      p.image_id = s.image_id;
      p.object_id = o.object_id;
      if (mode == PredictionMode::Box) {
        p.payload = o.box3d;
      } else {
        p.payload = RawPayload{raw_from_box(o.box3d, s.intrinsics, profile), std::nullopt};
      }
      out.push_back(std::move(p));
    }
  }
  return out;
}

}  // namespace mono3d
