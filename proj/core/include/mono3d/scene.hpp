#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "mono3d/box3d.hpp"
#include "mono3d/camera.hpp"
#include "mono3d/head_output.hpp"
#include "mono3d/metrics.hpp"

namespace mono3d {

struct SceneObject {
  std::string object_id;
  std::string caption;
  OrientedBox3D box3d;
  std::array<double, 4> box2d{};  // x1, y1, x2, y2 in pixels
  double h2d = 0.0;               // projected 3D height used by the height-depth branch
};

struct SceneRecord {
  std::string image_id;
  CameraIntrinsics intrinsics;
  std::vector<SceneObject> objects;
  // Set on the doubled-focal/doubled-depth copy of another scene.
  std::optional<std::string> focal_pair_of;

  /// Throws SchemaError on duplicate object ids, invalid boxes or Z <= 0.
  void validate() const;
};

struct RawPayload {
  RawHeadOutput raw;
  std::optional<double> h2d;  // falls back to the ground-truth object's h2d
};

enum class PredictionMode { Raw, Box };

struct PredictionRecord {
  std::string image_id;
  std::string object_id;
  std::variant<RawPayload, OrientedBox3D> payload;

  PredictionMode mode() const {
    return std::holds_alternative<RawPayload>(payload) ? PredictionMode::Raw : PredictionMode::Box;
  }
};

enum class RotationFrame { Egocentric, Allocentric };
enum class SceneKind { Indoor, Outdoor };

struct DatasetProfile {
  DepthMode depth_mode = DepthMode::VirtualOnly;
  RotationFrame rotation_frame = RotationFrame::Allocentric;
  VirtualCamera virtual_camera;

  static DatasetProfile indoor();   // VirtualOnly
  static DatasetProfile outdoor();  // FusedAverage
  static DatasetProfile for_kind(SceneKind kind);
};

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

struct SynthConfig {
  SceneKind kind = SceneKind::Indoor;
  Range focal{500.0, 2000.0};
  Range depth{0.5, 8.0};
  Range length{0.3, 2.0};
  Range width{0.3, 2.0};
  Range height{0.3, 2.0};
  bool yaw_only = false;
  int min_objects = 1;
  int max_objects = 3;
  // Every tenth scene repeats its predecessor with fx, fy and depth doubled.
  bool focal_pairs = true;

  static SynthConfig indoor();
  static SynthConfig outdoor();
  static SynthConfig for_kind(SceneKind kind);

  /// Throws InvalidRanges.
  void validate() const;
};

std::vector<SceneRecord> synth_scenes(int n, std::uint64_t seed, const SynthConfig& config);

/// Exact head outputs for a box: the target a perfect network would regress.
RawHeadOutput raw_from_box(const OrientedBox3D& box, const CameraIntrinsics& cam, const DatasetProfile& profile);

/// Inverse of raw_from_box given the height cue.
OrientedBox3D box_from_raw(const RawHeadOutput& raw, const CameraIntrinsics& cam, const DatasetProfile& profile,
                           std::optional<double> h2d);

std::vector<PredictionRecord> perfect_predictions(const std::vector<SceneRecord>& scenes,
                                                  const DatasetProfile& profile, PredictionMode mode);

struct PipelineOptions {
  DepthErrorKind depth_error = DepthErrorKind::AxisZ;
  // When set, every payload must be of this kind.
  std::optional<PredictionMode> expected_mode;
};

struct PipelineResult {
  MetricReport report;
  std::vector<QueryResult> per_query;
};

/// Turns predictions into boxes, scores them against ground truth by
/// (image_id, object_id) and aggregates. Throws UnmatchedPrediction for a
/// prediction with no ground-truth object, DuplicatePrediction for two
/// predictions on the same object.
PipelineResult run_pipeline(const std::vector<SceneRecord>& gt, const std::vector<PredictionRecord>& preds,
                            const DatasetProfile& profile, const PipelineOptions& options = {});

std::string query_key(const std::string& image_id, const std::string& object_id);

}  // namespace mono3d
