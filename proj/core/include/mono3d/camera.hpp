#pragma once

#include <optional>

#include "mono3d/head_output.hpp"
#include "mono3d/types.hpp"

namespace mono3d {

/// Pinhole intrinsics (pixels). Zero skew, no distortion.
struct CameraIntrinsics {
  double fx = 1000.0;
  double fy = 1000.0;
  double cx = 960.0;
  double cy = 540.0;
  double width = 1920.0;
  double height = 1080.0;

  /// Throws InvalidIntrinsics on non-positive focal/size or a principal point off the image.
  void validate() const;
};

/// Reference camera in which depth is regressed. Only the x focal length and
/// image width enter the depth normalization.
struct VirtualCamera {
  double fx_v = 500.0;
  double width_v = 1000.0;

  void validate() const;
};

enum class DepthMode { VirtualOnly, FusedAverage };

inline constexpr double kHeightEpsilon = 1e-6;

Point2D project(const Point3D& P, const CameraIntrinsics& cam);

/// Z_v = (fx_v / fx) * (width / width_v) * Z.
double real_to_virtual_depth(double Z, const CameraIntrinsics& cam, const VirtualCamera& vc);

/// Z = d_v * (fx / fx_v) * (width_v / width). Exact inverse of real_to_virtual_depth.
double virtual_to_real_depth(double d_v, const CameraIntrinsics& cam, const VirtualCamera& vc);

/// Depth from the ratio of metric to projected object height: Z = (H / h2d) * fy.
double height_depth(double H, double h2d, const CameraIntrinsics& cam);

/// `Z2` is ignored in VirtualOnly mode.
double fuse_depth(double Z1, double Z2, DepthMode mode);

Point3D backproject_center(const Point2D& p, double Z, const CameraIntrinsics& cam);

/// Full reasoning chain from head outputs to the 3D box center:
/// normalized pixel -> pixel, virtual depth -> real depth, optional
/// height-based depth, fusion, back-projection.
Point3D reason_center(const RawHeadOutput& raw, const CameraIntrinsics& cam, const VirtualCamera& vc,
                      DepthMode mode, std::optional<double> h2d = std::nullopt);

}  // namespace mono3d
