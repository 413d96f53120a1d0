#include "mono3d/camera.hpp"

#include <cmath>
#include <string>

#include "mono3d/error.hpp"

namespace mono3d {

namespace {

bool finite_all(std::initializer_list<double> values) {
  for (double v : values) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void require_positive_depth(double Z, const char* what) {
  if (!(Z > 0.0) || !std::isfinite(Z)) {
    throw Error(ErrorKind::NonPositiveDepth, std::string(what) + " must be > 0, got " + std::to_string(Z));
  }
}

}  // namespace

std::array<double, RawHeadOutput::kNumComponents> RawHeadOutput::to_array() const {
  return {u_norm, v_norm, d_v, L, W, H, rot6d.a.x(), rot6d.a.y(), rot6d.a.z(), rot6d.b.x(), rot6d.b.y(), rot6d.b.z()};
}

RawHeadOutput RawHeadOutput::from_array(const std::array<double, kNumComponents>& v) {
  RawHeadOutput r;
  r.u_norm = v[0];
  r.v_norm = v[1];
  r.d_v = v[2];
  r.L = v[3];
  r.W = v[4];
  r.H = v[5];
  r.rot6d = Rot6D{Vec3(v[6], v[7], v[8]), Vec3(v[9], v[10], v[11])};
  return r;
}

bool RawHeadOutput::satisfies_invariants() const {
  for (double v : to_array()) {
    if (!std::isfinite(v)) return false;
  }
  return u_norm >= 0.0 && u_norm <= 1.0 && v_norm >= 0.0 && v_norm <= 1.0 && d_v > 0.0 && L > 0.0 && W > 0.0 &&
         H > 0.0;
}

void CameraIntrinsics::validate() const {
  if (!finite_all({fx, fy, cx, cy, width, height})) {
    throw Error(ErrorKind::InvalidIntrinsics, "non-finite intrinsics");
  }
  if (fx <= 0.0 || fy <= 0.0) throw Error(ErrorKind::InvalidIntrinsics, "focal lengths must be > 0");
  if (width <= 0.0 || height <= 0.0) throw Error(ErrorKind::InvalidIntrinsics, "image size must be > 0");
  if (cx < 0.0 || cx > width || cy < 0.0 || cy > height) {
    throw Error(ErrorKind::InvalidIntrinsics, "principal point outside the image");
  }
}

void VirtualCamera::validate() const {
  if (!finite_all({fx_v, width_v}) || fx_v <= 0.0 || width_v <= 0.0) {
    throw Error(ErrorKind::InvalidIntrinsics, "virtual camera needs fx_v > 0 and width_v > 0");
  }
}

Point2D project(const Point3D& P, const CameraIntrinsics& cam) {
  require_positive_depth(P.z(), "point depth");
  return {cam.fx * P.x() / P.z() + cam.cx, cam.fy * P.y() / P.z() + cam.cy};
}

double real_to_virtual_depth(double Z, const CameraIntrinsics& cam, const VirtualCamera& vc) {
  require_positive_depth(Z, "real depth");
  return (vc.fx_v / cam.fx) * (cam.width / vc.width_v) * Z;
}

double virtual_to_real_depth(double d_v, const CameraIntrinsics& cam, const VirtualCamera& vc) {
  require_positive_depth(d_v, "virtual depth");
  return d_v * (cam.fx / vc.fx_v) * (vc.width_v / cam.width);
}

double height_depth(double H, double h2d, const CameraIntrinsics& cam) {
  if (!(h2d > kHeightEpsilon) || !std::isfinite(h2d)) {
    throw Error(ErrorKind::DegenerateHeight, "projected height " + std::to_string(h2d) + " px is degenerate");
  }
  if (!(H > 0.0) || !std::isfinite(H)) {
    throw Error(ErrorKind::DegenerateHeight, "metric height must be > 0");
  }
  return (H / h2d) * cam.fy;
}

double fuse_depth(double Z1, double Z2, DepthMode mode) {
  require_positive_depth(Z1, "Z1");
  if (mode == DepthMode::VirtualOnly) return Z1;
  require_positive_depth(Z2, "Z2");
  return 0.5 * (Z1 + Z2);
}

Point3D backproject_center(const Point2D& p, double Z, const CameraIntrinsics& cam) {
  require_positive_depth(Z, "depth");
  return {(Z / cam.fx) * (p.u - cam.cx), (Z / cam.fy) * (p.v - cam.cy), Z};
}

Point3D reason_center(const RawHeadOutput& raw, const CameraIntrinsics& cam, const VirtualCamera& vc, DepthMode mode,
                      std::optional<double> h2d) {
  const Point2D pixel{raw.u_norm * cam.width, raw.v_norm * cam.height};
  const double Z1 = virtual_to_real_depth(raw.d_v, cam, vc);
  double Z2 = 0.0;
  if (mode == DepthMode::FusedAverage) {
    if (!h2d) throw Error(ErrorKind::MissingHeight2D, "fused depth needs the projected 2D height");
    Z2 = height_depth(raw.H, *h2d, cam);
  }
  return backproject_center(pixel, fuse_depth(Z1, Z2, mode), cam);
}

}  // namespace mono3d
