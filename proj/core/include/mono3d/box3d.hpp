#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "mono3d/types.hpp"

namespace mono3d {

/// Oriented box in camera coordinates. Local axes: L along x, W along y,
/// H along z; `rot` maps local to camera frame.
struct OrientedBox3D {
  Point3D center = Point3D::Zero();
  Vec3 dims = Vec3::Ones();  // (L, W, H)
  Mat3 rot = Mat3::Identity();

  double volume() const { return dims.prod(); }

  /// Throws InvalidBox on non-positive or non-finite dims, NotARotation on a bad rot.
  void validate() const;
};

inline constexpr double kClipTolerance = 1e-9;

/// Corner i has local offset (sx*L/2, sy*W/2, sz*H/2) with
/// sx = bit0 ? +1 : -1, sy = bit1 ? +1 : -1, sz = bit2 ? +1 : -1.
std::array<Point3D, 8> corners(const OrientedBox3D& b);

/// True when `p` lies inside or on the box.
bool contains(const OrientedBox3D& b, const Point3D& p);

/// Convex polyhedron as a vertex list plus outward-oriented (counter-clockwise
/// seen from outside) index cycles.
struct ConvexPolytope {
  std::vector<Vec3> vertices;
  std::vector<std::vector<int>> faces;

  bool empty() const { return faces.size() < 4; }

  /// Signed-tetrahedra volume about the vertex centroid.
  double volume() const;

  static ConvexPolytope from_box(const OrientedBox3D& b);

  /// Keeps the half-space normal.dot(x) <= offset.
  ConvexPolytope clip(const Vec3& normal, double offset, double tol = kClipTolerance) const;
};

/// The six half-spaces (outward normal, offset) whose intersection is the box.
std::array<std::pair<Vec3, double>, 6> half_spaces(const OrientedBox3D& b);

/// Volume of a ∩ b via plane-by-plane convex clipping of a against b's faces.
double intersection_volume(const OrientedBox3D& a, const OrientedBox3D& b);

double iou3d(const OrientedBox3D& a, const OrientedBox3D& b);

/// Rotation is about local z only (ground-plane yaw).
bool is_yaw_only(const Mat3& R, double tol = 1e-9);

/// Footprint-polygon overlap times vertical overlap. Throws NotYawOnly
/// when either box carries pitch or roll.
double iou3d_bev_yaw(const OrientedBox3D& a, const OrientedBox3D& b);

/// Rejection-sampling estimate over the axis-aligned hull of both boxes.
double iou3d_monte_carlo(const OrientedBox3D& a, const OrientedBox3D& b, std::uint64_t samples,
                         std::uint64_t seed);

}  // namespace mono3d
