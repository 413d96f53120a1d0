#pragma once

#include <array>

#include "mono3d/types.hpp"

namespace mono3d {

/// Continuous 6D rotation parameterization: the first two (unnormalized)
/// columns of a rotation matrix.
struct Rot6D {
  Vec3 a = Vec3::UnitX();
  Vec3 b = Vec3::UnitY();

  std::array<double, 6> to_array() const { return {a.x(), a.y(), a.z(), b.x(), b.y(), b.z()}; }
  static Rot6D from_array(const std::array<double, 6>& v) {
    return {Vec3(v[0], v[1], v[2]), Vec3(v[3], v[4], v[5])};
  }
};

/// Intrinsic Z-Y'-X'' angles: R = Rz(yaw) * Ry(pitch) * Rx(roll).
struct EulerAngles {
  double pitch = 0.0;
  double roll = 0.0;
  double yaw = 0.0;
};

inline constexpr double kSixDDegeneracy = 1e-8;
inline constexpr double kRotationTolerance = 1e-9;

/// Gram-Schmidt: c1 = a/|a|, c2 = unit(b - (c1.b) c1), c3 = c1 x c2.
/// Throws DegenerateSixD when |a| or the orthogonalized b is below 1e-8.
Mat3 rot6d_to_matrix(const Rot6D& r);

/// First two columns of R. Throws NotARotation if R is not in SO(3).
Rot6D matrix_to_rot6d(const Mat3& R);

/// True when R^T R = I and det R = 1, elementwise within `tol`.
bool is_rotation(const Mat3& R, double tol = kRotationTolerance);
void require_rotation(const Mat3& R, const char* what = "rotation");

Mat3 euler_to_matrix(const EulerAngles& e);

/// Inverse of euler_to_matrix. Throws GimbalLockRegion when |R[2][0]| > 1 - 1e-9,
/// where yaw and roll stop being separable.
EulerAngles matrix_to_euler(const Mat3& R);

/// Angle of R1^T R2, in [0, pi].
double geodesic_distance(const Mat3& R1, const Mat3& R2);

Mat3 axis_angle(const Vec3& axis, double angle);

/// Minimal rotation taking the camera z-axis onto the unit ray toward `center`.
Mat3 viewing_rotation(const Point3D& center);

/// R_ego = R_view(center) * R_alloc.
Mat3 allocentric_to_egocentric(const Mat3& R_alloc, const Point3D& center);
Mat3 egocentric_to_allocentric(const Mat3& R_ego, const Point3D& center);

}  // namespace mono3d
