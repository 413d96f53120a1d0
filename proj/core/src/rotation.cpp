#include "mono3d/rotation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Geometry>

#include "mono3d/error.hpp"

namespace mono3d {

namespace {

double wrap_angle(double a) {
  // atan2 returns [-pi, pi]; the representation uses (-pi, pi].
  return a <= -std::numbers::pi ? a + 2.0 * std::numbers::pi : a;
}

}  // namespace

Mat3 rot6d_to_matrix(const Rot6D& r) {
  if (!r.a.allFinite() || !r.b.allFinite()) {
    throw Error(ErrorKind::DegenerateSixD, "non-finite 6D components");
  }
  const double na = r.a.norm();
  if (na < kSixDDegeneracy) throw Error(ErrorKind::DegenerateSixD, "first column has near-zero norm");
  const Vec3 c1 = r.a / na;
  const Vec3 b_perp = r.b - c1.dot(r.b) * c1;
  const double nb = b_perp.norm();
  if (nb < kSixDDegeneracy) throw Error(ErrorKind::DegenerateSixD, "second column is parallel to the first");
  const Vec3 c2 = b_perp / nb;
  Mat3 R;
  R.col(0) = c1;
  R.col(1) = c2;
  R.col(2) = c1.cross(c2);
  return R;
}

bool is_rotation(const Mat3& R, double tol) {
  if (!R.allFinite()) return false;
  const Mat3 gram = R.transpose() * R;
  if ((gram - Mat3::Identity()).cwiseAbs().maxCoeff() > tol) return false;
  return std::abs(R.determinant() - 1.0) <= tol;
}

void require_rotation(const Mat3& R, const char* what) {
  if (!is_rotation(R)) {
    throw Error(ErrorKind::NotARotation, std::string(what) + " is not orthonormal with det 1");
  }
}

Rot6D matrix_to_rot6d(const Mat3& R) {
  require_rotation(R, "matrix");
  return {R.col(0), R.col(1)};
}

Mat3 euler_to_matrix(const EulerAngles& e) {
  const Mat3 Rz = Eigen::AngleAxisd(e.yaw, Vec3::UnitZ()).toRotationMatrix();
  const Mat3 Ry = Eigen::AngleAxisd(e.pitch, Vec3::UnitY()).toRotationMatrix();
  const Mat3 Rx = Eigen::AngleAxisd(e.roll, Vec3::UnitX()).toRotationMatrix();
  return Rz * Ry * Rx;
}

EulerAngles matrix_to_euler(const Mat3& R) {
  require_rotation(R, "matrix");
  if (std::abs(R(2, 0)) > 1.0 - 1e-9) {
    throw Error(ErrorKind::GimbalLockRegion, "pitch is at +-pi/2; yaw and roll are not separable");
  }
  EulerAngles e;
  e.pitch = std::asin(std::clamp(-R(2, 0), -1.0, 1.0));
  e.roll = wrap_angle(std::atan2(R(2, 1), R(2, 2)));
  e.yaw = wrap_angle(std::atan2(R(1, 0), R(0, 0)));
  return e;
}

double geodesic_distance(const Mat3& R1, const Mat3& R2) {
  require_rotation(R1, "first rotation");
  require_rotation(R2, "second rotation");
  const double c = ((R1.transpose() * R2).trace() - 1.0) / 2.0;
  return std::acos(std::clamp(c, -1.0, 1.0));
}

Mat3 axis_angle(const Vec3& axis, double angle) {
  return Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
}

Mat3 viewing_rotation(const Point3D& center) {
  const double n = center.norm();
  if (!(n > 0.0)) throw Error(ErrorKind::NonPositiveDepth, "viewing ray undefined at the camera center");
  const Vec3 ray = center / n;
  const Vec3 axis = Vec3::UnitZ().cross(ray);
  const double s = axis.norm();
  const double c = ray.z();
  if (s < 1e-15) {
    return c > 0.0 ? Mat3::Identity() : axis_angle(Vec3::UnitX(), std::numbers::pi);
  }
  return axis_angle(axis / s, std::atan2(s, c));
}

Mat3 allocentric_to_egocentric(const Mat3& R_alloc, const Point3D& center) {
  return viewing_rotation(center) * R_alloc;
}

Mat3 egocentric_to_allocentric(const Mat3& R_ego, const Point3D& center) {
  return viewing_rotation(center).transpose() * R_ego;
}

}  // namespace mono3d
