#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace mono3d {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Camera-frame coordinates in meters: X right, Y down, Z along the optical axis.
using Point3D = Vec3;

struct Point2D {
  double u = 0.0;
  double v = 0.0;
};

}  // namespace mono3d
