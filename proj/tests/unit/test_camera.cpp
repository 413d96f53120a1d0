#include <gtest/gtest.h>

#include <random>

#include "mono3d/camera.hpp"
#include "mono3d/error.hpp"
#include "mono3d/rotation.hpp"

using namespace mono3d;

namespace {

CameraIntrinsics cam1000() { return {1000, 1000, 960, 540, 1920, 1080}; }

CameraIntrinsics with_fx_width(double fx, double width) {
  CameraIntrinsics c;
  c.fx = fx;
  c.fy = fx;
  c.width = width;
  c.cx = width / 2;
  c.height = width / 2;
  c.cy = width / 4;
  return c;
}

void expect_kind(ErrorKind kind, const auto& fn) {
  try {
    fn();
    ADD_FAILURE() << "expected " << to_string(kind);
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), kind) << e.what();
  }
}

// Place a point at the same normalized pixel and the same X in the virtual
// camera and solve its depth from u_v = fx_v X / Z_v + width_v / 2.
double virtual_depth_oracle(double Z, const CameraIntrinsics& cam, const VirtualCamera& vc) {
  const double X = 0.37 * Z;
  const double u = cam.fx * X / Z + cam.cx;
  const double u_norm = (u - cam.cx) / cam.width;
  const double u_v_offset = u_norm * vc.width_v;
  return vc.fx_v * X / u_v_offset;
}

}  // namespace

TEST(Project, PrincipalPoint) {
  const Point2D p = project({0, 0, 5}, cam1000());
  EXPECT_DOUBLE_EQ(p.u, 960);
  EXPECT_DOUBLE_EQ(p.v, 540);
}

TEST(Project, OffAxisPoint) {
  const Point2D p = project({1, 0, 5}, cam1000());
  EXPECT_DOUBLE_EQ(p.u, 1160);
  EXPECT_DOUBLE_EQ(p.v, 540);
}

TEST(Project, BehindCameraThrows) {
  expect_kind(ErrorKind::NonPositiveDepth, [] { project({0, 0, -1}, cam1000()); });
  expect_kind(ErrorKind::NonPositiveDepth, [] { project({0, 0, 0}, cam1000()); });
}

TEST(Intrinsics, ValidateRejectsBadValues) {
  CameraIntrinsics c = cam1000();
  c.fx = 0;
  expect_kind(ErrorKind::InvalidIntrinsics, [&] { c.validate(); });
  c = cam1000();
  c.cx = 5000;
  expect_kind(ErrorKind::InvalidIntrinsics, [&] { c.validate(); });
  VirtualCamera vc;
  vc.width_v = -1;
  expect_kind(ErrorKind::InvalidIntrinsics, [&] { vc.validate(); });
}

TEST(VirtualDepth, MatchesGeometricOracle) {
  const VirtualCamera vc;
  EXPECT_NEAR(real_to_virtual_depth(10, with_fx_width(1000, 2000), vc), 10.0, 1e-12);
  EXPECT_NEAR(real_to_virtual_depth(10, with_fx_width(2000, 2000), vc), 5.0, 1e-12);
  EXPECT_NEAR(virtual_depth_oracle(10, with_fx_width(1000, 2000), vc), 10.0, 1e-12);
  EXPECT_NEAR(virtual_depth_oracle(10, with_fx_width(2000, 2000), vc), 5.0, 1e-12);

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> fx(200, 3000), w(300, 4000), z(0.1, 100);
  for (int i = 0; i < 1000; ++i) {
    const auto cam = with_fx_width(fx(rng), w(rng));
    const double Z = z(rng);
    EXPECT_NEAR(real_to_virtual_depth(Z, cam, vc) / virtual_depth_oracle(Z, cam, vc), 1.0, 1e-12);
  }
}

TEST(VirtualDepth, IdenticalCamerasAreIdentity) {
  const VirtualCamera vc;
  const auto cam = with_fx_width(vc.fx_v, vc.width_v);
  EXPECT_DOUBLE_EQ(real_to_virtual_depth(7, cam, vc), 7.0);
  EXPECT_DOUBLE_EQ(virtual_to_real_depth(7, cam, vc), 7.0);
}

TEST(VirtualDepth, InverseExamples) {
  EXPECT_NEAR(virtual_to_real_depth(5, with_fx_width(2000, 2000), {}), 10.0, 1e-12);
  expect_kind(ErrorKind::NonPositiveDepth, [] { virtual_to_real_depth(0, cam1000(), {}); });
  expect_kind(ErrorKind::NonPositiveDepth, [] { real_to_virtual_depth(-1, cam1000(), {}); });
}

TEST(VirtualDepth, RoundTripRandom) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> z(0.1, 100), fx(100, 5000), w(200, 5000);
  VirtualCamera vc;
  for (int i = 0; i < 10000; ++i) {
    const auto cam = with_fx_width(fx(rng), w(rng));
    vc.fx_v = fx(rng);
    vc.width_v = w(rng);
    const double Z = z(rng);
    EXPECT_NEAR(virtual_to_real_depth(real_to_virtual_depth(Z, cam, vc), cam, vc) / Z, 1.0, 1e-12);
  }
}

TEST(VirtualDepth, FocalPairInvariance) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> z(0.1, 50), fx(100, 3000), k(1.1, 4.0);
  for (int i = 0; i < 1000; ++i) {
    const auto a = with_fx_width(fx(rng), 1600);
    auto b = a;
    const double s = k(rng);
    b.fx *= s;
    const double Z = z(rng);
    EXPECT_NEAR(real_to_virtual_depth(Z, a, {}) / real_to_virtual_depth(s * Z, b, {}), 1.0, 1e-12);
  }
}

TEST(HeightDepth, Examples) {
  EXPECT_NEAR(height_depth(1.5, 100, cam1000()), 15.0, 1e-12);
  EXPECT_NEAR(height_depth(1.0, cam1000().fy, cam1000()), 1.0, 1e-12);
  expect_kind(ErrorKind::DegenerateHeight, [] { height_depth(1.0, 0.0, cam1000()); });
  expect_kind(ErrorKind::DegenerateHeight, [] { height_depth(1.0, 1e-7, cam1000()); });
  expect_kind(ErrorKind::DegenerateHeight, [] { height_depth(0.0, 10.0, cam1000()); });
}

TEST(FuseDepth, Examples) {
  EXPECT_DOUBLE_EQ(fuse_depth(4, 6, DepthMode::FusedAverage), 5.0);
  EXPECT_DOUBLE_EQ(fuse_depth(4, -123, DepthMode::VirtualOnly), 4.0);
  EXPECT_DOUBLE_EQ(fuse_depth(3.3, 3.3, DepthMode::FusedAverage), 3.3);
  expect_kind(ErrorKind::NonPositiveDepth, [] { fuse_depth(-1, 2, DepthMode::FusedAverage); });
}

TEST(FuseDepth, LiesBetweenInputs) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> z(0.01, 100);
  for (int i = 0; i < 1000; ++i) {
    const double a = z(rng), b = z(rng);
    const double f = fuse_depth(a, b, DepthMode::FusedAverage);
    EXPECT_GE(f, std::min(a, b));
    EXPECT_LE(f, std::max(a, b));
  }
}

TEST(Backproject, Examples) {
  const Point3D c = backproject_center({960, 540}, 5, cam1000());
  EXPECT_EQ(c, Point3D(0, 0, 5));
  const Point3D d = backproject_center({1160, 540}, 5, cam1000());
  EXPECT_NEAR((d - Point3D(1, 0, 5)).norm(), 0, 1e-12);
  expect_kind(ErrorKind::NonPositiveDepth, [] { backproject_center({0, 0}, 0, cam1000()); });
}

TEST(Backproject, RoundTripRandom) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> z(0.1, 100), xy(-1, 1), fx(200, 3000);
  for (int i = 0; i < 10000; ++i) {
    auto cam = cam1000();
    cam.fx = fx(rng);
    cam.fy = fx(rng);
    const double Z = z(rng);
    const Point3D P(xy(rng) * Z, xy(rng) * Z, Z);
    const Point3D Q = backproject_center(project(P, cam), Z, cam);
    EXPECT_LE((Q - P).norm() / P.norm(), 1e-12);
  }
}

TEST(ReasonCenter, PerfectHeadsRecoverCenterBothModes) {
  const auto cam = cam1000();
  const Point3D P(1.3, -0.4, 12.5);
  const double H = 1.6;
  const Point2D px = project(P, cam);
  RawHeadOutput raw;
  raw.u_norm = px.u / cam.width;
  raw.v_norm = px.v / cam.height;
  raw.d_v = real_to_virtual_depth(P.z(), cam, {});
  raw.H = H;
  const Point3D a = reason_center(raw, cam, {}, DepthMode::VirtualOnly);
  const Point3D b = reason_center(raw, cam, {}, DepthMode::FusedAverage, cam.fy * H / P.z());
  EXPECT_LE((a - P).norm(), 1e-9);
  EXPECT_LE((b - P).norm(), 1e-9);
}

TEST(ReasonCenter, Errors) {
  RawHeadOutput raw;
  raw.d_v = 0;
  expect_kind(ErrorKind::NonPositiveDepth, [&] { reason_center(raw, cam1000(), {}, DepthMode::VirtualOnly); });
  raw.d_v = 3;
  expect_kind(ErrorKind::MissingHeight2D, [&] { reason_center(raw, cam1000(), {}, DepthMode::FusedAverage); });
  expect_kind(ErrorKind::DegenerateHeight,
              [&] { reason_center(raw, cam1000(), {}, DepthMode::FusedAverage, 0.0); });
}

TEST(ReasonCenter, VirtualCameraChoiceCancels) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> f(100, 3000), w(200, 4000), z(0.5, 60), n(0.05, 0.95);
  for (int i = 0; i < 1000; ++i) {
    const auto cam = with_fx_width(f(rng), w(rng));
    const VirtualCamera v1{f(rng), w(rng)}, v2{f(rng), w(rng)};
    const double Z = z(rng);
    RawHeadOutput r1, r2;
    r1.u_norm = r2.u_norm = n(rng);
    r1.v_norm = r2.v_norm = n(rng);
    r1.d_v = real_to_virtual_depth(Z, cam, v1);
    r2.d_v = real_to_virtual_depth(Z, cam, v2);
    const Point3D a = reason_center(r1, cam, v1, DepthMode::VirtualOnly);
    const Point3D b = reason_center(r2, cam, v2, DepthMode::VirtualOnly);
    EXPECT_LE((a - b).norm() / a.norm(), 1e-12);
  }
}
