#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "mono3d/error.hpp"
#include "mono3d/rotation.hpp"
#include "oracles.hpp"

using namespace mono3d;

namespace {

constexpr double kPi = std::numbers::pi;

template <typename F>
ErrorKind caught(F&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::IoError;  // sentinel: nothing thrown
}

double max_abs(const Mat3& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST(Rot6D, IdentityInputs) {
  EXPECT_EQ(rot6d_to_matrix({Vec3(1, 0, 0), Vec3(0, 1, 0)}), Mat3::Identity());
  EXPECT_LE(max_abs(rot6d_to_matrix({Vec3(2, 0, 0), Vec3(1, 1, 0)}) - Mat3::Identity()), 1e-15);
}

TEST(Rot6D, Degenerate) {
  EXPECT_EQ(caught([] { rot6d_to_matrix({Vec3(1, 0, 0), Vec3(2, 0, 0)}); }), ErrorKind::DegenerateSixD);
  EXPECT_EQ(caught([] { rot6d_to_matrix({Vec3(1e-9, 0, 0), Vec3(0, 1, 0)}); }), ErrorKind::DegenerateSixD);
}

TEST(Rot6D, RandomInputsGiveRotations) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0, 1);
  for (int i = 0; i < 10000; ++i) {
    const Mat3 R = rot6d_to_matrix({Vec3(n(rng), n(rng), n(rng)), Vec3(n(rng), n(rng), n(rng))});
    EXPECT_LE(max_abs(R.transpose() * R - Mat3::Identity()), 1e-9);
    EXPECT_NEAR(R.determinant(), 1.0, 1e-9);
  }
}

TEST(Rot6D, FirstColumnScaleInvariance) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n(0, 1);
  for (int i = 0; i < 100; ++i) {
    const Vec3 a(n(rng), n(rng), n(rng)), b(n(rng), n(rng), n(rng));
    EXPECT_LE(max_abs(rot6d_to_matrix({a * 3.7, b}) - rot6d_to_matrix({a, b})), 1e-12);
  }
}

TEST(Rot6D, MatrixToRot6DReadsColumns) {
  const Rot6D id = matrix_to_rot6d(Mat3::Identity());
  EXPECT_EQ(id.a, Vec3::UnitX());
  EXPECT_EQ(id.b, Vec3::UnitY());
  // 90 degrees about y: x -> -z, z -> x.
  Mat3 Ry;
  Ry << 0, 0, 1, 0, 1, 0, -1, 0, 0;
  const Rot6D r = matrix_to_rot6d(Ry);
  EXPECT_EQ(r.a, Vec3(0, 0, -1));
  EXPECT_EQ(r.b, Vec3(0, 1, 0));
  EXPECT_EQ(caught([] { matrix_to_rot6d(2.0 * Mat3::Identity()); }), ErrorKind::NotARotation);
  EXPECT_EQ(caught([] { matrix_to_rot6d(Vec3(1, 1, -1).asDiagonal()); }), ErrorKind::NotARotation);
}

TEST(Rot6D, RoundTripRandom) {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 10000; ++i) {
    const Mat3 R = oracle::random_rotation(rng);
    EXPECT_LE(max_abs(rot6d_to_matrix(matrix_to_rot6d(R)) - R), 1e-9);
  }
}

TEST(Rot6D, ContinuityBound) {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> n(0, 1);
  std::uniform_real_distribution<double> ang(1e-6, 0.01);
  for (int i = 0; i < 2000; ++i) {
    const Mat3 R = oracle::random_rotation(rng);
    const Mat3 R2 = R * axis_angle(Vec3(n(rng), n(rng), n(rng)), ang(rng));
    const auto a = matrix_to_rot6d(R).to_array(), b = matrix_to_rot6d(R2).to_array();
    double d = 0;
    for (int k = 0; k < 6; ++k) d = std::max(d, std::abs(a[k] - b[k]));
    EXPECT_LE(d, 2.0 * geodesic_distance(R, R2));
  }
}

TEST(Euler, ZeroIsIdentity) { EXPECT_EQ(euler_to_matrix({0, 0, 0}), Mat3::Identity()); }

TEST(Euler, YawQuarterTurn) {
  Mat3 expected;
  expected << 0, -1, 0, 1, 0, 0, 0, 0, 1;
  EXPECT_LE(max_abs(euler_to_matrix({0, 0, kPi / 2}) - expected), 1e-15);
}

TEST(Euler, RoundTripAwayFromGimbal) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> a(-3.1, 3.1), p(-1.5, 1.5);
  for (int i = 0; i < 1000; ++i) {
    const EulerAngles e{p(rng), a(rng), a(rng)};
    const EulerAngles back = matrix_to_euler(euler_to_matrix(e));
    EXPECT_NEAR(back.pitch, e.pitch, 1e-9);
    EXPECT_NEAR(back.roll, e.roll, 1e-9);
    EXPECT_NEAR(back.yaw, e.yaw, 1e-9);
  }
}

TEST(Euler, GimbalLockFlag) {
  EXPECT_EQ(caught([] { matrix_to_euler(euler_to_matrix({kPi / 2, 0, 0})); }), ErrorKind::GimbalLockRegion);
  EXPECT_EQ(caught([] { matrix_to_euler(euler_to_matrix({-kPi / 2, 0.3, 0.2})); }), ErrorKind::GimbalLockRegion);
}

TEST(Euler, DiscontinuityWitness) {
  const double pitch = kPi / 2 - 1e-4;
  const Mat3 A = euler_to_matrix({pitch, 0.0, 0.0});
  const Mat3 B = euler_to_matrix({pitch, 1.5, 1.5});
  EXPECT_LE(geodesic_distance(A, B), 1e-3);
  const EulerAngles ea = matrix_to_euler(A), eb = matrix_to_euler(B);
  EXPECT_GT(std::max(std::abs(ea.roll - eb.roll), std::abs(ea.yaw - eb.yaw)), 1.0);
}

TEST(Geodesic, Examples) {
  const Mat3 Y = euler_to_matrix({0, 0, kPi / 2});
  EXPECT_NEAR(geodesic_distance(Y, Y), 0.0, 1e-7);
  EXPECT_NEAR(geodesic_distance(Mat3::Identity(), Y), kPi / 2, 1e-12);
  std::mt19937_64 rng(10);
  const Mat3 A = oracle::random_rotation(rng), B = oracle::random_rotation(rng);
  EXPECT_DOUBLE_EQ(geodesic_distance(A, B), geodesic_distance(B, A));
  EXPECT_EQ(caught([&] { geodesic_distance(A, 2 * B); }), ErrorKind::NotARotation);
}

TEST(Frames, AllocentricRoundTrip) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-5, 5), z(1, 40);
  for (int i = 0; i < 500; ++i) {
    const Mat3 R = oracle::random_rotation(rng);
    const Point3D c(u(rng), u(rng), z(rng));
    EXPECT_LE(max_abs(egocentric_to_allocentric(allocentric_to_egocentric(R, c), c) - R), 1e-12);
  }
}

TEST(Frames, ViewingRotationPointsAtCenter) {
  const Point3D c(3, -2, 10);
  const Mat3 V = viewing_rotation(c);
  EXPECT_LE((V * Vec3::UnitZ() - c.normalized()).norm(), 1e-12);
  EXPECT_LE(max_abs(viewing_rotation({0, 0, 5}) - Mat3::Identity()), 1e-15);
}
