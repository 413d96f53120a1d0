#pragma once

#include "mono3d/rotation.hpp"

namespace mono3d {

/// The regression-head quantities that geometric reasoning consumes.
/// `d_v` is depth under the virtual camera, not metric depth.
struct RawHeadOutput {
  double u_norm = 0.5;
  double v_norm = 0.5;
  double d_v = 1.0;
  double L = 1.0;
  double W = 1.0;
  double H = 1.0;
  Rot6D rot6d;

  static constexpr int kNumComponents = 12;

  /// Order: u_norm, v_norm, d_v, L, W, H, a1, a2, a3, b1, b2, b3.
  std::array<double, kNumComponents> to_array() const;
  static RawHeadOutput from_array(const std::array<double, kNumComponents>& v);

  bool satisfies_invariants() const;
};

}  // namespace mono3d
