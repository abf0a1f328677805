#pragma once

#include <Eigen/Core>

#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "formation/errors.hpp"

namespace formation {

template <typename Scalar>
using Vec2T = Eigen::Matrix<Scalar, 2, 1>;
using Vec2 = Vec2T<double>;

inline constexpr int kNumActions = 8;

/// Index of one of the eight world-frame motion directions j*pi/4.
class ActionIndex {
 public:
  constexpr ActionIndex() = default;
  explicit ActionIndex(int j) : j_(j) {
    if (j < 0 || j >= kNumActions) {
      throw InvalidArgument("action index out of range: " + std::to_string(j));
    }
  }
  constexpr int value() const { return j_; }
  friend constexpr bool operator==(ActionIndex, ActionIndex) = default;

 private:
  int j_ = 0;
};

/// Representative of theta modulo 2*pi in (-pi, pi].
template <typename Scalar>
Scalar wrap_angle(Scalar theta) {
  if (!std::isfinite(theta)) {
    throw InvalidArgument("wrap_angle: non-finite angle");
  }
  constexpr Scalar pi = std::numbers::pi_v<Scalar>;
  constexpr Scalar two_pi = 2 * pi;
  Scalar r = std::remainder(theta, two_pi);  // [-pi, pi]
  if (r <= -pi) r += two_pi;
  return r;
}

template <typename Scalar = double>
Scalar action_angle(ActionIndex a) {
  return static_cast<Scalar>(a.value()) * std::numbers::pi_v<Scalar> / 4;
}

// Exact values at the axis-aligned directions so that scaled velocities do not
// pick up 1e-17 noise in the orthogonal component.
template <typename Scalar = double>
Vec2T<Scalar> action_direction(ActionIndex a) {
  const Scalar h = std::numbers::sqrt2_v<Scalar> / 2;
  static const std::array<Vec2T<Scalar>, kNumActions> dirs = {
      Vec2T<Scalar>(1, 0),  Vec2T<Scalar>(h, h),   Vec2T<Scalar>(0, 1),
      Vec2T<Scalar>(-h, h), Vec2T<Scalar>(-1, 0),  Vec2T<Scalar>(-h, -h),
      Vec2T<Scalar>(0, -1), Vec2T<Scalar>(h, -h)};
  return dirs[static_cast<std::size_t>(a.value())];
}

/// World-frame angle of (to - from). Throws DegenerateBearing for coincident
/// points.
template <typename Scalar>
Scalar bearing(const Vec2T<Scalar>& from, const Vec2T<Scalar>& to) {
  const Vec2T<Scalar> d = to - from;
  if (d.x() == 0 && d.y() == 0) {
    throw DegenerateBearing("bearing between coincident points");
  }
  Scalar b = std::atan2(d.y(), d.x());
  // atan2 returns -pi for (negative x, -0.0 y); fold onto the closed end.
  if (b == -std::numbers::pi_v<Scalar>) b = std::numbers::pi_v<Scalar>;
  return b;
}

/// Smallest absolute difference between two angles, in [0, pi].
template <typename Scalar>
Scalar angular_difference(Scalar a, Scalar b) {
  return std::abs(wrap_angle(a - b));
}

}  // namespace formation
