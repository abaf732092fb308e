// Copyright 2026 The modloco Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "modloco/vision.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "modloco/error.h"

namespace modloco {
namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

}  // namespace

void check_camera(const CameraModel& cam) {
  if (cam.n_cols <= 0) throw DomainError("camera needs a positive column count");
  if (!(cam.beta_deg > 0.0 && cam.beta_deg < 90.0))
    throw DomainError("camera half field of view must lie in (0, 90) degrees");
}

double focal_factor(const CameraModel& cam) {
  check_camera(cam);
  return (cam.n_cols / 2.0) / std::tan(cam.beta_deg * kDeg);
}

double pixel_to_angle(const CameraModel& cam, double x_pixel) {
  check_camera(cam);
  if (!(x_pixel >= 0.0 && x_pixel <= cam.n_cols))
    throw DomainError("pixel column " + std::to_string(x_pixel) +
                      " outside the image");
  const double alpha =
      std::atan((x_pixel - cam.n_cols / 2.0) / focal_factor(cam)) / kDeg;
  return std::clamp(alpha, -cam.beta_deg, cam.beta_deg);
}

double angle_to_pixel(const CameraModel& cam, double alpha_deg) {
  check_camera(cam);
  if (!(std::abs(alpha_deg) <= cam.beta_deg))
    throw DomainError("bearing outside the field of view");
  const double x = cam.n_cols / 2.0 + focal_factor(cam) * std::tan(alpha_deg * kDeg);
  return std::clamp(x, 0.0, static_cast<double>(cam.n_cols));
}

Point heading_vector(double theta) {
  constexpr double kQuarter = std::numbers::pi / 2.0;
  const double k = std::nearbyint(theta / kQuarter);
  const double r = theta - k * kQuarter;
  const double c = std::cos(r), s = std::sin(r);
  switch (((static_cast<long>(k) % 4) + 4) % 4) {
    case 1: return {-s, c};
    case 2: return {-c, -s};
    case 3: return {s, -c};
    default: return {c, s};
  }
}

double bearing_deg(const Point& heading, const Point& delta) {
  if (delta.x == 0.0 && delta.y == 0.0)
    throw DomainError("target coincides with the robot position");
  const double dot = heading.x * delta.x + heading.y * delta.y;
  const double cross = heading.x * delta.y - heading.y * delta.x;
  // Counterclockwise is left, so the sign flips relative to the math angle.
  return -std::atan2(cross, dot) / kDeg;
}

double relative_bearing_deg(const Pose& robot, const Point& target) {
  return bearing_deg(heading_vector(robot.theta),
                     {target.x - robot.x, target.y - robot.y});
}

std::optional<double> simulated_bearing(const Pose& robot, const Point& target,
                                        const CameraModel& cam) {
  const double alpha = relative_bearing_deg(robot, target);
  if (std::abs(alpha) > cam.beta_deg) return std::nullopt;
  return alpha;
}

BearingState bearing_policy(BearingState state, std::optional<double> detection,
                            const CameraModel& cam) {
  if (detection) {
    state.alpha_deg = std::clamp(*detection, -cam.beta_deg, cam.beta_deg);
    state.has_ever_seen = true;
  } else if (!state.has_ever_seen) {
    state.alpha_deg =
        state.search_side == Side::kLeft ? -cam.beta_deg / 2.0 : cam.beta_deg / 2.0;
  }
  return state;
}

}  // namespace modloco
