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

#ifndef MODLOCO_VISION_H_
#define MODLOCO_VISION_H_

#include <optional>

#include "modloco/morphology.h"

namespace modloco {

// Planar robot pose: metres, heading in radians counterclockwise from +x.
struct Pose {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
};

struct Point {
  double x = 0.0;
  double y = 0.0;
};

// Pinhole camera: pixel columns and half field of view.
struct CameraModel {
  int n_cols = 3280;
  double beta_deg = 31.1;
};

void check_camera(const CameraModel& cam);

// F = (N_c / 2) / tan(beta), in pixels.
double focal_factor(const CameraModel& cam);

// Bearing of an image column in degrees, negative left of the optical centre.
double pixel_to_angle(const CameraModel& cam, double x_pixel);

// Inverse of pixel_to_angle.
double angle_to_pixel(const CameraModel& cam, double alpha_deg);

// Signed angle from the robot heading to the target in degrees (negative
// when the target is on the left), or nullopt when outside +-beta.
std::optional<double> simulated_bearing(const Pose& robot, const Point& target,
                                        const CameraModel& cam);

// Unclipped signed bearing in (-180, 180] degrees.
double relative_bearing_deg(const Pose& robot, const Point& target);

// (cos theta, sin theta), exact at multiples of a quarter turn.
Point heading_vector(double theta);

// Signed angle in degrees from unit `heading` to `delta`, positive to the
// right. Odd under reflection of both vectors.
double bearing_deg(const Point& heading, const Point& delta);

struct BearingState {
  double alpha_deg = 0.0;
  bool has_ever_seen = false;
  Side search_side = Side::kRight;
};

// Detection passes through; before the first sighting the robot searches
// with +-beta/2; afterwards a lost target keeps the last bearing.
BearingState bearing_policy(BearingState state, std::optional<double> detection,
                            const CameraModel& cam);

}  // namespace modloco

#endif  // MODLOCO_VISION_H_
