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

#ifndef MODLOCO_FITNESS_H_
#define MODLOCO_FITNESS_H_

#include <span>

#include "modloco/sim.h"
#include "modloco/vision.h"

namespace modloco {

struct FitnessParams {
  double gamma = 0.0;        // target direction, rad
  double w = 0.01;           // lateral deviation penalty
  double epsilon = 1e-10;
  double delta_min = 0.01;   // rad
};

void check_fitness_params(const FitnessParams& params);

struct PathMetrics {
  Point p0;
  Point p1;
  double delta = 0.0;  // rad, in [0, pi]
  double length = 0.0;

  double displacement() const;
};

// `direction` is an absolute world angle in radians.
PathMetrics path_metrics(std::span<const Point> path, double direction);

// gamma is measured from the heading of the first pose, so gamma = 0 means
// straight ahead of where the robot started.
PathMetrics path_metrics(const SimTrace& trace, double gamma);

// F = E3 * (E1 / (delta + 1) - w * E2) with delta clamped below at delta_min.
double directed_fitness(const PathMetrics& m, const FitnessParams& params);

}  // namespace modloco

#endif  // MODLOCO_FITNESS_H_
