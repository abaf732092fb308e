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

#include "modloco/fitness.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "modloco/error.h"

namespace modloco {

void check_fitness_params(const FitnessParams& p) {
  if (!std::isfinite(p.gamma)) throw InputError("gamma must be finite");
  if (!(p.w > 0.0)) throw DomainError("w must be positive");
  if (!(p.epsilon > 0.0)) throw DomainError("epsilon must be positive");
  if (!(p.delta_min > 0.0 && p.delta_min < std::numbers::pi / 2.0))
    throw DomainError("delta_min must lie in (0, pi/2)");
}

double PathMetrics::displacement() const { return std::hypot(p1.x - p0.x, p1.y - p0.y); }

PathMetrics path_metrics(std::span<const Point> path, double direction) {
  if (path.empty()) throw InputError("empty trace");
  PathMetrics m;
  m.p0 = path.front();
  m.p1 = path.back();
  for (std::size_t i = 1; i < path.size(); ++i)
    m.length += std::hypot(path[i].x - path[i - 1].x, path[i].y - path[i - 1].y);
  const double dx = m.p1.x - m.p0.x;
  const double dy = m.p1.y - m.p0.y;
  if (dx == 0.0 && dy == 0.0) {
    m.delta = std::numbers::pi / 2.0;
  } else {
    m.delta = std::abs(std::remainder(std::atan2(dy, dx) - direction, 2.0 * std::numbers::pi));
  }
  // Guard against rounding in the segment sum.
  m.length = std::max(m.length, m.displacement());
  return m;
}

PathMetrics path_metrics(const SimTrace& trace, double gamma) {
  if (trace.rows.empty()) throw InputError("empty trace");
  std::vector<Point> path;
  path.reserve(trace.rows.size());
  for (const auto& r : trace.rows) path.push_back({r.pose.x, r.pose.y});
  return path_metrics(path, trace.rows.front().pose.theta + gamma);
}

double directed_fitness(const PathMetrics& m, const FitnessParams& params) {
  check_fitness_params(params);
  for (double v : {m.p0.x, m.p0.y, m.p1.x, m.p1.y, m.delta, m.length})
    if (std::isnan(v)) throw InputError("NaN in path metrics");
  const double d = m.displacement();
  if (d == 0.0) return 0.0;
  const double delta = std::max(m.delta, params.delta_min);
  const double e1 = d / std::tan(delta);
  const double e2 = d * std::tan(delta);
  const double e3 = d / (m.length + params.epsilon);
  return e3 * (e1 / (delta + 1.0) - params.w * e2);
}

}  // namespace modloco
