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

#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <doctest.h>

#include "modloco/error.h"
#include "modloco/sim.h"
#include "modloco/vision.h"

using namespace modloco;

namespace {

constexpr double kPi = std::numbers::pi;

RobotSetup setup(const BodyGraph& body, const std::vector<double>& w) {
  const CpgTopology t = cpg_topology(body);
  return {t, CpgGenome::from_flat(t, w)};
}

std::vector<double> random_weights(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> w(n);
  for (auto& v : w) v = u(rng);
  return w;
}

// Genome of `body` re-indexed for mirror_east_west(body).
std::vector<double> mirrored_weights(const BodyGraph& body, const std::vector<double>& w) {
  const CpgTopology t = cpg_topology(body);
  const CpgTopology m = cpg_topology(mirror_east_west(body));
  std::map<std::string, int> index;
  for (int i = 0; i < m.num_joints(); ++i) index[m.joints[i].id] = i;
  std::vector<double> out(w.size());
  for (int i = 0; i < t.num_joints(); ++i) out[index[t.joints[i].id]] = w[i];
  for (int e = 0; e < t.num_edges(); ++e) {
    int a = index[t.joints[t.edges[e].a].id], b = index[t.joints[t.edges[e].b].id];
    const CpgEdge key{std::min(a, b), std::max(a, b)};
    for (int f = 0; f < m.num_edges(); ++f)
      if (m.edges[f] == key) out[m.num_joints() + f] = w[t.num_joints() + e];
  }
  return out;
}

double mean_abs_alpha(const SimTrace& tr, int quarter) {
  const int n = static_cast<int>(tr.rows.size());
  double s = 0.0;
  int c = 0;
  for (int i = quarter * n / 4; i < (quarter + 1) * n / 4; ++i, ++c)
    s += std::abs(tr.rows[i].alpha_deg);
  return s / c;
}

}  // namespace

TEST_CASE("joint thrust") {
  CHECK(joint_thrust(0.5, 0.25, 0.1) == doctest::Approx(1.25));
  CHECK(joint_thrust(1.0, 0.5, 0.2) == doctest::Approx(2.5));
  CHECK(joint_thrust(0.25, 0.5, 0.1) == 0.0);
  CHECK(joint_thrust(0.3, 0.3, 0.1) == 0.0);
  CHECK_THROWS_AS(joint_thrust(0.3, 0.3, 0.0), DomainError);
}

TEST_CASE("body twist") {
  SimConfig cfg;
  cfg.c_v = 1.0;
  cfg.c_w = 1.0;
  const std::vector<Side> sides{Side::kLeft, Side::kRight, Side::kMiddle};
  const std::vector<double> sym{1.0, 1.0, 2.0};
  CHECK(body_twist(sym, sides, cfg).omega == 0.0);
  CHECK(body_twist(sym, sides, cfg).v == doctest::Approx(4.0 / 3.0));
  const std::vector<double> right_only{0.0, 1.0, 0.0};
  CHECK(body_twist(right_only, sides, cfg).omega == 1.0);
  const std::vector<double> zero{0.0, 0.0, 0.0};
  CHECK(body_twist(zero, sides, cfg).v == 0.0);
  CHECK(body_twist(zero, sides, cfg).omega == 0.0);
}

TEST_CASE("unicycle step") {
  const Pose a = step_pose({0.0, 0.0, 0.0}, 1.0, 0.0, 1.0);
  CHECK(a.x == 1.0);
  CHECK(a.y == 0.0);
  const Pose b = step_pose({0.0, 0.0, 0.0}, 0.0, kPi, 1.0);
  CHECK(b.x == 0.0);
  CHECK(std::abs(b.theta) == doctest::Approx(kPi));
  CHECK(normalize_angle(-kPi) == doctest::Approx(kPi));
  CHECK(normalize_angle(3 * kPi) == doctest::Approx(kPi));
}

TEST_CASE("full circle closes") {
  Pose p{0.0, 0.0, 0.0};
  const double omega = 2 * kPi / 100;
  for (int i = 0; i < 100; ++i) p = step_pose(p, 0.5, omega, 1.0);
  CHECK(std::hypot(p.x, p.y) < 1e-6);
  CHECK(std::abs(normalize_angle(p.theta)) < 1e-9);
}

TEST_CASE("trace layout") {
  const SimConfig cfg;
  const SimTrace tr =
      run_episode(setup(preset("gecko"), random_weights(13, 1)), scenario_preset("straight"),
                  cfg, 0);
  REQUIRE(tr.rows.size() == 601);
  for (std::size_t i = 0; i < tr.rows.size(); ++i) {
    CHECK(tr.rows[i].t == doctest::Approx(0.1 * static_cast<double>(i)));
    CHECK(tr.rows[i].signals.size() == 6);
  }
  CHECK(tr.rows[0].pose.theta == doctest::Approx(kPi / 2));
}

TEST_CASE("zero genome never moves") {
  const BodyGraph body = preset("spider");
  const SimTrace tr = run_episode(setup(body, std::vector<double>(18, 0.0)),
                                  scenario_preset("fixed_left"), SimConfig{}, 0);
  const Pose& last = tr.rows.back().pose;
  CHECK(last.x == 0.0);
  CHECK(last.y == 0.0);
  CHECK(last.theta == doctest::Approx(kPi / 2));
}

TEST_CASE("speed bound") {
  const SimConfig cfg;
  for (const char* name : {"spider", "gecko", "baby"}) {
    const BodyGraph body = preset(name);
    const int d = cpg_topology(body).genome_dimension();
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const SimTrace tr =
          run_episode(setup(body, random_weights(d, seed)), scenario_preset("straight"), cfg, 0);
      for (const auto& row : tr.rows) CHECK(row.v <= cfg.c_v * 2.0 / cfg.dt_ctrl);
    }
  }
}

TEST_CASE("episodes are deterministic") {
  SimConfig cfg;
  cfg.alpha_noise_std = 2.0;
  const RobotSetup r = setup(preset("baby"), random_weights(16, 3));
  const SimTrace a = run_episode(r, scenario_preset("moving"), cfg, 42);
  const SimTrace b = run_episode(r, scenario_preset("moving"), cfg, 42);
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].pose.x == b.rows[i].pose.x);
    CHECK(a.rows[i].pose.y == b.rows[i].pose.y);
    CHECK(a.rows[i].alpha_deg == b.rows[i].alpha_deg);
  }
}

TEST_CASE("mirror symmetry") {
  for (const char* name : {"spider", "gecko", "baby"}) {
    CAPTURE(name);
    const BodyGraph body = preset(name);
    const auto w = random_weights(cpg_topology(body).genome_dimension(), 17);
    const SimTrace a =
        run_episode(setup(body, w), scenario_preset("fixed_left"), SimConfig{}, 0);
    const SimTrace b = run_episode(setup(mirror_east_west(body), mirrored_weights(body, w)),
                                   scenario_preset("fixed_right"), SimConfig{}, 0);
    REQUIRE(a.rows.size() == b.rows.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
      worst = std::max(worst, std::abs(a.rows[i].pose.x + b.rows[i].pose.x));
      worst = std::max(worst, std::abs(a.rows[i].pose.y - b.rows[i].pose.y));
      worst = std::max(worst, std::abs(a.rows[i].alpha_deg + b.rows[i].alpha_deg));
    }
    CHECK(worst < 1e-9);
  }
}

TEST_CASE("disabled steering on a symmetric genome does not turn") {
  SimConfig cfg;
  cfg.steering = false;
  const BodyGraph body = preset("spider");
  std::vector<double> w(18, 0.6);
  const SimTrace tr = run_episode(setup(body, w), scenario_preset("fixed_left"), cfg, 0);
  for (const auto& row : tr.rows) CHECK(std::abs(row.omega) < 1e-12);
}

TEST_CASE("constant-thrust gait turns toward an off-axis target") {
  // Every joint pushes with unit thrust, scaled by the steering law.
  const CpgTopology t = cpg_topology(preset("spider"));
  const auto sides = t.sides();
  const SimConfig cfg;
  for (double bearing : {-20.0, 20.0}) {
    CAPTURE(bearing);
    const double b = bearing * kPi / 180.0;
    const Point target{100.0 * std::sin(b), 100.0 * std::cos(b)};
    Pose pose{0.0, 0.0, kPi / 2};
    BearingState state;
    SimTrace tr;
    std::vector<double> thrusts(sides.size());
    for (int step = 0; step <= cfg.num_steps(); ++step) {
      state = bearing_policy(state, simulated_bearing(pose, target, cfg.camera), cfg.camera);
      TraceRow row;
      row.alpha_deg = state.alpha_deg;
      tr.rows.push_back(row);
      for (std::size_t j = 0; j < sides.size(); ++j)
        thrusts[j] = apply_steering(1.0, sides[j], state.alpha_deg, cfg.steering_params());
      const Twist tw = body_twist(thrusts, sides, cfg);
      pose = step_pose(pose, tw.v, tw.omega, cfg.dt_ctrl);
    }
    CHECK(std::abs(tr.rows.back().alpha_deg) < std::abs(bearing));
    for (int q = 1; q < 4; ++q) CHECK(mean_abs_alpha(tr, q) <= mean_abs_alpha(tr, q - 1) + 1e-9);
  }
}

TEST_CASE("learned-style gait reduces an off-axis bearing") {
  const BodyGraph body = preset("spider");
  std::vector<double> w(18, 0.0);
  for (int i = 0; i < 8; ++i) w[i] = 1.0;
  for (const char* sc : {"fixed_left", "fixed_right"}) {
    CAPTURE(sc);
    const SimTrace tr = run_episode(setup(body, w), scenario_preset(sc), SimConfig{}, 0);
    CHECK(std::abs(tr.rows.back().alpha_deg) < std::abs(tr.rows.front().alpha_deg));
  }
}

TEST_CASE("moving target follows its waypoints") {
  const Scenario s = scenario_preset("moving");
  const auto& script = std::get<WaypointTarget>(s.robots[0].target);
  const Point start = waypoint_position(script, 0.0);
  const Point turn = waypoint_position(script, 20.0);
  const Point end = waypoint_position(script, 60.0);
  CHECK(std::hypot(start.x, start.y - 0.3) < 1e-12);
  CHECK(std::hypot(turn.x - start.x, turn.y - start.y) == doctest::Approx(0.6));
  CHECK(std::hypot(end.x - turn.x, end.y - turn.y) == doctest::Approx(1.2));
}

TEST_CASE("double_moving records both robots") {
  const Scenario s = scenario_preset("double_moving");
  REQUIRE(s.robots.size() == 2);
  const RobotSetup r = setup(preset("gecko"), random_weights(13, 8));
  const auto traces = run_episode(std::vector<RobotSetup>{r, r}, s, SimConfig{}, 0);
  REQUIRE(traces.size() == 2);
  for (std::size_t i = 0; i < traces[1].rows.size(); ++i) {
    CHECK(traces[1].rows[i].target.x == traces[0].rows[i].pose.x);
    CHECK(traces[1].rows[i].target.y == traces[0].rows[i].pose.y);
  }
}

TEST_CASE("config validation") {
  SimConfig cfg;
  cfg.dt_ctrl = 0.0;
  CHECK_THROWS_AS(check_config(cfg), DomainError);
  cfg = SimConfig{};
  cfg.c_w = -1.0;
  CHECK_THROWS_AS(check_config(cfg), DomainError);
  CHECK_THROWS_AS(scenario_preset("nowhere"), LookupError);
  Scenario bad = scenario_preset("moving");
  auto& pts = std::get<WaypointTarget>(bad.robots[0].target).points;
  std::swap(pts[0], pts[1]);
  CHECK_THROWS_AS(check_scenario(bad), InputError);
}
