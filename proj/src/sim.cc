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

#include "modloco/sim.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include "modloco/error.h"

namespace modloco {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDeg = kPi / 180.0;
constexpr double kThrustEpsilon = 1e-9;

// Every preset starts the (first) robot at the origin facing north.
constexpr Pose kStartPose{0.0, 0.0, kPi / 2.0};
constexpr double kHaltRadius = 0.1;

// `u` rotated clockwise by `angle` radians.
Point rotate_cw(const Point& u, double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  return {u.x * c + u.y * s, u.y * c - u.x * s};
}

Point ahead(const Pose& pose, double distance, double bearing_deg) {
  // Positive bearing is clockwise (to the right) of the heading.
  const Point d = rotate_cw(heading_vector(pose.theta), bearing_deg * kDeg);
  return {pose.x + distance * d.x, pose.y + distance * d.y};
}

double distance(const Pose& p, const Point& q) { return std::hypot(q.x - p.x, q.y - p.y); }

void append_number(std::string& line, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  line += buf;
}

// The moving target: 0.30 m ahead, 0.6 m to the right over 20 s, then 1.2 m
// back to the left at the same 0.03 m/s.
WaypointTarget moving_script(const Pose& start) {
  const Point p0 = ahead(start, 0.30, 0.0);
  const Point h = heading_vector(start.theta);
  const double rx = h.y, ry = -h.x;
  WaypointTarget w;
  w.points = {{0.0, p0},
              {20.0, {p0.x + 0.6 * rx, p0.y + 0.6 * ry}},
              {60.0, {p0.x - 0.6 * rx, p0.y - 0.6 * ry}}};
  return w;
}

}  // namespace

int SimConfig::num_steps() const {
  return static_cast<int>(std::llround(episode_duration / dt_ctrl));
}

void check_config(const SimConfig& cfg) {
  if (!(cfg.dt_ctrl > 0.0)) throw DomainError("dt_ctrl must be positive");
  if (!(cfg.episode_duration >= cfg.dt_ctrl))
    throw DomainError("episode_duration must be at least dt_ctrl");
  if (!(cfg.c_v >= 0.0) || !(cfg.c_w >= 0.0))
    throw DomainError("locomotion gains must be non-negative");
  if (!(cfg.alpha_noise_std >= 0.0)) throw DomainError("alpha_noise_std must be >= 0");
  if (!(cfg.steering_p > 0.0)) throw DomainError("steering exponent must be positive");
  check_camera(cfg.camera);
}

Point waypoint_position(const WaypointTarget& script, double t) {
  const auto& pts = script.points;
  if (pts.empty()) throw InputError("waypoint script without points");
  if (t <= pts.front().t) return pts.front().at;
  if (t >= pts.back().t) return pts.back().at;
  auto hi = std::upper_bound(pts.begin(), pts.end(), t,
                             [](double v, const Waypoint& w) { return v < w.t; });
  auto lo = hi - 1;
  const double s = (t - lo->t) / (hi->t - lo->t);
  return {lo->at.x + s * (hi->at.x - lo->at.x), lo->at.y + s * (hi->at.y - lo->at.y)};
}

void check_scenario(const Scenario& scenario) {
  if (scenario.robots.empty()) throw InputError("scenario without robots");
  for (std::size_t i = 0; i < scenario.robots.size(); ++i) {
    const auto& target = scenario.robots[i].target;
    if (const auto* w = std::get_if<WaypointTarget>(&target)) {
      if (w->points.empty()) throw InputError("waypoint script without points");
      for (std::size_t k = 1; k < w->points.size(); ++k)
        if (!(w->points[k].t > w->points[k - 1].t))
          throw InputError("waypoint times must be strictly increasing");
    }
    if (const auto* f = std::get_if<FollowRobotTarget>(&target)) {
      if (f->robot < 0 || f->robot >= static_cast<int>(scenario.robots.size()) ||
          f->robot == static_cast<int>(i))
        throw InputError("follow-robot target refers to an invalid robot");
    }
  }
}

const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names = {
      "fixed_left", "fixed_center", "fixed_right", "moving",
      "double_moving", "straight", "external"};
  return names;
}

Scenario scenario_preset(const std::string& name) {
  Scenario s;
  s.name = name;
  const Pose start = kStartPose;
  if (name == "fixed_left" || name == "fixed_center" || name == "fixed_right") {
    const double bearing = name == "fixed_left" ? -20.0 : name == "fixed_right" ? 20.0 : 0.0;
    s.robots.push_back({start, FixedTarget{ahead(start, 1.0, bearing)}});
    s.halt_radius = kHaltRadius;
  } else if (name == "moving") {
    s.robots.push_back({start, moving_script(start)});
    s.halt_radius = kHaltRadius;
  } else if (name == "double_moving") {
    s.halt_radius = kHaltRadius;
    s.robots.push_back({start, moving_script(start)});
    const Pose behind{start.x, start.y - 0.30, start.theta};
    s.robots.push_back({behind, FollowRobotTarget{0, 0.0}});
  } else if (name == "straight") {
    s.robots.push_back({start, FixedTarget{ahead(start, 100.0, 0.0)}});
    s.hold_alpha_deg = 0.0;
  } else if (name == "external") {
    s.external_initial = ahead(start, 0.5, 0.0);
    s.robots.push_back({start, ExternalTarget{}});
  } else {
    throw LookupError("unknown scenario '" + name + "'");
  }
  return s;
}

double joint_thrust(double sig_now, double sig_prev, double dt) {
  if (!(dt > 0.0)) throw DomainError("dt must be positive");
  return std::max(0.0, (sig_now - sig_prev) / dt) * std::abs(sig_now);
}

Twist body_twist(std::span<const double> thrusts, std::span<const Side> sides,
                 const SimConfig& cfg) {
  if (thrusts.size() != sides.size())
    throw InputError("one thrust per joint required");
  if (thrusts.empty()) return {};
  // Each side is summed in ascending order so mirrored bodies produce
  // bit-identical left and right totals.
  std::vector<double> by_side[3];
  for (std::size_t i = 0; i < thrusts.size(); ++i)
    by_side[static_cast<int>(sides[i])].push_back(thrusts[i]);
  auto total = [](std::vector<double>& v) {
    std::sort(v.begin(), v.end());
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  };
  const double left = total(by_side[static_cast<int>(Side::kLeft)]);
  const double middle = total(by_side[static_cast<int>(Side::kMiddle)]);
  const double right = total(by_side[static_cast<int>(Side::kRight)]);
  Twist tw;
  tw.v = cfg.c_v * (left + right + middle) / static_cast<double>(thrusts.size());
  tw.omega = cfg.c_w * (right - left) / std::max(left + right, kThrustEpsilon);
  return tw;
}

double normalize_angle(double theta) {
  double a = std::remainder(theta, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  return a;
}

Pose step_pose(const Pose& pose, double v, double omega, double dt) {
  if (!(dt > 0.0)) throw DomainError("dt must be positive");
  Pose out;
  out.theta = normalize_angle(pose.theta + omega * dt);
  out.x = pose.x + v * std::cos(out.theta) * dt;
  out.y = pose.y + v * std::sin(out.theta) * dt;
  return out;
}

World::World(std::vector<RobotSetup> robots, Scenario scenario, SimConfig cfg,
             std::uint64_t seed)
    : cfg_(cfg), scenario_(std::move(scenario)), external_(scenario_.external_initial) {
  check_config(cfg_);
  check_scenario(scenario_);
  if (robots.size() != scenario_.robots.size())
    throw InputError("scenario '" + scenario_.name + "' needs " +
                     std::to_string(scenario_.robots.size()) + " robots, got " +
                     std::to_string(robots.size()));
  for (std::size_t i = 0; i < robots.size(); ++i) {
    auto& setup = robots[i];
    const int n = setup.topology.num_joints();
    std::vector<Side> sides = setup.topology.sides();
    std::seed_seq seq{static_cast<std::uint64_t>(seed), static_cast<std::uint64_t>(i)};
    Runtime rt{CpgController(std::move(setup.topology), std::move(setup.genome),
                             cfg_.controller_options()),
               scenario_.robots[i].initial,
               heading_vector(scenario_.robots[i].initial.theta),
               0.0,
               heading_vector(scenario_.robots[i].initial.theta),
               BearingState{0.0, false, cfg_.search_side},
               std::vector<double>(n, 0.0),
               std::vector<double>(n, 0.0),
               std::move(sides),
               false,
               std::mt19937_64(seq)};
    robots_.push_back(std::move(rt));
  }
  traces_.resize(robots_.size());
  for (int i = 0; i < num_robots(); ++i) {
    TraceRow row;
    row.t = 0.0;
    row.pose = robots_[i].pose;
    row.signals.assign(robots_[i].controller.num_joints(), 0.0);
    sense(i, row);
    record(i, std::move(row));
  }
}

Point World::target_position(int robot, double t) const {
  const auto& script = scenario_.robots.at(robot).target;
  if (const auto* f = std::get_if<FixedTarget>(&script)) return f->at;
  if (const auto* w = std::get_if<WaypointTarget>(&script)) return waypoint_position(*w, t);
  if (const auto* f = std::get_if<FollowRobotTarget>(&script)) {
    const Pose& leader = robots_.at(f->robot).pose;
    const Point& d = robots_.at(f->robot).dir;
    return {leader.x - f->standoff * d.x, leader.y - f->standoff * d.y};
  }
  return external_;
}

void World::sense(int robot, TraceRow& row) {
  Runtime& rt = robots_[robot];
  row.target = target_position(robot, row.t);
  if (scenario_.hold_alpha_deg) {
    rt.bearing.alpha_deg = *scenario_.hold_alpha_deg;
    row.alpha_deg = rt.bearing.alpha_deg;
    row.detected = true;
    return;
  }
  std::optional<double> detection;
  if (distance(rt.pose, row.target) > 0.0) {
    const double alpha =
        bearing_deg(rt.dir, {row.target.x - rt.pose.x, row.target.y - rt.pose.y});
    if (std::abs(alpha) <= cfg_.camera.beta_deg) detection = alpha;
  }
  if (detection && cfg_.alpha_noise_std > 0.0) {
    std::normal_distribution<double> noise(0.0, cfg_.alpha_noise_std);
    detection = std::clamp(*detection + noise(rt.noise), -cfg_.camera.beta_deg,
                           cfg_.camera.beta_deg);
  }
  rt.bearing = bearing_policy(rt.bearing, detection, cfg_.camera);
  row.alpha_deg = rt.bearing.alpha_deg;
  row.detected = detection.has_value();
}

void World::record(int robot, TraceRow row) {
  auto& trace = traces_[robot];
  const double d = distance(row.pose, row.target);
  if (!trace.capture_time && d <= cfg_.capture_radius) trace.capture_time = row.t;
  robots_[robot].held = scenario_.halt_radius && d <= *scenario_.halt_radius;
  if (!keep_history_ && !trace.rows.empty()) trace.rows.clear();
  trace.rows.push_back(std::move(row));
}

void World::step() {
  const double dt = cfg_.dt_ctrl;
  const SteeringParams steer = cfg_.steering_params();
  // All robots act on the state at the start of the tick.
  std::vector<Twist> twists(robots_.size());
  for (int i = 0; i < num_robots(); ++i) {
    Runtime& rt = robots_[i];
    const auto& sig = rt.controller.tick(rt.bearing.alpha_deg, steer);
    for (std::size_t j = 0; j < sig.size(); ++j) {
      rt.thrusts[j] = joint_thrust(sig[j], rt.prev_signals[j], dt);
      rt.prev_signals[j] = sig[j];
    }
    twists[i] = body_twist(rt.thrusts, rt.sides, cfg_);
    if (rt.held) twists[i].v = 0.0;
    if (!std::isfinite(twists[i].v) || !std::isfinite(twists[i].omega))
      throw Error("non-finite body twist at t=" + std::to_string(time()));
  }
  ++steps_;
  for (int i = 0; i < num_robots(); ++i) {
    Runtime& rt = robots_[i];
    // Same update as step_pose: turn first, then translate along the new
    // heading.
    rt.turned = normalize_angle(rt.turned + twists[i].omega * dt);
    rt.dir = rotate_cw(rt.start_dir, -rt.turned);
    rt.pose.theta = normalize_angle(scenario_.robots[i].initial.theta + rt.turned);
    rt.pose.x += twists[i].v * rt.dir.x * dt;
    rt.pose.y += twists[i].v * rt.dir.y * dt;
  }
  for (int i = 0; i < num_robots(); ++i) {
    TraceRow row;
    row.t = time();
    row.pose = robots_[i].pose;
    row.v = twists[i].v;
    row.omega = twists[i].omega;
    row.signals = robots_[i].prev_signals;
    sense(i, row);
    record(i, std::move(row));
  }
}

std::vector<SimTrace> run_episode(std::vector<RobotSetup> robots, const Scenario& scenario,
                                  const SimConfig& cfg, std::uint64_t seed) {
  World world(std::move(robots), scenario, cfg, seed);
  const int n = cfg.num_steps();
  for (int k = 0; k < n; ++k) world.step();
  return world.take_traces();
}

SimTrace run_episode(const RobotSetup& robot, const Scenario& scenario,
                     const SimConfig& cfg, std::uint64_t seed) {
  std::vector<RobotSetup> setups(scenario.robots.size(), robot);
  auto traces = run_episode(std::move(setups), scenario, cfg, seed);
  return std::move(traces.front());
}

void write_trajectory_csv(std::ostream& out, const SimTrace& trace) {
  out << kTrajectoryHeader << "\n";
  std::string line;
  for (const auto& r : trace.rows) {
    line.clear();
    for (double v : {r.t, r.pose.x, r.pose.y, r.pose.theta, r.alpha_deg, r.v, r.omega,
                     r.target.x, r.target.y}) {
      if (!line.empty()) line += ',';
      append_number(line, v);
    }
    out << line << "\n";
  }
}

void write_trajectory_csv(const std::filesystem::path& path, const SimTrace& trace) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  write_trajectory_csv(out, trace);
}

void write_target_csv(const std::filesystem::path& path, const SimTrace& trace) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << "t,x,y\n";
  std::string line;
  for (const auto& r : trace.rows) {
    line.clear();
    append_number(line, r.t);
    line += ',';
    append_number(line, r.target.x);
    line += ',';
    append_number(line, r.target.y);
    out << line << "\n";
  }
}

}  // namespace modloco
