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

#ifndef MODLOCO_SIM_H_
#define MODLOCO_SIM_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "modloco/controller.h"
#include "modloco/morphology.h"
#include "modloco/vision.h"

namespace modloco {

struct SimConfig {
  double dt_ctrl = 0.1;            // s
  double episode_duration = 60.0;  // s
  double c_v = 0.3;                // m/s per unit mean thrust
  double c_w = 1.0;                // rad/s per unit normalized asymmetry
  double alpha_noise_std = 0.0;    // deg
  double capture_radius = 0.05;    // m, reported only
  CameraModel camera;
  double steering_p = 7.0;
  bool steering = true;
  // Keeps the oscillators sinusoidal; the raw recurrence squares them off.
  bool renormalize = true;
  Side search_side = Side::kRight;

  int num_steps() const;
  SteeringParams steering_params() const { return {camera.beta_deg, steering_p}; }
  ControllerOptions controller_options() const { return {renormalize, steering}; }
};

void check_config(const SimConfig& cfg);

struct FixedTarget {
  Point at;
};

struct Waypoint {
  double t = 0.0;
  Point at;
};

// Piecewise-linear path, held constant before the first and after the last
// waypoint.
struct WaypointTarget {
  std::vector<Waypoint> points;
};

// Chase another robot of the same episode, aiming `standoff` metres behind it.
struct FollowRobotTarget {
  int robot = 0;
  double standoff = 0.0;
};

// Position supplied from outside the simulation (e.g. a UI client).
struct ExternalTarget {
  std::string stream_id = "default";
};

using TargetScript =
    std::variant<FixedTarget, WaypointTarget, FollowRobotTarget, ExternalTarget>;

Point waypoint_position(const WaypointTarget& script, double t);

struct RobotSlot {
  Pose initial;
  TargetScript target;
};

struct Scenario {
  std::string name;
  std::vector<RobotSlot> robots;
  // Learning episodes pin the bearing to this value.
  std::optional<double> hold_alpha_deg;
  // A robot this close to its target cannot advance (v = 0) but still turns
  // in place; it walks again once the target has moved away.
  std::optional<double> halt_radius;
  Point external_initial{0.0, 1.0};
};

void check_scenario(const Scenario& scenario);

// fixed_left, fixed_center, fixed_right, moving, double_moving, plus the
// helper scenarios straight (learning) and external (interactive).
Scenario scenario_preset(const std::string& name);
const std::vector<std::string>& scenario_names();

struct TraceRow {
  double t = 0.0;
  Pose pose;
  double alpha_deg = 0.0;
  bool detected = false;
  double v = 0.0;
  double omega = 0.0;
  std::vector<double> signals;
  Point target;
};

struct SimTrace {
  std::vector<TraceRow> rows;
  std::optional<double> capture_time;
};

// Power stroke: max(0, d sig / dt) * |sig_now|.
double joint_thrust(double sig_now, double sig_prev, double dt);

struct Twist {
  double v = 0.0;
  double omega = 0.0;
};

Twist body_twist(std::span<const double> thrusts, std::span<const Side> sides,
                 const SimConfig& cfg);

// Unicycle step: heading first, then translation along the new heading.
Pose step_pose(const Pose& pose, double v, double omega, double dt);

double normalize_angle(double theta);

struct RobotSetup {
  CpgTopology topology;
  CpgGenome genome;
};

// Lockstep simulation of every robot of a scenario. One call to step()
// advances all robots by dt_ctrl.
class World {
 public:
  World(std::vector<RobotSetup> robots, Scenario scenario, SimConfig cfg,
        std::uint64_t seed);

  void step();
  void set_external_target(Point p) { external_ = p; }
  Point external_target() const { return external_; }

  int steps_done() const { return steps_; }
  double time() const { return steps_ * cfg_.dt_ctrl; }
  int num_robots() const { return static_cast<int>(robots_.size()); }
  const TraceRow& latest(int robot) const { return traces_.at(robot).rows.back(); }
  const SimTrace& trace(int robot) const { return traces_.at(robot); }
  std::vector<SimTrace> take_traces() { return std::move(traces_); }
  const SimConfig& config() const { return cfg_; }
  const Scenario& scenario() const { return scenario_; }

  // Recording every row can be switched off for unbounded interactive runs.
  void set_keep_history(bool keep) { keep_history_ = keep; }

 private:
  struct Runtime {
    CpgController controller;
    Pose pose;
    // Heading is integrated as a turn relative to the start heading so that
    // mirrored episodes stay mirror images bit for bit.
    Point start_dir;
    double turned = 0.0;
    Point dir;
    BearingState bearing;
    std::vector<double> prev_signals;
    std::vector<double> thrusts;
    std::vector<Side> sides;
    bool held = false;
    std::mt19937_64 noise;
  };

  Point target_position(int robot, double t) const;
  void sense(int robot, TraceRow& row);
  void record(int robot, TraceRow row);

  SimConfig cfg_;
  Scenario scenario_;
  std::vector<Runtime> robots_;
  std::vector<SimTrace> traces_;
  Point external_;
  int steps_ = 0;
  bool keep_history_ = true;
};

std::vector<SimTrace> run_episode(std::vector<RobotSetup> robots,
                                  const Scenario& scenario, const SimConfig& cfg,
                                  std::uint64_t seed);

// Single-robot convenience; a two-robot scenario reuses the same setup.
SimTrace run_episode(const RobotSetup& robot, const Scenario& scenario,
                     const SimConfig& cfg, std::uint64_t seed);

inline constexpr const char* kTrajectoryHeader =
    "t,x,y,theta,alpha,v,omega,target_x,target_y";

void write_trajectory_csv(std::ostream& out, const SimTrace& trace);
void write_trajectory_csv(const std::filesystem::path& path, const SimTrace& trace);
// Target path as t,x,y.
void write_target_csv(const std::filesystem::path& path, const SimTrace& trace);

}  // namespace modloco

#endif  // MODLOCO_SIM_H_
