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

#ifndef MODLOCO_EXPERIMENT_H_
#define MODLOCO_EXPERIMENT_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "modloco/controller.h"
#include "modloco/fitness.h"
#include "modloco/morphology.h"
#include "modloco/optimizer.h"
#include "modloco/sim.h"

namespace modloco {

struct CompareSettings {
  // Preset robots, body files, or benchmark names.
  std::vector<std::string> objectives = {"spider", "gecko", "baby", "rastrigin"};
  int benchmark_dim = 10;
  std::vector<std::string> methods = {"bo", "ea", "bea"};
};

struct ServerSettings {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::filesystem::path static_dir;
  std::filesystem::path genome_dir = "data/genomes";
  std::string robot = "gecko";
  std::string scenario = "external";
};

struct ExperimentConfig {
  std::string robot = "spider";
  std::string scenario = "fixed_center";
  std::string optimizer = "bea";
  std::filesystem::path out = "out";
  int repeat = 1;
  int jobs = 1;  // repeats run in parallel
  SimConfig sim;
  FitnessParams fitness;
  BeaConfig bea;
  CompareSettings compare;
  ServerSettings server;
};

// Missing fields keep their defaults; unknown fields are rejected with their
// JSON path.
ExperimentConfig config_from_json(const nlohmann::json& j,
                                  ExperimentConfig base = ExperimentConfig{});
nlohmann::json config_to_json(const ExperimentConfig& cfg);
ExperimentConfig load_config(const std::filesystem::path& path);

nlohmann::json sim_config_to_json(const SimConfig& cfg);

std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t v);

// Directed-locomotion fitness of one straight-gait episode (alpha held at 0).
Objective locomotion_objective(const BodyGraph& body, const SimConfig& sim,
                               const FitnessParams& fitness,
                               const std::string& scenario = "straight");

// A preset robot, body file or benchmark name.
Objective make_objective(const std::string& name, const ExperimentConfig& cfg);

struct LearnResult {
  std::uint64_t seed = 0;
  OptimizerTrace trace;
  GenomeFile genome;
  std::filesystem::path genome_path;
  std::filesystem::path trace_path;
};

// One learning run per seed in [seed, seed + repeat); files are written when
// `write` is set.
std::vector<LearnResult> cmd_learn(const ExperimentConfig& cfg, std::uint64_t seed,
                                   bool write = true);

// Fitness of a genome replayed on the learning episode.
double replay_fitness(const BodyGraph& body, std::span<const double> weights,
                      const ExperimentConfig& cfg);

struct ScenarioRobot {
  BodyGraph body;
  std::vector<double> weights;
};

std::vector<SimTrace> replay_scenario(const std::vector<ScenarioRobot>& robots,
                                      const Scenario& scenario, const SimConfig& sim,
                                      std::uint64_t seed);

// Trajectory CSVs are written as <out>/<scenario>_s<seed>_robot<i>.csv plus
// <scenario>_s<seed>_target.csv; returns the written paths.
std::vector<std::filesystem::path> cmd_run_scenario(const ExperimentConfig& cfg,
                                                    const std::vector<ScenarioRobot>& robots,
                                                    std::uint64_t seed);

struct MethodRuns {
  std::string method;
  std::vector<OptimizerTrace> traces;  // one per seed
  std::vector<double> wall_s;          // real seconds per run
};

struct ObjectiveComparison {
  std::string objective;
  std::string hash;
  std::vector<MethodRuns> methods;

  const MethodRuns& method(const std::string& name) const;
};

struct ComparisonReport {
  std::vector<std::uint64_t> seeds;
  int switch_at = 0;
  std::vector<ObjectiveComparison> objectives;
};

double median(std::vector<double> v);

ComparisonReport run_comparison(const ExperimentConfig& cfg, std::uint64_t seed);

// Writes curves_<objective>.csv, report.csv and ratios.csv (all
// deterministic) plus timing.txt; returns the human-readable table.
std::string write_comparison(const ComparisonReport& report,
                             const std::filesystem::path& out);
std::string format_comparison(const ComparisonReport& report);

}  // namespace modloco

#endif  // MODLOCO_EXPERIMENT_H_
