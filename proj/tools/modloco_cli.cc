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

// modloco: learning runs, scenario replays, optimizer comparisons and the
// live state server.

#include <csignal>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "modloco/error.h"
#include "modloco/experiment.h"
#include "modloco/server.h"

namespace fs = std::filesystem;
using namespace modloco;

namespace {

struct Flags {
  std::string config;
  std::uint64_t seed = 1;
  std::string out, robot, scenario, optimizer;
  std::optional<int> repeat, jobs, budget, port;
  std::string genome, robot_b, genome_b, static_dir, genome_dir;
};

// Defaults, then the config file, then explicit flags.
ExperimentConfig resolve(const Flags& f) {
  ExperimentConfig cfg;
  if (!f.config.empty()) cfg = load_config(f.config);
  if (!f.out.empty()) cfg.out = f.out;
  if (!f.robot.empty()) cfg.robot = f.robot;
  if (!f.scenario.empty()) cfg.scenario = f.scenario;
  if (!f.optimizer.empty()) cfg.optimizer = f.optimizer;
  if (f.repeat) cfg.repeat = *f.repeat;
  if (f.jobs) cfg.jobs = *f.jobs;
  if (f.budget) cfg.bea.budget = *f.budget;
  if (f.port) cfg.server.port = *f.port;
  if (!f.static_dir.empty()) cfg.server.static_dir = f.static_dir;
  if (!f.genome_dir.empty()) cfg.server.genome_dir = f.genome_dir;
  if (cfg.repeat < 1) throw InputError("repeat must be at least 1");
  if (cfg.jobs < 1) throw InputError("jobs must be at least 1");
  return cfg;
}

ScenarioRobot scenario_robot(const std::string& robot, std::string genome,
                             const ExperimentConfig& cfg) {
  ScenarioRobot r{resolve_body(robot), {}};
  if (genome.empty()) genome = (cfg.server.genome_dir / (r.body.name + ".json")).string();
  const GenomeFile g = load_genome(genome);
  const int dim = cpg_topology(r.body).genome_dimension();
  if (static_cast<int>(g.weights.size()) != dim)
    throw GenomeShapeError(genome + ": " + std::to_string(g.weights.size()) +
                           " weights, robot '" + r.body.name + "' needs " + std::to_string(dim));
  r.weights = g.weights;
  return r;
}

int learn(const Flags& f) {
  const ExperimentConfig cfg = resolve(f);
  for (const auto& r : cmd_learn(cfg, f.seed)) {
    std::cout << "seed " << r.seed << "  best " << *r.genome.fitness << "  "
              << r.genome_path.string() << "  " << r.trace_path.string() << "\n";
  }
  return 0;
}

int run_scenario(const Flags& f) {
  const ExperimentConfig cfg = resolve(f);
  const Scenario scenario = scenario_preset(cfg.scenario);
  std::vector<ScenarioRobot> robots{scenario_robot(cfg.robot, f.genome, cfg)};
  if (scenario.robots.size() > 1) {
    if (f.robot_b.empty() && f.genome_b.empty())
      robots.push_back(robots.front());
    else
      robots.push_back(scenario_robot(f.robot_b.empty() ? cfg.robot : f.robot_b,
                                      !f.genome_b.empty() ? f.genome_b
                                      : f.robot_b.empty() ? f.genome
                                                          : std::string(),
                                      cfg));
  }
  for (const auto& p : cmd_run_scenario(cfg, robots, f.seed)) std::cout << p.string() << "\n";
  return 0;
}

int compare(const Flags& f) {
  const ExperimentConfig cfg = resolve(f);
  const ComparisonReport report = run_comparison(cfg, f.seed);
  std::cout << write_comparison(report, cfg.out);
  return 0;
}

int serve(const Flags& f) {
  ExperimentConfig cfg = resolve(f);
  if (!f.robot.empty()) cfg.server.robot = f.robot;
  if (!f.scenario.empty()) cfg.server.scenario = f.scenario;

  // Signals go to sigwait below, not to the server threads.
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);

  Server server(cfg.server, cfg.sim);
  const unsigned short port = server.start();
  std::cout << "serving on http://" << cfg.server.host << ":" << port << "/  (ws at /ws)"
            << std::endl;
  int sig = 0;
  sigwait(&set, &sig);
  server.stop();
  return 0;
}

int inspect(const Flags& f) {
  const BodyGraph body = resolve_body(f.robot.empty() ? resolve(f).robot : f.robot);
  const CpgTopology topo = cpg_topology(body);
  nlohmann::json joints = nlohmann::json::array();
  for (const auto& j : topo.joints)
    joints.push_back({{"id", j.id},
                      {"east", j.coord.east},
                      {"north", j.coord.north},
                      {"side", std::string(to_string(j.side))}});
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& e : topo.edges)
    edges.push_back({topo.joints[e.a].id, topo.joints[e.b].id});
  const nlohmann::json out{{"robot", body.name},
                           {"modules", body.modules.size()},
                           {"joints", joints},
                           {"edges", edges},
                           {"genome_dimension", topo.genome_dimension()}};
  std::cout << out.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Targeted locomotion for modular robots"};
  app.set_version_flag("--version", version());
  app.require_subcommand(1);
  Flags f;

  auto common = [&f](CLI::App* sub) {
    sub->add_option("--config", f.config, "Experiment JSON; flags override its fields")
        ->check(CLI::ExistingFile);
    sub->add_option("--seed", f.seed, "First seed");
    sub->add_option("--out", f.out, "Output directory");
    sub->add_option("--robot", f.robot, "Preset name or body JSON file");
  };

  CLI::App* learn_cmd = app.add_subcommand("learn", "Learn a straight gait");
  common(learn_cmd);
  learn_cmd->add_option("--repeat", f.repeat, "Runs with seeds seed..seed+repeat-1");
  learn_cmd->add_option("--jobs", f.jobs, "Parallel runs");
  learn_cmd->add_option("--budget", f.budget, "Evaluations per run");
  learn_cmd->add_option("--optimizer", f.optimizer, "bea, bo or ea");

  CLI::App* run_cmd = app.add_subcommand("run-scenario", "Replay a genome with steering");
  common(run_cmd);
  run_cmd->add_option("--scenario", f.scenario, "Scenario preset");
  run_cmd->add_option("--genome", f.genome, "Genome JSON (default <genome_dir>/<robot>.json)");
  run_cmd->add_option("--repeat", f.repeat, "Replays with seeds seed..seed+repeat-1");
  run_cmd->add_option("--robot-b", f.robot_b, "Second robot for two-robot scenarios");
  run_cmd->add_option("--genome-b", f.genome_b, "Genome of the second robot");
  run_cmd->add_option("--genome-dir", f.genome_dir, "Directory of default genomes");

  CLI::App* compare_cmd = app.add_subcommand("compare", "Compare BO, EA and BEA");
  common(compare_cmd);
  compare_cmd->add_option("--repeat", f.repeat, "Seeds per method");
  compare_cmd->add_option("--jobs", f.jobs, "Parallel runs");
  compare_cmd->add_option("--budget", f.budget, "Evaluations per run");

  CLI::App* serve_cmd = app.add_subcommand("serve", "Run the live state server");
  common(serve_cmd);
  serve_cmd->add_option("--scenario", f.scenario, "Initial scenario");
  serve_cmd->add_option("--port", f.port, "TCP port (0 picks one)");
  serve_cmd->add_option("--static-dir", f.static_dir, "UI bundle directory");
  serve_cmd->add_option("--genome-dir", f.genome_dir, "Directory of default genomes");

  CLI::App* inspect_cmd = app.add_subcommand("inspect-robot", "Print joints, sides and CPG edges");
  common(inspect_cmd);

  CLI11_PARSE(app, argc, argv);
  try {
    if (learn_cmd->parsed()) return learn(f);
    if (run_cmd->parsed()) return run_scenario(f);
    if (compare_cmd->parsed()) return compare(f);
    if (serve_cmd->parsed()) return serve(f);
    if (inspect_cmd->parsed()) return inspect(f);
  } catch (const std::exception& e) {
    std::cerr << "modloco: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
