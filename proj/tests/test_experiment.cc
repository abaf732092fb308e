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

#include <filesystem>
#include <fstream>
#include <sstream>
#include <doctest.h>

#include "modloco/error.h"
#include "modloco/experiment.h"

using namespace modloco;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("modloco_test_" + name);
  fs::remove_all(p);
  return p;
}

ExperimentConfig smoke_config(const fs::path& out) {
  ExperimentConfig cfg;
  cfg.out = out;
  cfg.bea.budget = 40;
  cfg.bea.switch_at = 25;
  cfg.bea.n_init = 10;
  cfg.bea.acq_candidates = 200;
  return cfg;
}

}  // namespace

TEST_CASE("config round trip and precedence") {
  ExperimentConfig cfg;
  cfg.robot = "baby";
  cfg.sim.c_w = 0.7;
  cfg.fitness.w = 0.02;
  cfg.bea.budget = 99;
  cfg.compare.objectives = {"gecko"};
  cfg.server.port = 9001;
  const ExperimentConfig back = config_from_json(config_to_json(cfg));
  CHECK(back.robot == "baby");
  CHECK(back.sim.c_w == 0.7);
  CHECK(back.fitness.w == 0.02);
  CHECK(back.bea.budget == 99);
  CHECK(back.compare.objectives == std::vector<std::string>{"gecko"});
  CHECK(back.server.port == 9001);
  CHECK(config_to_json(back) == config_to_json(cfg));

  const ExperimentConfig partial = config_from_json(nlohmann::json{{"bea", {{"budget", 7}}}});
  CHECK(partial.bea.budget == 7);
  CHECK(partial.bea.switch_at == BeaConfig{}.switch_at);
}

TEST_CASE("config errors name the field") {
  try {
    config_from_json(nlohmann::json{{"sim", {{"c_vv", 1.0}}}});
    FAIL("expected an error");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("config.sim.c_vv") != std::string::npos);
  }
  try {
    config_from_json(nlohmann::json{{"bea", {{"budget", "many"}}}});
    FAIL("expected an error");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("config.bea.budget") != std::string::npos);
  }
  CHECK_THROWS_AS(load_config("/nonexistent/cfg.json"), InputError);
}

TEST_CASE("learning smoke run writes reproducible files") {
  const fs::path out = scratch_dir("learn");
  ExperimentConfig cfg = smoke_config(out);
  cfg.robot = "spider";
  cfg.repeat = 2;
  cfg.jobs = 2;
  const auto a = cmd_learn(cfg, 5);
  REQUIRE(a.size() == 2);
  CHECK(a[0].genome.weights.size() == 18);
  CHECK(a[0].genome_path == out / "spider_s5_genome.json");
  CHECK(fs::exists(out / "spider_s6_trace.csv"));
  const std::string trace = slurp(a[1].trace_path);
  const std::string genome = slurp(a[1].genome_path);

  cfg.jobs = 1;
  cmd_learn(cfg, 5);
  CHECK(slurp(a[1].trace_path) == trace);
  CHECK(slurp(a[1].genome_path) == genome);

  const GenomeFile g = load_genome(a[0].genome_path);
  REQUIRE(g.fitness.has_value());
  CHECK(std::abs(replay_fitness(preset("spider"), g.weights, cfg) - *g.fitness) < 1e-9);
  fs::remove_all(out);
}

TEST_CASE("scenario replays write one file per robot plus the target") {
  const fs::path out = scratch_dir("scenario");
  ExperimentConfig cfg = smoke_config(out);
  const BodyGraph gecko = preset("gecko");
  const std::vector<double> w(13, 0.5);
  cfg.scenario = "moving";
  auto files = cmd_run_scenario(cfg, {{gecko, w}}, 0);
  CHECK(files.size() == 2);
  cfg.scenario = "double_moving";
  files = cmd_run_scenario(cfg, {{gecko, w}, {gecko, w}}, 0);
  REQUIRE(files.size() == 3);
  std::ifstream in(files[0]);
  std::string header;
  std::getline(in, header);
  CHECK(header == "t,x,y,theta,alpha,v,omega,target_x,target_y");
  int rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  CHECK(rows == 601);

  const std::string first = slurp(files[1]);
  cmd_run_scenario(cfg, {{gecko, w}, {gecko, w}}, 0);
  CHECK(slurp(files[1]) == first);

  CHECK_THROWS_AS(cmd_run_scenario(cfg, {{gecko, std::vector<double>(12, 0.0)},
                                         {gecko, w}}, 0),
                  GenomeShapeError);
  fs::remove_all(out);
}

TEST_CASE("comparison report") {
  const fs::path out = scratch_dir("compare");
  ExperimentConfig cfg = smoke_config(out);
  cfg.compare.objectives = {"spider", "sphere"};
  cfg.compare.benchmark_dim = 3;
  cfg.repeat = 1;
  const ComparisonReport r = run_comparison(cfg, 0);
  REQUIRE(r.objectives.size() == 2);
  const auto& spider = r.objectives[0];
  for (const auto& m : spider.methods) CHECK(m.traces[0].records.size() == 40);
  write_comparison(r, out);

  // One seed: the curve is the raw best-so-far trace.
  std::ifstream in(out / "curves_spider.csv");
  std::string line;
  std::getline(in, line);
  CHECK(line.rfind("# objective spider hash " + spider.hash, 0) == 0);
  std::getline(in, line);
  CHECK(line == "eval,switch,bo_mean,bo_lo,bo_hi,ea_mean,ea_lo,ea_hi,bea_mean,bea_lo,bea_hi");
  const auto bsf = spider.method("bea").traces[0].best_so_far();
  int e = 0, switches = 0;
  while (std::getline(in, line)) {
    std::istringstream row(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    REQUIRE(cells.size() == 11);
    switches += cells[1] == "1";
    CHECK(std::stod(cells[8]) == doctest::Approx(bsf[e]).epsilon(1e-8));
    CHECK(cells[9] == cells[8]);
    CHECK(cells[10] == cells[8]);
    if (cells[1] == "1") CHECK(e + 1 == 25);
    ++e;
  }
  CHECK(e == 40);
  CHECK(switches == 1);
  CHECK(fs::exists(out / "ratios.csv"));
  CHECK(fs::exists(out / "timing.txt"));
  fs::remove_all(out);
}

TEST_CASE("objective hash is shared by all methods") {
  ExperimentConfig cfg;
  const Objective a = make_objective("gecko", cfg);
  const Objective b = make_objective("gecko", cfg);
  CHECK(a.id == b.id);
  cfg.sim.c_v = 0.1;
  CHECK(make_objective("gecko", cfg).id != a.id);
  CHECK(make_objective("rastrigin", cfg).dim == 10);
}
