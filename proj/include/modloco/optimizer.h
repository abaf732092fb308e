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

#ifndef MODLOCO_OPTIMIZER_H_
#define MODLOCO_OPTIMIZER_H_

#include <chrono>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "modloco/gp.h"

namespace modloco {

enum class Stage { kBO, kEA };
const char* to_string(Stage s);

struct ObjectiveRecord {
  std::vector<double> params;
  double value = 0.0;
  double t_wall = 0.0;  // cumulative clock seconds at completion
  Stage stage = Stage::kBO;
  // Real seconds spent in the optimizer (not the objective) to produce this
  // record. Informational only; never written to trace files.
  double overhead_s = 0.0;
};

// Maximized. `cost` is the number of seconds a virtual clock charges per
// evaluation; `id` identifies the objective in reports.
struct Objective {
  std::function<double(std::span<const double>)> fn;
  int dim = 0;
  double cost = 1.0;
  std::string id;
};

class Clock {
 public:
  virtual ~Clock() = default;
  virtual double now() const = 0;
  // Called once after every objective evaluation.
  virtual void charge(double cost) = 0;
};

// Time advances only by objective costs, so traces are reproducible.
class VirtualClock : public Clock {
 public:
  double now() const override { return t_; }
  void charge(double cost) override { t_ += cost; }

 private:
  double t_ = 0.0;
};

class WallClock : public Clock {
 public:
  WallClock() : start_(std::chrono::steady_clock::now()) {}
  double now() const override;
  void charge(double) override {}

 private:
  std::chrono::steady_clock::time_point start_;
};

struct BeaConfig {
  int budget = 1500;
  int switch_at = 300;
  int n_init = 50;
  double kappa = 2.0;
  int acq_candidates = 2000;
  double theta = 0.2;
  double signal_var = 1.0;
  double jitter = 1e-6;
  bool normalize_y = true;
  int pop_size = 10;
  int tournament = 2;
  double mutation_rate = 0.8;
  std::uint64_t seed = 0;

  double sigma_init = 0.1;
  double sigma_min = 1e-3;
  double sigma_max = 0.5;
  int gain_window = 10;     // generations
  double g_low = 0.1;       // fraction of the running-mean gain
  double g_high = 0.5;
  double sigma_up = 1.5;
  double sigma_down = 0.8;
  bool crossover = false;

  // Switch as soon as the BO gain over the last gain_window * pop_size
  // evaluations falls below reference_ea_gain (switch_at stays the latest
  // switch point).
  bool adaptive_switch = false;
  double reference_ea_gain = 0.0;

  int workers = 1;  // parallel EA evaluations
};

void check_config(const BeaConfig& cfg, int dim);

struct OptimizerTrace {
  std::string optimizer;
  std::vector<ObjectiveRecord> records;
  // Index of the first EA record of a BEA run, or -1.
  int switch_index = -1;

  std::vector<double> best_so_far() const;
  const ObjectiveRecord& best() const;
  double total_overhead() const;
};

// Random streams: run_bo, run_ea and run_bea draw from disjoint streams of
// the same seed.
enum class Stream : std::uint64_t { kBO = 1, kEA = 2, kBEA = 3 };
std::mt19937_64 make_rng(std::uint64_t seed, Stream stream);

// Latin hypercube in [-1, 1]^dim, one row per point.
std::vector<std::vector<double>> latin_hypercube(int n, int dim, std::mt19937_64& rng);

// Argmax of mu + kappa * sqrt(var) over acq_candidates uniform points; the
// lowest candidate index wins ties.
std::vector<double> propose_next(const GpModel& model, const BeaConfig& cfg,
                                 std::mt19937_64& rng);

struct GainPoint {
  double f = 0.0;  // best-so-far value
  double t = 0.0;
};

// (f_n - f_1) / (t_n - t_1); throws DomainError on a zero time span.
double gain(std::span<const GainPoint> window);

// Best record of each k-means cluster in the top half of `records`; empty
// clusters are backfilled with the best unused records.
std::vector<ObjectiveRecord> transfer_population(std::span<const ObjectiveRecord> records,
                                                 int k, std::mt19937_64& rng);

struct Individual {
  std::vector<double> params;
  double value = 0.0;
};

struct EsState {
  std::vector<Individual> population;
  double sigma = 0.1;
  std::deque<GainPoint> window;
  GainPoint start;  // best-so-far and time when the ES began
  int generation = 0;
};

EsState init_es(std::vector<Individual> population, const BeaConfig& cfg, double t_now);

// Evaluates a batch of parameter vectors, appending one record each.
using BatchEvaluator =
    std::function<std::vector<double>(const std::vector<std::vector<double>>&)>;

// One (mu + lambda) generation with up to `lambda` offspring.
void ea_step(EsState& state, const BeaConfig& cfg, int lambda, std::mt19937_64& rng,
             const BatchEvaluator& evaluate, const Clock& clock);

OptimizerTrace run_bo(const Objective& objective, const BeaConfig& cfg,
                      Clock* clock = nullptr);
OptimizerTrace run_ea(const Objective& objective, const BeaConfig& cfg,
                      Clock* clock = nullptr);
OptimizerTrace run_bea(const Objective& objective, const BeaConfig& cfg,
                       Clock* clock = nullptr);
OptimizerTrace run_optimizer(const std::string& name, const Objective& objective,
                             const BeaConfig& cfg, Clock* clock = nullptr);

// sphere, rastrigin, ackley on [-1, 1]^dim, negated for maximization.
Objective benchmark(const std::string& name, int dim);
const std::vector<std::string>& benchmark_names();

inline constexpr const char* kTraceHeader = "eval,stage,value,best_so_far,t_wall";
void write_trace_csv(std::ostream& out, const OptimizerTrace& trace);
void write_trace_csv(const std::filesystem::path& path, const OptimizerTrace& trace);

}  // namespace modloco

#endif  // MODLOCO_OPTIMIZER_H_
