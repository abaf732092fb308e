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

#include "modloco/optimizer.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <numbers>
#include <numeric>
#include <thread>

#include <json.hpp>

#include "modloco/error.h"
#include "modloco/kmeans.h"

namespace modloco {
namespace {

using SteadyClock = std::chrono::steady_clock;

double seconds_since(SteadyClock::time_point t0) {
  return std::chrono::duration<double>(SteadyClock::now() - t0).count();
}

// Owns the trace of one run: evaluates the objective, stamps records with the
// run clock and attributes the real time spent between evaluations to the
// optimizer.
class Recorder {
 public:
  Recorder(const Objective& objective, const BeaConfig& cfg, Clock& clock,
           OptimizerTrace& trace)
      : objective_(objective), cfg_(cfg), clock_(clock), trace_(trace),
        mark_(SteadyClock::now()) {}

  int count() const { return static_cast<int>(trace_.records.size()); }
  int remaining() const { return cfg_.budget - count(); }
  const Clock& clock() const { return clock_; }

  std::vector<double> evaluate(const std::vector<std::vector<double>>& batch, Stage stage) {
    const double overhead = seconds_since(mark_);
    const int first = count();
    const int n = static_cast<int>(batch.size());
    std::vector<double> values(n);
    std::vector<std::exception_ptr> errors(n);
    auto work = [&](int begin, int stride) {
      for (int i = begin; i < n; i += stride) {
        try {
          values[i] = objective_.fn(batch[i]);
          if (std::isnan(values[i])) throw InputError("objective returned NaN");
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    };
    const int workers = std::clamp(cfg_.workers, 1, std::max(n, 1));
    if (workers == 1) {
      work(0, 1);
    } else {
      std::vector<std::jthread> pool;
      for (int w = 0; w < workers; ++w) pool.emplace_back(work, w, workers);
    }
    for (int i = 0; i < n; ++i) {
      if (errors[i]) {
        try {
          std::rethrow_exception(errors[i]);
        } catch (const std::exception& e) {
          throw ObjectiveError(first + i + 1, e.what());
        }
      }
      clock_.charge(objective_.cost);
      ObjectiveRecord r;
      r.params = batch[i];
      r.value = values[i];
      r.t_wall = clock_.now();
      r.stage = stage;
      r.overhead_s = overhead / n;
      trace_.records.push_back(std::move(r));
    }
    mark_ = SteadyClock::now();
    return values;
  }

  double evaluate_one(const std::vector<double>& x, Stage stage) {
    return evaluate({x}, stage).front();
  }

 private:
  const Objective& objective_;
  const BeaConfig& cfg_;
  Clock& clock_;
  OptimizerTrace& trace_;
  SteadyClock::time_point mark_;
};

std::vector<double> uniform_point(int dim, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> x(dim);
  for (double& v : x) v = u(rng);
  return x;
}

GpModel make_gp(int dim, const BeaConfig& cfg) {
  GpOptions o;
  o.theta = cfg.theta;
  o.sigma2 = cfg.signal_var;
  o.jitter = cfg.jitter;
  o.normalize_y = cfg.normalize_y;
  return GpModel(dim, o);
}

void check_objective(const Objective& objective) {
  if (!objective.fn) throw InputError("objective without function");
  if (objective.dim < 1) throw DomainError("objective dimension must be >= 1");
  if (!(objective.cost >= 0.0)) throw DomainError("objective cost must be >= 0");
}

// Space-filling design followed by GP-UCB proposals until `stop` says so.
template <typename Stop>
void bo_stage(const Objective& objective, const BeaConfig& cfg, std::mt19937_64& rng,
              Recorder& rec, int until, Stop stop) {
  GpModel gp = make_gp(objective.dim, cfg);
  const int n_init = std::min(cfg.n_init, until);
  for (const auto& x : latin_hypercube(n_init, objective.dim, rng)) {
    gp.add(x, rec.evaluate_one(x, Stage::kBO));
  }
  while (rec.count() < until && !stop()) {
    std::vector<double> x = propose_next(gp, cfg, rng);
    gp.add(x, rec.evaluate_one(x, Stage::kBO));
  }
}

void es_stage(EsState state, const BeaConfig& cfg, std::mt19937_64& rng, Recorder& rec) {
  BatchEvaluator eval = [&rec](const std::vector<std::vector<double>>& batch) {
    return rec.evaluate(batch, Stage::kEA);
  };
  while (rec.remaining() > 0) {
    ea_step(state, cfg, std::min(cfg.pop_size, rec.remaining()), rng, eval, rec.clock());
  }
}

double best_value(const std::vector<Individual>& pop) {
  double b = -std::numeric_limits<double>::infinity();
  for (const auto& ind : pop) b = std::max(b, ind.value);
  return b;
}

void append_g(std::string& line, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  line += buf;
}

}  // namespace

const char* to_string(Stage s) { return s == Stage::kBO ? "BO" : "EA"; }

double WallClock::now() const { return seconds_since(start_); }

void check_config(const BeaConfig& cfg, int dim) {
  if (dim < 1) throw DomainError("dimension must be >= 1");
  if (cfg.budget < 1) throw DomainError("budget must be >= 1");
  if (cfg.n_init < 1) throw DomainError("n_init must be >= 1");
  if (cfg.switch_at < 1) throw DomainError("switch_at must be >= 1");
  if (!(cfg.kappa >= 0.0)) throw DomainError("kappa must be >= 0");
  if (cfg.acq_candidates < 1) throw DomainError("acq_candidates must be >= 1");
  if (!(cfg.theta > 0.0) || !(cfg.signal_var > 0.0) || !(cfg.jitter >= 0.0))
    throw DomainError("invalid GP hyperparameters");
  if (cfg.pop_size < 1) throw DomainError("pop_size must be >= 1");
  if (cfg.tournament < 1) throw DomainError("tournament must be >= 1");
  if (!(cfg.mutation_rate >= 0.0 && cfg.mutation_rate <= 1.0))
    throw DomainError("mutation_rate must lie in [0, 1]");
  if (!(cfg.sigma_min > 0.0 && cfg.sigma_min <= cfg.sigma_max))
    throw DomainError("need 0 < sigma_min <= sigma_max");
  if (!(cfg.sigma_init > 0.0)) throw DomainError("sigma_init must be positive");
  if (cfg.gain_window < 1) throw DomainError("gain_window must be >= 1");
  if (!(cfg.sigma_up > 0.0) || !(cfg.sigma_down > 0.0))
    throw DomainError("sigma multipliers must be positive");
  if (cfg.workers < 1) throw DomainError("workers must be >= 1");
}

std::vector<double> OptimizerTrace::best_so_far() const {
  std::vector<double> out;
  out.reserve(records.size());
  double b = -std::numeric_limits<double>::infinity();
  for (const auto& r : records) {
    b = std::max(b, r.value);
    out.push_back(b);
  }
  return out;
}

const ObjectiveRecord& OptimizerTrace::best() const {
  if (records.empty()) throw InputError("empty optimizer trace");
  // First maximum wins.
  return *std::max_element(records.begin(), records.end(),
                           [](const auto& a, const auto& b) { return a.value < b.value; });
}

double OptimizerTrace::total_overhead() const {
  double s = 0.0;
  for (const auto& r : records) s += r.overhead_s;
  return s;
}

std::mt19937_64 make_rng(std::uint64_t seed, Stream stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  return std::mt19937_64(seq);
}

std::vector<std::vector<double>> latin_hypercube(int n, int dim, std::mt19937_64& rng) {
  if (n < 0 || dim < 1) throw DomainError("invalid Latin hypercube size");
  std::vector<std::vector<double>> pts(n, std::vector<double>(dim));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<int> perm(n);
  for (int j = 0; j < dim; ++j) {
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    for (int i = 0; i < n; ++i) pts[i][j] = -1.0 + 2.0 * (perm[i] + u(rng)) / n;
  }
  return pts;
}

std::vector<double> propose_next(const GpModel& model, const BeaConfig& cfg,
                                 std::mt19937_64& rng) {
  const int d = model.dim();
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::MatrixXd cand(d, cfg.acq_candidates);
  for (Eigen::Index c = 0; c < cand.cols(); ++c)
    for (int j = 0; j < d; ++j) cand(j, c) = u(rng);
  Eigen::VectorXd mu, var;
  model.posterior_batch(cand, mu, var);
  Eigen::Index best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (Eigen::Index c = 0; c < cand.cols(); ++c) {
    const double score = mu[c] + cfg.kappa * std::sqrt(var[c]);
    if (score > best_score) {
      best_score = score;
      best = c;
    }
  }
  return {cand.col(best).data(), cand.col(best).data() + d};
}

double gain(std::span<const GainPoint> window) {
  if (window.size() < 2) throw DomainError("gain needs at least two points");
  const double dt = window.back().t - window.front().t;
  if (!(dt > 0.0)) throw DomainError("gain undefined over a zero time span");
  return (window.back().f - window.front().f) / dt;
}

std::vector<ObjectiveRecord> transfer_population(std::span<const ObjectiveRecord> records,
                                                 int k, std::mt19937_64& rng) {
  if (k < 1) throw DomainError("k must be >= 1");
  if (static_cast<int>(records.size()) < 2 * k)
    throw InputError("transfer needs at least 2k records");
  std::vector<int> order(records.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return records[a].value > records[b].value; });
  order.resize(records.size() / 2);

  std::vector<std::vector<double>> pts;
  pts.reserve(order.size());
  for (int i : order) pts.push_back(records[i].params);
  const KMeansResult km = kmeans(pts, k, rng);

  // Ranked order means the first member met in each cluster is its best.
  std::vector<int> pick(k, -1);
  for (std::size_t r = 0; r < order.size(); ++r) {
    int& p = pick[km.assignment[r]];
    if (p < 0) p = static_cast<int>(r);
  }
  std::vector<bool> used(order.size(), false);
  for (int p : pick)
    if (p >= 0) used[p] = true;
  std::size_t next = 0;
  std::vector<ObjectiveRecord> out;
  for (int c = 0; c < k; ++c) {
    int p = pick[c];
    if (p < 0) {
      while (used[next]) ++next;
      p = static_cast<int>(next);
      used[p] = true;
    }
    out.push_back(records[order[p]]);
  }
  return out;
}

EsState init_es(std::vector<Individual> population, const BeaConfig& cfg, double t_now) {
  if (population.empty()) throw InputError("empty ES population");
  EsState s;
  s.population = std::move(population);
  s.sigma = std::clamp(cfg.sigma_init, cfg.sigma_min, cfg.sigma_max);
  s.start = {best_value(s.population), t_now};
  s.window.push_back(s.start);
  return s;
}

void ea_step(EsState& state, const BeaConfig& cfg, int lambda, std::mt19937_64& rng,
             const BatchEvaluator& evaluate, const Clock& clock) {
  auto& pop = state.population;
  const int mu = static_cast<int>(pop.size());
  const int d = static_cast<int>(pop.front().params.size());
  const double tau = 1.0 / std::sqrt(2.0 * d);
  std::uniform_int_distribution<int> any(0, mu - 1);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  auto tournament = [&]() -> const Individual& {
    int best = any(rng);
    for (int i = 1; i < cfg.tournament; ++i) {
      const int c = any(rng);
      if (pop[c].value > pop[best].value) best = c;
    }
    return pop[best];
  };

  std::vector<std::vector<double>> children(lambda);
  std::vector<double> sigma_eff(lambda);
  for (int i = 0; i < lambda; ++i) {
    std::vector<double> child = tournament().params;
    if (cfg.crossover) {
      const auto& other = tournament().params;
      for (int j = 0; j < d; ++j)
        if (u01(rng) < 0.5) child[j] = other[j];
    }
    sigma_eff[i] = state.sigma * std::exp(tau * normal(rng));
    for (int j = 0; j < d; ++j) {
      if (u01(rng) < cfg.mutation_rate)
        child[j] = std::clamp(child[j] + sigma_eff[i] * normal(rng), -1.0, 1.0);
    }
    children[i] = std::move(child);
  }
  const std::vector<double> values = evaluate(children);

  // Parents come first, so they win ties.
  struct Entry {
    double value;
    int offspring;  // -1 for a parent
    int index;
  };
  std::vector<Entry> pool;
  for (int i = 0; i < mu; ++i) pool.push_back({pop[i].value, -1, i});
  for (int i = 0; i < lambda; ++i) pool.push_back({values[i], i, i});
  std::stable_sort(pool.begin(), pool.end(),
                   [](const Entry& a, const Entry& b) { return a.value > b.value; });
  std::vector<Individual> next;
  double log_sigma = 0.0;
  int survivors = 0;
  for (int i = 0; i < mu; ++i) {
    const Entry& e = pool[i];
    if (e.offspring < 0) {
      next.push_back(pop[e.index]);
    } else {
      next.push_back({std::move(children[e.offspring]), e.value});
      log_sigma += std::log(sigma_eff[e.offspring]);
      ++survivors;
    }
  }
  pop = std::move(next);
  if (survivors > 0) state.sigma = std::exp(log_sigma / survivors);

  const GainPoint now{best_value(pop), clock.now()};
  state.window.push_back(now);
  while (static_cast<int>(state.window.size()) > cfg.gain_window + 1) state.window.pop_front();
  if (static_cast<int>(state.window.size()) == cfg.gain_window + 1 &&
      now.t > state.window.front().t && now.t > state.start.t) {
    const std::vector<GainPoint> w(state.window.begin(), state.window.end());
    const double g_window = gain(w);
    const double g_mean = (now.f - state.start.f) / (now.t - state.start.t);
    if (g_window <= cfg.g_low * g_mean) {
      state.sigma *= cfg.sigma_up;
    } else if (g_window > cfg.g_high * g_mean) {
      state.sigma *= cfg.sigma_down;
    }
    // One decision per monitoring period.
    state.window.erase(state.window.begin(), state.window.end() - 1);
  }
  state.sigma = std::clamp(state.sigma, cfg.sigma_min, cfg.sigma_max);
  ++state.generation;
}

OptimizerTrace run_bo(const Objective& objective, const BeaConfig& cfg, Clock* clock) {
  check_objective(objective);
  check_config(cfg, objective.dim);
  VirtualClock virtual_clock;
  OptimizerTrace trace;
  trace.optimizer = "bo";
  Recorder rec(objective, cfg, clock ? *clock : virtual_clock, trace);
  auto rng = make_rng(cfg.seed, Stream::kBO);
  bo_stage(objective, cfg, rng, rec, cfg.budget, [] { return false; });
  return trace;
}

OptimizerTrace run_ea(const Objective& objective, const BeaConfig& cfg, Clock* clock) {
  check_objective(objective);
  check_config(cfg, objective.dim);
  VirtualClock virtual_clock;
  OptimizerTrace trace;
  trace.optimizer = "ea";
  Recorder rec(objective, cfg, clock ? *clock : virtual_clock, trace);
  auto rng = make_rng(cfg.seed, Stream::kEA);
  std::vector<std::vector<double>> init;
  for (int i = 0; i < std::min(cfg.pop_size, cfg.budget); ++i)
    init.push_back(uniform_point(objective.dim, rng));
  const std::vector<double> values = rec.evaluate(init, Stage::kEA);
  std::vector<Individual> pop;
  for (std::size_t i = 0; i < init.size(); ++i) pop.push_back({init[i], values[i]});
  es_stage(init_es(std::move(pop), cfg, rec.clock().now()), cfg, rng, rec);
  return trace;
}

OptimizerTrace run_bea(const Objective& objective, const BeaConfig& cfg, Clock* clock) {
  check_objective(objective);
  check_config(cfg, objective.dim);
  if (!(cfg.n_init < cfg.switch_at && cfg.switch_at <= cfg.budget))
    throw DomainError("BEA needs n_init < switch_at <= budget");
  if (cfg.switch_at < cfg.budget && cfg.switch_at < 2 * cfg.pop_size)
    throw DomainError("switch_at must leave at least 2 * pop_size BO records");
  VirtualClock virtual_clock;
  OptimizerTrace trace;
  trace.optimizer = "bea";
  Recorder rec(objective, cfg, clock ? *clock : virtual_clock, trace);
  auto rng = make_rng(cfg.seed, Stream::kBEA);

  auto adaptive_stop = [&]() {
    if (!cfg.adaptive_switch) return false;
    const int span = cfg.gain_window * cfg.pop_size;
    const int n = rec.count();
    if (n < std::max(cfg.n_init + span, 2 * cfg.pop_size)) return false;
    const auto best = trace.best_so_far();
    const GainPoint w[2] = {{best[n - 1 - span], trace.records[n - 1 - span].t_wall},
                            {best[n - 1], trace.records[n - 1].t_wall}};
    if (!(w[1].t > w[0].t)) return false;
    return gain(w) < cfg.reference_ea_gain;
  };
  bo_stage(objective, cfg, rng, rec, cfg.switch_at, adaptive_stop);
  if (rec.remaining() <= 0) return trace;

  trace.switch_index = rec.count();
  std::vector<Individual> pop;
  for (auto& r : transfer_population(trace.records, cfg.pop_size, rng))
    pop.push_back({std::move(r.params), r.value});
  es_stage(init_es(std::move(pop), cfg, rec.clock().now()), cfg, rng, rec);
  return trace;
}

OptimizerTrace run_optimizer(const std::string& name, const Objective& objective,
                             const BeaConfig& cfg, Clock* clock) {
  if (name == "bo") return run_bo(objective, cfg, clock);
  if (name == "ea") return run_ea(objective, cfg, clock);
  if (name == "bea") return run_bea(objective, cfg, clock);
  throw LookupError("unknown optimizer '" + name + "'");
}

const std::vector<std::string>& benchmark_names() {
  static const std::vector<std::string> names = {"sphere", "rastrigin", "ackley"};
  return names;
}

Objective benchmark(const std::string& name, int dim) {
  if (dim < 1) throw DomainError("benchmark dimension must be >= 1");
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  Objective obj;
  obj.dim = dim;
  obj.cost = 1.0;
  obj.id = nlohmann::json{{"kind", "benchmark"}, {"name", name}, {"dim", dim}}.dump();
  if (name == "sphere") {
    obj.fn = [](std::span<const double> x) {
      double s = 0.0;
      for (double v : x) s += (5.12 * v) * (5.12 * v);
      return -s;
    };
  } else if (name == "rastrigin") {
    obj.fn = [](std::span<const double> x) {
      double s = 10.0 * static_cast<double>(x.size());
      for (double v : x) {
        const double z = 5.12 * v;
        s += z * z - 10.0 * std::cos(kTwoPi * z);
      }
      return -s;
    };
  } else if (name == "ackley") {
    obj.fn = [](std::span<const double> x) {
      const double n = static_cast<double>(x.size());
      double sq = 0.0, cs = 0.0;
      for (double v : x) {
        const double z = 32.768 * v;
        sq += z * z;
        cs += std::cos(kTwoPi * z);
      }
      return -(-20.0 * std::exp(-0.2 * std::sqrt(sq / n)) - std::exp(cs / n) + 20.0 +
               std::numbers::e);
    };
  } else {
    throw LookupError("unknown benchmark '" + name + "'");
  }
  return obj;
}

void write_trace_csv(std::ostream& out, const OptimizerTrace& trace) {
  out << kTraceHeader << "\n";
  const auto best = trace.best_so_far();
  std::string line;
  for (std::size_t i = 0; i < trace.records.size(); ++i) {
    const auto& r = trace.records[i];
    line = std::to_string(i + 1);
    line += ',';
    line += to_string(r.stage);
    line += ',';
    append_g(line, r.value);
    line += ',';
    append_g(line, best[i]);
    line += ',';
    append_g(line, r.t_wall);
    out << line << "\n";
  }
}

void write_trace_csv(const std::filesystem::path& path, const OptimizerTrace& trace) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  write_trace_csv(out, trace);
}

}  // namespace modloco
