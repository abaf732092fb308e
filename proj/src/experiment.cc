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

#include "modloco/experiment.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <numbers>
#include <set>
#include <sstream>
#include <thread>

#include "modloco/error.h"

namespace modloco {
namespace {

using nlohmann::json;

constexpr double kDeg = std::numbers::pi / 180.0;

// Reads fields of one JSON object and remembers which ones were used so
// leftovers can be reported.
class FieldReader {
 public:
  FieldReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw InputError(path_ + ": expected an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    auto it = j_.find(key);
    if (it == j_.end()) return;
    seen_.insert(key);
    try {
      out = it->template get<T>();
    } catch (const json::exception& e) {
      throw InputError(path_ + "." + key + ": " + e.what());
    }
  }

  const json* child(const char* key) {
    auto it = j_.find(key);
    if (it == j_.end()) return nullptr;
    seen_.insert(key);
    return &*it;
  }

  std::string path(const char* key) const { return path_ + "." + key; }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw InputError(path_ + "." + it.key() + ": unknown field");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_sim(const json& j, const std::string& path, SimConfig& s) {
  FieldReader r(j, path);
  r.get("dt_ctrl", s.dt_ctrl);
  r.get("episode_duration", s.episode_duration);
  r.get("c_v", s.c_v);
  r.get("c_w", s.c_w);
  r.get("alpha_noise_std", s.alpha_noise_std);
  r.get("capture_radius", s.capture_radius);
  r.get("n_cols", s.camera.n_cols);
  r.get("beta_deg", s.camera.beta_deg);
  r.get("steering_p", s.steering_p);
  r.get("steering", s.steering);
  r.get("renormalize", s.renormalize);
  std::string side = s.search_side == Side::kLeft ? "left" : "right";
  r.get("search_side", side);
  if (side == "left") {
    s.search_side = Side::kLeft;
  } else if (side == "right") {
    s.search_side = Side::kRight;
  } else {
    throw InputError(r.path("search_side") + ": expected \"left\" or \"right\"");
  }
  r.finish();
  try {
    check_config(s);
  } catch (const Error& e) {
    throw InputError(path + ": " + e.what());
  }
}

void read_fitness(const json& j, const std::string& path, FitnessParams& f) {
  FieldReader r(j, path);
  double gamma_deg = f.gamma / kDeg;
  r.get("gamma_deg", gamma_deg);
  f.gamma = gamma_deg * kDeg;
  r.get("w", f.w);
  r.get("delta_min_rad", f.delta_min);
  r.get("epsilon", f.epsilon);
  r.finish();
  try {
    check_fitness_params(f);
  } catch (const Error& e) {
    throw InputError(path + ": " + e.what());
  }
}

void read_bea(const json& j, const std::string& path, BeaConfig& b) {
  FieldReader r(j, path);
  r.get("budget", b.budget);
  r.get("switch_at", b.switch_at);
  r.get("n_init", b.n_init);
  r.get("kappa", b.kappa);
  r.get("theta", b.theta);
  r.get("signal_var", b.signal_var);
  r.get("jitter", b.jitter);
  r.get("normalize_y", b.normalize_y);
  r.get("acq_candidates", b.acq_candidates);
  r.get("pop_size", b.pop_size);
  r.get("tournament", b.tournament);
  r.get("mutation_rate", b.mutation_rate);
  r.get("seed", b.seed);
  r.get("sigma_init", b.sigma_init);
  r.get("sigma_min", b.sigma_min);
  r.get("sigma_max", b.sigma_max);
  r.get("gain_window", b.gain_window);
  r.get("g_low", b.g_low);
  r.get("g_high", b.g_high);
  r.get("sigma_up", b.sigma_up);
  r.get("sigma_down", b.sigma_down);
  r.get("crossover", b.crossover);
  r.get("adaptive_switch", b.adaptive_switch);
  r.get("reference_ea_gain", b.reference_ea_gain);
  r.get("workers", b.workers);
  r.finish();
  try {
    check_config(b, 1);
  } catch (const Error& e) {
    throw InputError(path + ": " + e.what());
  }
}

template <typename Fn>
void parallel_for(int n, int jobs, Fn fn) {
  jobs = std::clamp(jobs, 1, std::max(n, 1));
  if (jobs == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex mu;
  {
    std::vector<std::jthread> pool;
    for (int w = 0; w < jobs; ++w) {
      pool.emplace_back([&] {
        for (int i = next++; i < n; i = next++) {
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(mu);
            if (!error) error = std::current_exception();
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

std::string fmt(const char* format, double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  return out;
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double pop_std(const std::vector<double>& v) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size()));
}

// Percentages read as "BEA relative to other", above 100 meaning BEA is
// better, also for negated (cost-like) objectives.
double ratio_pct(double bea, double other) {
  if (bea < 0.0 && other < 0.0) return 100.0 * other / bea;
  return 100.0 * bea / other;
}

}  // namespace

ExperimentConfig config_from_json(const json& j, ExperimentConfig cfg) {
  FieldReader r(j, "config");
  r.get("robot", cfg.robot);
  r.get("scenario", cfg.scenario);
  r.get("optimizer", cfg.optimizer);
  std::string out = cfg.out.string();
  r.get("out", out);
  cfg.out = out;
  r.get("repeat", cfg.repeat);
  r.get("jobs", cfg.jobs);
  if (cfg.repeat < 1) throw InputError("config.repeat: must be >= 1");
  if (cfg.jobs < 1) throw InputError("config.jobs: must be >= 1");
  if (const json* s = r.child("sim")) read_sim(*s, "config.sim", cfg.sim);
  if (const json* f = r.child("fitness")) read_fitness(*f, "config.fitness", cfg.fitness);
  if (const json* b = r.child("bea")) read_bea(*b, "config.bea", cfg.bea);
  if (const json* c = r.child("compare")) {
    FieldReader cr(*c, "config.compare");
    cr.get("objectives", cfg.compare.objectives);
    cr.get("benchmark_dim", cfg.compare.benchmark_dim);
    cr.get("methods", cfg.compare.methods);
    cr.finish();
  }
  if (const json* s = r.child("server")) {
    FieldReader sr(*s, "config.server");
    sr.get("host", cfg.server.host);
    sr.get("port", cfg.server.port);
    std::string static_dir = cfg.server.static_dir.string();
    std::string genome_dir = cfg.server.genome_dir.string();
    sr.get("static_dir", static_dir);
    sr.get("genome_dir", genome_dir);
    cfg.server.static_dir = static_dir;
    cfg.server.genome_dir = genome_dir;
    sr.get("robot", cfg.server.robot);
    sr.get("scenario", cfg.server.scenario);
    sr.finish();
  }
  r.finish();
  return cfg;
}

json sim_config_to_json(const SimConfig& s) {
  return json{{"dt_ctrl", s.dt_ctrl},
              {"episode_duration", s.episode_duration},
              {"c_v", s.c_v},
              {"c_w", s.c_w},
              {"alpha_noise_std", s.alpha_noise_std},
              {"capture_radius", s.capture_radius},
              {"n_cols", s.camera.n_cols},
              {"beta_deg", s.camera.beta_deg},
              {"steering_p", s.steering_p},
              {"steering", s.steering},
              {"renormalize", s.renormalize},
              {"search_side", s.search_side == Side::kLeft ? "left" : "right"}};
}

json config_to_json(const ExperimentConfig& cfg) {
  const BeaConfig& b = cfg.bea;
  return json{
      {"robot", cfg.robot},
      {"scenario", cfg.scenario},
      {"optimizer", cfg.optimizer},
      {"out", cfg.out.string()},
      {"repeat", cfg.repeat},
      {"jobs", cfg.jobs},
      {"sim", sim_config_to_json(cfg.sim)},
      {"fitness",
       {{"gamma_deg", cfg.fitness.gamma / kDeg},
        {"w", cfg.fitness.w},
        {"delta_min_rad", cfg.fitness.delta_min},
        {"epsilon", cfg.fitness.epsilon}}},
      {"bea",
       {{"budget", b.budget},           {"switch_at", b.switch_at},
        {"n_init", b.n_init},           {"kappa", b.kappa},
        {"theta", b.theta},             {"signal_var", b.signal_var},
        {"jitter", b.jitter},           {"normalize_y", b.normalize_y},
        {"acq_candidates", b.acq_candidates},
        {"pop_size", b.pop_size},       {"tournament", b.tournament},
        {"mutation_rate", b.mutation_rate},
        {"seed", b.seed},               {"sigma_init", b.sigma_init},
        {"sigma_min", b.sigma_min},     {"sigma_max", b.sigma_max},
        {"gain_window", b.gain_window}, {"g_low", b.g_low},
        {"g_high", b.g_high},           {"sigma_up", b.sigma_up},
        {"sigma_down", b.sigma_down},   {"crossover", b.crossover},
        {"adaptive_switch", b.adaptive_switch},
        {"reference_ea_gain", b.reference_ea_gain},
        {"workers", b.workers}}},
      {"compare",
       {{"objectives", cfg.compare.objectives},
        {"benchmark_dim", cfg.compare.benchmark_dim},
        {"methods", cfg.compare.methods}}},
      {"server",
       {{"host", cfg.server.host},
        {"port", cfg.server.port},
        {"static_dir", cfg.server.static_dir.string()},
        {"genome_dir", cfg.server.genome_dir.string()},
        {"robot", cfg.server.robot},
        {"scenario", cfg.server.scenario}}}};
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw InputError(path.string() + ": " + e.what());
  }
  try {
    return config_from_json(j);
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

Objective locomotion_objective(const BodyGraph& body, const SimConfig& sim,
                               const FitnessParams& fitness, const std::string& scenario) {
  check_config(sim);
  check_fitness_params(fitness);
  auto topology = std::make_shared<const CpgTopology>(cpg_topology(body));
  auto sc = std::make_shared<const Scenario>(scenario_preset(scenario));
  if (sc->robots.size() != 1) throw InputError("learning scenario must have one robot");
  Objective obj;
  obj.dim = topology->genome_dimension();
  obj.cost = sim.episode_duration;
  obj.id = json{{"kind", "locomotion"},
                {"body", body_to_json(body)},
                {"sim", sim_config_to_json(sim)},
                {"fitness",
                 {{"gamma", fitness.gamma},
                  {"w", fitness.w},
                  {"delta_min", fitness.delta_min},
                  {"epsilon", fitness.epsilon}}},
                {"scenario", scenario}}
               .dump();
  obj.fn = [topology, sc, sim, fitness](std::span<const double> x) {
    RobotSetup setup{*topology, CpgGenome::from_flat(*topology, x)};
    const SimTrace trace = run_episode(setup, *sc, sim, 0);
    return directed_fitness(path_metrics(trace, fitness.gamma), fitness);
  };
  return obj;
}

Objective make_objective(const std::string& name, const ExperimentConfig& cfg) {
  const auto& benches = benchmark_names();
  if (std::find(benches.begin(), benches.end(), name) != benches.end())
    return benchmark(name, cfg.compare.benchmark_dim);
  return locomotion_objective(resolve_body(name), cfg.sim, cfg.fitness);
}

double replay_fitness(const BodyGraph& body, std::span<const double> weights,
                      const ExperimentConfig& cfg) {
  return locomotion_objective(body, cfg.sim, cfg.fitness).fn(weights);
}

std::vector<LearnResult> cmd_learn(const ExperimentConfig& cfg, std::uint64_t seed,
                                   bool write) {
  const BodyGraph body = resolve_body(cfg.robot);
  const Objective objective = locomotion_objective(body, cfg.sim, cfg.fitness);
  if (write) std::filesystem::create_directories(cfg.out);
  std::vector<LearnResult> results(cfg.repeat);
  parallel_for(cfg.repeat, cfg.jobs, [&](int i) {
    LearnResult& res = results[i];
    res.seed = seed + static_cast<std::uint64_t>(i);
    BeaConfig bea = cfg.bea;
    bea.seed = res.seed;
    res.trace = run_optimizer(cfg.optimizer, objective, bea);
    const ObjectiveRecord& best = res.trace.best();
    res.genome.robot = body.name;
    res.genome.weights = best.params;
    res.genome.fitness = best.value;
    res.genome.meta = {static_cast<long>(res.seed), cfg.optimizer,
                       static_cast<long>(res.trace.records.size())};
    if (write) {
      const std::string stem = body.name + "_s" + std::to_string(res.seed);
      res.genome_path = cfg.out / (stem + "_genome.json");
      res.trace_path = cfg.out / (stem + "_trace.csv");
      save_genome(res.genome_path, res.genome);
      write_trace_csv(res.trace_path, res.trace);
    }
  });
  return results;
}

std::vector<SimTrace> replay_scenario(const std::vector<ScenarioRobot>& robots,
                                      const Scenario& scenario, const SimConfig& sim,
                                      std::uint64_t seed) {
  std::vector<RobotSetup> setups;
  for (const auto& r : robots) {
    CpgTopology topo = cpg_topology(r.body);
    CpgGenome genome = CpgGenome::from_flat(topo, r.weights);
    setups.push_back({std::move(topo), std::move(genome)});
  }
  return run_episode(std::move(setups), scenario, sim, seed);
}

std::vector<std::filesystem::path> cmd_run_scenario(const ExperimentConfig& cfg,
                                                    const std::vector<ScenarioRobot>& robots,
                                                    std::uint64_t seed) {
  const Scenario scenario = scenario_preset(cfg.scenario);
  std::filesystem::create_directories(cfg.out);
  std::vector<std::filesystem::path> written;
  for (int rep = 0; rep < cfg.repeat; ++rep) {
    const std::uint64_t s = seed + static_cast<std::uint64_t>(rep);
    const auto traces = replay_scenario(robots, scenario, cfg.sim, s);
    const std::string stem = cfg.scenario + "_s" + std::to_string(s);
    for (std::size_t i = 0; i < traces.size(); ++i) {
      written.push_back(cfg.out / (stem + "_robot" + std::to_string(i) + ".csv"));
      write_trajectory_csv(written.back(), traces[i]);
    }
    written.push_back(cfg.out / (stem + "_target.csv"));
    write_target_csv(written.back(), traces.front());
  }
  return written;
}

const MethodRuns& ObjectiveComparison::method(const std::string& name) const {
  for (const auto& m : methods)
    if (m.method == name) return m;
  throw LookupError("method '" + name + "' not in comparison");
}

double median(std::vector<double> v) {
  if (v.empty()) throw InputError("median of nothing");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

ComparisonReport run_comparison(const ExperimentConfig& cfg, std::uint64_t seed) {
  ComparisonReport report;
  report.switch_at = cfg.bea.switch_at;
  for (int i = 0; i < cfg.repeat; ++i) report.seeds.push_back(seed + i);
  for (const auto& name : cfg.compare.objectives) {
    const Objective objective = make_objective(name, cfg);
    ObjectiveComparison oc;
    oc.objective = name;
    oc.hash = hex64(fnv1a64(objective.id));
    for (const auto& method : cfg.compare.methods) {
      MethodRuns runs;
      runs.method = method;
      runs.traces.resize(report.seeds.size());
      runs.wall_s.resize(report.seeds.size());
      parallel_for(static_cast<int>(report.seeds.size()), cfg.jobs, [&](int i) {
        BeaConfig bea = cfg.bea;
        bea.seed = report.seeds[i];
        const auto t0 = std::chrono::steady_clock::now();
        runs.traces[i] = run_optimizer(method, objective, bea);
        runs.wall_s[i] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      });
      oc.methods.push_back(std::move(runs));
    }
    report.objectives.push_back(std::move(oc));
  }
  return report;
}

std::string format_comparison(const ComparisonReport& r) {
  std::ostringstream os;
  os << "seeds: " << r.seeds.size() << "\n";
  for (const auto& oc : r.objectives) {
    os << "\n" << oc.objective << " (objective " << oc.hash << ")\n";
    os << "  method   median best      median wall s   median overhead s\n";
    for (const auto& m : oc.methods) {
      std::vector<double> best, overhead;
      for (const auto& t : m.traces) {
        best.push_back(t.best().value);
        overhead.push_back(t.total_overhead());
      }
      char line[160];
      std::snprintf(line, sizeof line, "  %-6s %14.6g %17.4g %19.4g\n", m.method.c_str(),
                    median(best), median(m.wall_s), median(overhead));
      os << line;
    }
    auto has = [&](const char* n) {
      return std::any_of(oc.methods.begin(), oc.methods.end(),
                         [&](const MethodRuns& m) { return m.method == n; });
    };
    if (!has("bea")) continue;
    auto best_of = [&](const char* n) {
      std::vector<double> v;
      for (const auto& t : oc.method(n).traces) v.push_back(t.best().value);
      return median(v);
    };
    for (const char* other : {"bo", "ea"}) {
      if (!has(other)) continue;
      char line[160];
      std::snprintf(line, sizeof line, "  BEA/%s  fitness %.1f%%  time %.1f%%\n",
                    std::string(other) == "bo" ? "BO" : "EA",
                    ratio_pct(best_of("bea"), best_of(other)),
                    100.0 * median(oc.method("bea").wall_s) / median(oc.method(other).wall_s));
      os << line;
    }
  }
  return os.str();
}

std::string write_comparison(const ComparisonReport& r, const std::filesystem::path& out) {
  std::filesystem::create_directories(out);
  auto report = open_out(out / "report.csv");
  report << "objective,hash,method,seeds,median_best,mean_best,std_best\n";
  auto ratios = open_out(out / "ratios.csv");
  ratios << "objective,hash,bea_over_bo_pct,bea_over_ea_pct\n";
  for (const auto& oc : r.objectives) {
    auto curves = open_out(out / ("curves_" + oc.objective + ".csv"));
    curves << "# objective " << oc.objective << " hash " << oc.hash << " seeds "
           << r.seeds.size() << "\n";
    curves << "eval,switch";
    std::vector<std::vector<std::vector<double>>> bsf;  // method, seed, eval
    std::size_t evals = 0;
    for (const auto& m : oc.methods) {
      curves << "," << m.method << "_mean," << m.method << "_lo," << m.method << "_hi";
      auto& per_seed = bsf.emplace_back();
      for (const auto& t : m.traces) {
        per_seed.push_back(t.best_so_far());
        evals = std::max(evals, per_seed.back().size());
      }
    }
    curves << "\n";
    for (std::size_t e = 0; e < evals; ++e) {
      curves << e + 1 << "," << (static_cast<int>(e + 1) == r.switch_at ? 1 : 0);
      for (const auto& per_seed : bsf) {
        std::vector<double> v;
        for (const auto& s : per_seed) v.push_back(s[std::min(e, s.size() - 1)]);
        const double m = mean(v), sd = pop_std(v);
        curves << "," << fmt("%.9g", m) << "," << fmt("%.9g", m - 2.0 * sd) << ","
               << fmt("%.9g", m + 2.0 * sd);
      }
      curves << "\n";
    }

    std::vector<double> med;
    for (const auto& m : oc.methods) {
      std::vector<double> best;
      for (const auto& t : m.traces) best.push_back(t.best().value);
      med.push_back(median(best));
      report << oc.objective << "," << oc.hash << "," << m.method << "," << best.size()
             << "," << fmt("%.9g", med.back()) << "," << fmt("%.9g", mean(best)) << ","
             << fmt("%.9g", pop_std(best)) << "\n";
    }
    auto med_of = [&](const char* n) -> std::optional<double> {
      for (std::size_t i = 0; i < oc.methods.size(); ++i)
        if (oc.methods[i].method == n) return med[i];
      return std::nullopt;
    };
    const auto bea = med_of("bea"), bo = med_of("bo"), ea = med_of("ea");
    ratios << oc.objective << "," << oc.hash << ","
           << (bea && bo ? fmt("%.4f", ratio_pct(*bea, *bo)) : "") << ","
           << (bea && ea ? fmt("%.4f", ratio_pct(*bea, *ea)) : "") << "\n";
  }
  const std::string table = format_comparison(r);
  open_out(out / "timing.txt") << table;
  return table;
}

}  // namespace modloco
