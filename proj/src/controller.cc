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

#include "modloco/controller.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>

#include "modloco/error.h"

namespace modloco {

namespace {

constexpr std::size_t kMaxSortedTerms = 8;

// Rebalance the shared exponent when activations leave [2^-kShift, 2^kShift].
constexpr int kShift = 400;

}  // namespace

std::vector<double> CpgGenome::flat() const {
  std::vector<double> out(w_out);
  out.insert(out.end(), w_conn.begin(), w_conn.end());
  return out;
}

CpgGenome CpgGenome::from_flat(const CpgTopology& topology,
                               std::span<const double> weights) {
  if (static_cast<int>(weights.size()) != topology.genome_dimension())
    throw GenomeShapeError("genome has " + std::to_string(weights.size()) +
                           " weights, robot '" + topology.robot + "' needs " +
                           std::to_string(topology.genome_dimension()));
  for (double w : weights)
    if (!std::isfinite(w) || w < -1.0 || w > 1.0)
      throw DomainError("genome weight " + std::to_string(w) +
                        " outside [-1, 1]");
  CpgGenome g;
  const auto nj = static_cast<std::size_t>(topology.num_joints());
  g.w_out.assign(weights.begin(), weights.begin() + nj);
  g.w_conn.assign(weights.begin() + nj, weights.end());
  return g;
}

CpgGenome CpgGenome::zeros(const CpgTopology& topology) {
  CpgGenome g;
  g.w_out.assign(topology.num_joints(), 0.0);
  g.w_conn.assign(topology.num_edges(), 0.0);
  return g;
}

double oscillator_output(const OscillatorState& state, double w_out) {
  return std::tanh(w_out * state.x);
}

double steering_factor(double alpha_deg, const SteeringParams& params) {
  const double a = std::abs(alpha_deg);
  if (!(a <= params.beta_deg))
    throw DomainError("bearing " + std::to_string(alpha_deg) +
                      " deg outside the field of view");
  return std::pow((params.beta_deg - a) / params.beta_deg, params.p);
}

double apply_steering(double out, Side side, double alpha_deg,
                      const SteeringParams& params) {
  const double d = steering_factor(alpha_deg, params);
  switch (side) {
    case Side::kLeft:
      return alpha_deg < 0.0 ? d * out : out;
    case Side::kRight:
      return alpha_deg < 0.0 ? out : d * out;
    case Side::kMiddle:
      return out;
  }
  return out;
}

CpgController::CpgController(CpgTopology topology, CpgGenome genome,
                             ControllerOptions options)
    : topology_(std::move(topology)), genome_(std::move(genome)), options_(options) {
  if (static_cast<int>(genome_.w_out.size()) != topology_.num_joints() ||
      static_cast<int>(genome_.w_conn.size()) != topology_.num_edges())
    throw GenomeShapeError(
        "genome shape (" + std::to_string(genome_.w_out.size()) + " + " +
        std::to_string(genome_.w_conn.size()) + ") does not match robot '" +
        topology_.robot + "' (" + std::to_string(topology_.num_joints()) + " + " +
        std::to_string(topology_.num_edges()) + ")");
  const int n = topology_.num_joints();
  sides_ = topology_.sides();
  neighbors_.resize(n);
  for (int e = 0; e < topology_.num_edges(); ++e) {
    const auto& edge = topology_.edges[e];
    neighbors_[edge.a].emplace_back(edge.b, genome_.w_conn[e]);
    neighbors_[edge.b].emplace_back(edge.a, genome_.w_conn[e]);
  }
  x_.assign(n, kInitialX);
  y_.assign(n, kInitialY);
  next_x_.resize(n);
  next_y_.resize(n);
  signals_.assign(n, 0.0);
}

void CpgController::step_network() {
  const int n = num_joints();
  for (int i = 0; i < n; ++i) {
    // Terms are added in sorted order so a body and its mirror image (or a
    // symmetric genome) give bit-identical sums.
    double terms[kMaxSortedTerms];
    double coupling = 0.0;
    const std::size_t k = neighbors_[i].size();
    if (k <= kMaxSortedTerms) {
      for (std::size_t m = 0; m < k; ++m)
        terms[m] = x_[neighbors_[i][m].first] * neighbors_[i][m].second;
      std::sort(terms, terms + k);
      for (std::size_t m = 0; m < k; ++m) coupling += terms[m];
    } else {
      for (const auto& [j, w] : neighbors_[i]) coupling += x_[j] * w;
    }
    next_x_[i] = x_[i] + kWeightYX * y_[i] + coupling;
    next_y_[i] = y_[i] + kWeightXY * x_[i];
  }
  if (options_.renormalize) {
    for (int i = 0; i < n; ++i) {
      const double before = std::hypot(x_[i], y_[i]);
      const double after = std::hypot(next_x_[i], next_y_[i]);
      if (after > 0.0 && std::isfinite(after)) {
        next_x_[i] *= before / after;
        next_y_[i] *= before / after;
      }
    }
  }
  x_.swap(next_x_);
  y_.swap(next_y_);
  ++steps_;
  rebalance();
}

void CpgController::rebalance() {
  double peak = 0.0;
  for (int i = 0; i < num_joints(); ++i)
    peak = std::max({peak, std::abs(x_[i]), std::abs(y_[i])});
  if (peak == 0.0 || !std::isfinite(peak)) return;
  int shift = 0;
  if (peak > std::ldexp(1.0, kShift))
    shift = -kShift;
  else if (peak < std::ldexp(1.0, -kShift))
    shift = kShift;
  if (shift == 0) return;
  for (int i = 0; i < num_joints(); ++i) {
    x_[i] = std::ldexp(x_[i], shift);
    y_[i] = std::ldexp(y_[i], shift);
  }
  scale_exp_ -= shift;
}

OscillatorState CpgController::oscillator(int joint) const {
  return {std::ldexp(x_.at(joint), scale_exp_), std::ldexp(y_.at(joint), scale_exp_)};
}

double CpgController::output(int joint) const {
  const double v = genome_.w_out.at(joint) * x_.at(joint);
  if (v == 0.0) return 0.0;
  return std::tanh(std::ldexp(v, scale_exp_));
}

const std::vector<double>& CpgController::tick(double alpha_deg,
                                               const SteeringParams& params) {
  step_network();
  for (int i = 0; i < num_joints(); ++i) {
    const double out = output(i);
    signals_[i] = options_.steering ? apply_steering(out, sides_[i], alpha_deg, params)
                                    : out;
  }
  return signals_;
}

CpgController init_controller(const CpgTopology& topology, const CpgGenome& genome,
                              ControllerOptions options) {
  return CpgController(topology, genome, options);
}

nlohmann::json genome_to_json(const GenomeFile& g) {
  nlohmann::json j;
  j["robot"] = g.robot;
  j["weights"] = g.weights;
  j["fitness"] = g.fitness ? nlohmann::json(*g.fitness) : nlohmann::json(nullptr);
  j["meta"] = {{"seed", g.meta.seed},
               {"optimizer", g.meta.optimizer},
               {"evaluations", g.meta.evaluations}};
  return j;
}

GenomeFile genome_from_json(const nlohmann::json& j) {
  GenomeFile g;
  try {
    g.robot = j.at("robot").get<std::string>();
    g.weights = j.at("weights").get<std::vector<double>>();
    if (j.contains("fitness") && !j.at("fitness").is_null())
      g.fitness = j.at("fitness").get<double>();
    if (j.contains("meta")) {
      const auto& m = j.at("meta");
      g.meta.seed = m.value("seed", 0L);
      g.meta.optimizer = m.value("optimizer", std::string());
      g.meta.evaluations = m.value("evaluations", 0L);
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("genome file: ") + e.what());
  }
  return g;
}

void save_genome(const std::filesystem::path& path, const GenomeFile& g) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write genome file " + path.string());
  out << std::setprecision(17) << genome_to_json(g).dump(2) << "\n";
}

GenomeFile load_genome(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open genome file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(path.string() + ": " + e.what());
  }
  return genome_from_json(j);
}

}  // namespace modloco
