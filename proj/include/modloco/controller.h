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

#ifndef MODLOCO_CONTROLLER_H_
#define MODLOCO_CONTROLLER_H_

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "modloco/morphology.h"

namespace modloco {

// Fixed intra-oscillator weights: x feeds y with +0.5, y feeds x with -0.5.
inline constexpr double kWeightXY = 0.5;
inline constexpr double kWeightYX = -0.5;
// Initial activation (-sqrt(2)/2, sqrt(2)/2).
inline constexpr double kInitialX = -0.70710678118654752440;
inline constexpr double kInitialY = 0.70710678118654752440;

struct OscillatorState {
  double x = kInitialX;
  double y = kInitialY;
};

// Learnable controller weights: one output weight per joint followed by one
// weight per undirected CPG edge, both in topology order.
struct CpgGenome {
  std::vector<double> w_out;
  std::vector<double> w_conn;

  int dimension() const { return static_cast<int>(w_out.size() + w_conn.size()); }
  std::vector<double> flat() const;

  // Throws GenomeShapeError on a length mismatch and DomainError on weights
  // outside [-1, 1].
  static CpgGenome from_flat(const CpgTopology& topology,
                             std::span<const double> weights);
  static CpgGenome zeros(const CpgTopology& topology);
};

struct SteeringParams {
  double beta_deg = 31.1;  // half field of view
  double p = 7.0;          // penalty exponent
};

// out = tanh(w_out * x)
double oscillator_output(const OscillatorState& state, double w_out);

// d_p(alpha) = ((beta - |alpha|) / beta)^p; DomainError for |alpha| > beta.
double steering_factor(double alpha_deg, const SteeringParams& params);

// Scales `out` on the side the target lies on; middle joints pass through.
double apply_steering(double out, Side side, double alpha_deg,
                      const SteeringParams& params);

struct ControllerOptions {
  // Rescale each oscillator back to its previous norm after every step.
  bool renormalize = false;
  // When false, d_p is forced to 1 and signals are never scaled.
  bool steering = true;
};

// Per-joint sensory oscillators coupled along the CPG edges.
//
// The network recurrence is linear, so the activations are stored with a
// shared power-of-two exponent. Rescaling by powers of two is exact in
// floating point, which keeps the literal (growing) recurrence finite over
// arbitrarily long runs without changing any emitted signal.
class CpgController {
 public:
  CpgController(CpgTopology topology, CpgGenome genome,
                ControllerOptions options = {});

  // One simultaneous update of every oscillator from previous-step values.
  void step_network();

  // Network step followed by output and steering for every joint.
  const std::vector<double>& tick(double alpha_deg, const SteeringParams& params);

  // True activation values; may be +-inf once the state outgrows a double.
  OscillatorState oscillator(int joint) const;
  double output(int joint) const;

  const std::vector<double>& signals() const { return signals_; }
  const CpgTopology& topology() const { return topology_; }
  const CpgGenome& genome() const { return genome_; }
  const ControllerOptions& options() const { return options_; }
  int num_joints() const { return topology_.num_joints(); }
  long steps() const { return steps_; }

 private:
  void rebalance();

  CpgTopology topology_;
  CpgGenome genome_;
  ControllerOptions options_;
  std::vector<Side> sides_;
  std::vector<std::vector<std::pair<int, double>>> neighbors_;
  std::vector<double> x_, y_;
  std::vector<double> next_x_, next_y_;
  int scale_exp_ = 0;
  long steps_ = 0;
  std::vector<double> signals_;
};

CpgController init_controller(const CpgTopology& topology, const CpgGenome& genome,
                              ControllerOptions options = {});

// Genome file: robot name, flat weights, optional fitness and provenance.
struct GenomeMeta {
  long seed = 0;
  std::string optimizer;
  long evaluations = 0;
};

struct GenomeFile {
  std::string robot;
  std::vector<double> weights;
  std::optional<double> fitness;
  GenomeMeta meta;
};

nlohmann::json genome_to_json(const GenomeFile& g);
GenomeFile genome_from_json(const nlohmann::json& j);
void save_genome(const std::filesystem::path& path, const GenomeFile& g);
GenomeFile load_genome(const std::filesystem::path& path);

}  // namespace modloco

#endif  // MODLOCO_CONTROLLER_H_
