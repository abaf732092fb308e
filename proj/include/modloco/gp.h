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

#ifndef MODLOCO_GP_H_
#define MODLOCO_GP_H_

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace modloco {

// sigma2 * (1 + sqrt(5) r / theta + 5 r^2 / (3 theta^2)) * exp(-sqrt(5) r / theta)
double matern52(double r, double theta, double sigma2 = 1.0);

struct GpOptions {
  double theta = 0.2;
  double sigma2 = 1.0;
  double jitter = 1e-6;
  double max_jitter = 1e-2;
  // Zero-mean GP on standardized targets (data mean, data std).
  bool normalize_y = true;
};

struct Posterior {
  double mu = 0.0;
  double var = 0.0;
};

// Exact GP regression with a Cholesky factor that is extended one row per
// observation, O(n^2) per added point.
class GpModel {
 public:
  explicit GpModel(int dim, GpOptions options = {});

  void add(std::span<const double> x, double y);
  void clear();

  int dim() const { return dim_; }
  int size() const { return n_; }
  const GpOptions& options() const { return options_; }
  double jitter() const { return jitter_; }

  Posterior posterior(std::span<const double> x) const;
  // Columns of `points` are query locations.
  void posterior_batch(const Eigen::MatrixXd& points, Eigen::VectorXd& mu,
                       Eigen::VectorXd& var) const;

 private:
  void reserve(int n);
  void refactor();
  void update_alpha();
  double kernel(const double* a, const double* b) const;

  int dim_;
  GpOptions options_;
  double jitter_;
  int n_ = 0;
  Eigen::MatrixXd x_;  // dim x n
  Eigen::MatrixXd l_;  // n x n, lower triangle in use
  std::vector<double> y_;
  Eigen::VectorXd alpha_;
  double y_mean_ = 0.0;
  double y_scale_ = 1.0;
};

}  // namespace modloco

#endif  // MODLOCO_GP_H_
