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

#include "modloco/gp.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "modloco/error.h"

namespace modloco {
namespace {

const double kSqrt5 = std::sqrt(5.0);

// Pairwise Matern 5/2 between the columns of a (d x n) and b (d x m).
Eigen::MatrixXd cross_kernel(const Eigen::Ref<const Eigen::MatrixXd>& a,
                             const Eigen::Ref<const Eigen::MatrixXd>& b, double theta,
                             double sigma2) {
  Eigen::MatrixXd k(a.cols(), b.cols());
  k.noalias() = -2.0 * a.transpose() * b;
  const Eigen::ArrayXd an = a.colwise().squaredNorm().transpose().array();
  const Eigen::RowVectorXd bn = b.colwise().squaredNorm();
  const double scale = kSqrt5 / theta;
  Eigen::ArrayXd s(a.cols());
  for (Eigen::Index j = 0; j < k.cols(); ++j) {
    auto col = k.col(j).array();
    s = scale * (col + an + bn[j]).max(0.0).sqrt();
    col = sigma2 * (1.0 + s + s.square() / 3.0) * (-s).exp();
  }
  return k;
}

}  // namespace

double matern52(double r, double theta, double sigma2) {
  const double s = kSqrt5 * r / theta;
  return sigma2 * (1.0 + s + s * s / 3.0) * std::exp(-s);
}

GpModel::GpModel(int dim, GpOptions options)
    : dim_(dim), options_(options), jitter_(options.jitter) {
  if (dim < 1) throw DomainError("GP dimension must be >= 1");
  if (!(options.theta > 0.0) || !(options.sigma2 > 0.0) || !(options.jitter >= 0.0))
    throw DomainError("invalid GP hyperparameters");
}

void GpModel::clear() {
  n_ = 0;
  y_.clear();
  jitter_ = options_.jitter;
  alpha_.resize(0);
  y_mean_ = 0.0;
  y_scale_ = 1.0;
}

void GpModel::reserve(int n) {
  if (n <= x_.cols()) return;
  x_.conservativeResize(dim_, n);
  l_.conservativeResize(n, n);
  l_.rightCols(n - n_).setZero();
}

double GpModel::kernel(const double* a, const double* b) const {
  double r2 = 0.0;
  for (int i = 0; i < dim_; ++i) r2 += (a[i] - b[i]) * (a[i] - b[i]);
  return matern52(std::sqrt(r2), options_.theta, options_.sigma2);
}

void GpModel::add(std::span<const double> x, double y) {
  if (static_cast<int>(x.size()) != dim_) throw InputError("GP input has wrong dimension");
  if (!std::isfinite(y)) throw InputError("GP target must be finite");
  reserve(n_ + 1);
  std::copy(x.begin(), x.end(), x_.col(n_).data());
  y_.push_back(y);

  Eigen::VectorXd k(n_);
  for (int i = 0; i < n_; ++i) k[i] = kernel(x_.col(i).data(), x.data());
  Eigen::VectorXd l = k;
  if (n_ > 0) l_.topLeftCorner(n_, n_).triangularView<Eigen::Lower>().solveInPlace(l);
  const double d2 = options_.sigma2 + jitter_ - l.squaredNorm();
  ++n_;
  if (d2 > 0.0 && std::isfinite(d2)) {
    l_.block(n_ - 1, 0, 1, n_ - 1) = l.transpose();
    l_(n_ - 1, n_ - 1) = std::sqrt(d2);
  } else {
    refactor();
  }
  update_alpha();
}

void GpModel::refactor() {
  Eigen::MatrixXd k = cross_kernel(x_.leftCols(n_), x_.leftCols(n_), options_.theta,
                                   options_.sigma2);
  for (double jitter = std::max(jitter_ * 10.0, 1e-12); jitter <= options_.max_jitter;
       jitter *= 10.0) {
    Eigen::MatrixXd kj = k;
    kj.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(kj);
    if (llt.info() == Eigen::Success) {
      jitter_ = jitter;
      l_.topLeftCorner(n_, n_) = llt.matrixL();
      return;
    }
  }
  --n_;
  y_.pop_back();
  throw FitError("covariance not positive definite with jitter up to " +
                 std::to_string(options_.max_jitter));
}

void GpModel::update_alpha() {
  const double n = static_cast<double>(n_);
  y_mean_ = 0.0;
  y_scale_ = 1.0;
  if (options_.normalize_y) {
    y_mean_ = std::accumulate(y_.begin(), y_.end(), 0.0) / n;
    if (n_ > 1) {
      double ss = 0.0;
      for (double v : y_) ss += (v - y_mean_) * (v - y_mean_);
      const double sd = std::sqrt(ss / (n - 1.0));
      if (sd > 0.0) y_scale_ = sd;
    }
  }
  alpha_.resize(n_);
  for (int i = 0; i < n_; ++i) alpha_[i] = (y_[i] - y_mean_) / y_scale_;
  auto l = l_.topLeftCorner(n_, n_).triangularView<Eigen::Lower>();
  l.solveInPlace(alpha_);
  l.transpose().solveInPlace(alpha_);
}

Posterior GpModel::posterior(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != dim_) throw InputError("GP input has wrong dimension");
  Eigen::MatrixXd p = Eigen::Map<const Eigen::VectorXd>(x.data(), dim_);
  Eigen::VectorXd mu, var;
  posterior_batch(p, mu, var);
  return {mu[0], var[0]};
}

void GpModel::posterior_batch(const Eigen::MatrixXd& points, Eigen::VectorXd& mu,
                              Eigen::VectorXd& var) const {
  if (points.rows() != dim_) throw InputError("GP input has wrong dimension");
  const auto m = points.cols();
  if (n_ == 0) {
    mu = Eigen::VectorXd::Zero(m);
    var = Eigen::VectorXd::Constant(m, options_.sigma2);
    return;
  }
  Eigen::MatrixXd ks = cross_kernel(x_.leftCols(n_), points, options_.theta, options_.sigma2);
  mu = ks.transpose() * alpha_;
  l_.topLeftCorner(n_, n_).triangularView<Eigen::Lower>().solveInPlace(ks);
  var = (options_.sigma2 - ks.colwise().squaredNorm().array()).max(0.0).matrix();
  mu = (mu.array() * y_scale_ + y_mean_).matrix();
  var *= y_scale_ * y_scale_;
}

}  // namespace modloco
