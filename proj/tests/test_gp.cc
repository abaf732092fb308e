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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>
#include <doctest.h>

#include "modloco/gp.h"
#include "modloco/kmeans.h"

using namespace modloco;

namespace {

// Plain GP regression with Gaussian elimination, written independently of
// GpModel.
struct NaiveGp {
  std::vector<std::vector<double>> x;
  std::vector<double> y;
  double theta = 0.2, sigma2 = 1.0, jitter = 1e-6;

  static double k(const std::vector<double>& a, const std::vector<double>& b,
                  double theta, double sigma2) {
    double r2 = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) r2 += (a[i] - b[i]) * (a[i] - b[i]);
    const double s = std::sqrt(5.0 * r2) / theta;
    return sigma2 * (1.0 + s + s * s / 3.0) * std::exp(-s);
  }

  static std::vector<double> solve(std::vector<std::vector<double>> a, std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t c = 0; c < n; ++c) {
      std::size_t piv = c;
      for (std::size_t r = c + 1; r < n; ++r)
        if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
      std::swap(a[c], a[piv]);
      std::swap(b[c], b[piv]);
      for (std::size_t r = c + 1; r < n; ++r) {
        const double f = a[r][c] / a[c][c];
        for (std::size_t j = c; j < n; ++j) a[r][j] -= f * a[c][j];
        b[r] -= f * b[c];
      }
    }
    std::vector<double> out(n);
    for (std::size_t i = n; i-- > 0;) {
      double s = b[i];
      for (std::size_t j = i + 1; j < n; ++j) s -= a[i][j] * out[j];
      out[i] = s / a[i][i];
    }
    return out;
  }

  Posterior at(const std::vector<double>& q) const {
    const std::size_t n = y.size();
    const double mean = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : y) ss += (v - mean) * (v - mean);
    const double scale = std::sqrt(ss / (n - 1));
    std::vector<double> ys(n);
    for (std::size_t i = 0; i < n; ++i) ys[i] = (y[i] - mean) / scale;
    std::vector<std::vector<double>> kk(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        kk[i][j] = k(x[i], x[j], theta, sigma2) + (i == j ? jitter : 0.0);
    std::vector<double> ks(n);
    for (std::size_t i = 0; i < n; ++i) ks[i] = k(x[i], q, theta, sigma2);
    const auto alpha = solve(kk, ys);
    const auto v = solve(kk, ks);
    double mu = 0.0, red = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      mu += ks[i] * alpha[i];
      red += ks[i] * v[i];
    }
    return {mu * scale + mean, std::max(sigma2 - red, 0.0) * scale * scale};
  }
};

}  // namespace

TEST_CASE("matern 5/2 values") {
  CHECK(matern52(0.0, 0.2) == 1.0);
  CHECK(matern52(0.0, 0.2, 2.5) == 2.5);
  CHECK(matern52(0.2, 0.2) == doctest::Approx(0.52399).epsilon(1e-5));
  const double s5 = std::sqrt(5.0);
  CHECK(matern52(0.2, 0.2) == doctest::Approx((1 + s5 + 5.0 / 3.0) * std::exp(-s5)).epsilon(1e-14));
  CHECK(matern52(100.0, 0.2) < 1e-200);
}

TEST_CASE("empty model returns the prior") {
  GpModel gp(3);
  const std::vector<double> q{0.1, 0.2, 0.3};
  const Posterior p = gp.posterior(q);
  CHECK(p.mu == 0.0);
  CHECK(p.var == 1.0);
}

TEST_CASE("agrees with an independent implementation") {
  NaiveGp naive;
  GpModel gp(1);
  for (double x : {-0.8, -0.35, 0.1, 0.45, 0.9}) {
    const double y = 2.0 * x - 0.5;
    naive.x.push_back({x});
    naive.y.push_back(y);
    gp.add(std::vector<double>{x}, y);
  }
  for (double q = -1.0; q <= 1.0; q += 0.05) {
    const Posterior a = gp.posterior(std::vector<double>{q});
    const Posterior b = naive.at({q});
    CHECK(std::abs(a.mu - b.mu) < 1e-9);
    CHECK(std::abs(a.var - b.var) < 1e-9);
  }
  const double q = 0.3;
  const double err = std::abs(gp.posterior(std::vector<double>{q}).mu - (2.0 * q - 0.5));
  CHECK(std::abs(err - std::abs(naive.at({q}).mu - (2.0 * q - 0.5))) < 1e-9);
}

TEST_CASE("agrees with the oracle in several dimensions") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  NaiveGp naive;
  GpModel gp(4);
  for (int i = 0; i < 30; ++i) {
    std::vector<double> x(4);
    for (auto& v : x) v = u(rng);
    const double y = std::sin(3 * x[0]) + x[1] * x[2] - x[3];
    naive.x.push_back(x);
    naive.y.push_back(y);
    gp.add(x, y);
  }
  Eigen::MatrixXd pts(4, 50);
  for (int j = 0; j < 50; ++j)
    for (int i = 0; i < 4; ++i) pts(i, j) = u(rng);
  Eigen::VectorXd mu, var;
  gp.posterior_batch(pts, mu, var);
  for (int j = 0; j < 50; ++j) {
    const std::vector<double> q(pts.col(j).data(), pts.col(j).data() + 4);
    const Posterior b = naive.at(q);
    CHECK(std::abs(mu[j] - b.mu) < 1e-8);
    CHECK(std::abs(var[j] - b.var) < 1e-8);
    const Posterior single = gp.posterior(q);
    CHECK(std::abs(single.mu - mu[j]) < 1e-12);
  }
}

TEST_CASE("interpolates its data") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  GpModel gp(3);
  std::vector<std::vector<double>> xs;
  std::vector<double> ys;
  for (int i = 0; i < 40; ++i) {
    std::vector<double> x{u(rng), u(rng), u(rng)};
    xs.push_back(x);
    ys.push_back(x[0] * x[0] - x[1] + 0.3 * x[2]);
    gp.add(x, ys.back());
  }
  for (int i = 0; i < 40; ++i) {
    const Posterior p = gp.posterior(xs[i]);
    CHECK(std::abs(p.mu - ys[i]) < 1e-3);
    CHECK(p.var < 1e-3);
    CHECK(p.var >= 0.0);
  }
}

TEST_CASE("training order does not matter") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<std::vector<double>> xs;
  std::vector<double> ys;
  for (int i = 0; i < 25; ++i) {
    xs.push_back({u(rng), u(rng)});
    ys.push_back(std::cos(2 * xs.back()[0]) * xs.back()[1]);
  }
  std::vector<int> perm(25);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  GpModel a(2), b(2);
  for (int i = 0; i < 25; ++i) {
    a.add(xs[i], ys[i]);
    b.add(xs[perm[i]], ys[perm[i]]);
  }
  for (int k = 0; k < 50; ++k) {
    const std::vector<double> q{u(rng), u(rng)};
    CHECK(std::abs(a.posterior(q).mu - b.posterior(q).mu) < 1e-12);
    CHECK(std::abs(a.posterior(q).var - b.posterior(q).var) < 1e-12);
  }
}

TEST_CASE("duplicate inputs are absorbed by jitter") {
  GpModel gp(2);
  const std::vector<double> x{0.1, 0.1};
  gp.add(x, 1.0);
  gp.add(x, 1.0);
  gp.add(std::vector<double>{0.5, -0.5}, 0.0);
  CHECK(gp.size() == 3);
  CHECK(std::isfinite(gp.posterior(x).mu));
}

TEST_CASE("k-means separates two blobs") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0.0, 0.05);
  std::vector<std::vector<double>> pts;
  for (int i = 0; i < 10; ++i) pts.push_back({-0.7 + n(rng), -0.7 + n(rng)});
  for (int i = 0; i < 10; ++i) pts.push_back({0.7 + n(rng), 0.7 + n(rng)});
  std::mt19937_64 krng(4);
  const KMeansResult r = kmeans(pts, 2, krng);
  for (int i = 1; i < 10; ++i) CHECK(r.assignment[i] == r.assignment[0]);
  for (int i = 11; i < 20; ++i) CHECK(r.assignment[i] == r.assignment[10]);
  CHECK(r.assignment[0] != r.assignment[10]);
  CHECK(r.iterations <= 50);
}

TEST_CASE("k-means on identical points") {
  std::vector<std::vector<double>> pts(6, std::vector<double>{0.2, 0.2});
  std::mt19937_64 rng(0);
  const KMeansResult r = kmeans(pts, 3, rng);
  CHECK(r.centers.size() == 3);
  CHECK(r.assignment.size() == 6);
}
