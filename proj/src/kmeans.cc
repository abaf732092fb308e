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

#include "modloco/kmeans.h"

#include <limits>

#include "modloco/error.h"

namespace modloco {
namespace {

double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

int nearest(const std::vector<double>& p, const std::vector<std::vector<double>>& centers) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (int c = 0; c < static_cast<int>(centers.size()); ++c) {
    const double d = sq_dist(p, centers[c]);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

}  // namespace

KMeansResult kmeans(const std::vector<std::vector<double>>& points, int k,
                    std::mt19937_64& rng, int max_iter) {
  const int n = static_cast<int>(points.size());
  if (k < 1) throw DomainError("k must be >= 1");
  if (n < k) throw InputError("k-means needs at least k points");
  const std::size_t dim = points.front().size();
  for (const auto& p : points)
    if (p.size() != dim) throw InputError("k-means points differ in dimension");

  KMeansResult out;
  std::uniform_int_distribution<int> pick(0, n - 1);
  out.centers.push_back(points[pick(rng)]);
  std::vector<double> d2(n);
  for (int c = 1; c < k; ++c) {
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      d2[i] = sq_dist(points[i], out.centers[nearest(points[i], out.centers)]);
      total += d2[i];
    }
    if (total > 0.0) {
      std::discrete_distribution<int> draw(d2.begin(), d2.end());
      out.centers.push_back(points[draw(rng)]);
    } else {
      out.centers.push_back(points[pick(rng)]);
    }
  }

  out.assignment.assign(n, -1);
  for (out.iterations = 0; out.iterations < max_iter; ++out.iterations) {
    bool changed = false;
    for (int i = 0; i < n; ++i) {
      const int c = nearest(points[i], out.centers);
      if (c != out.assignment[i]) {
        out.assignment[i] = c;
        changed = true;
      }
    }
    if (!changed) break;
    std::vector<std::vector<double>> sum(k, std::vector<double>(dim, 0.0));
    std::vector<int> count(k, 0);
    for (int i = 0; i < n; ++i) {
      const int c = out.assignment[i];
      ++count[c];
      for (std::size_t j = 0; j < dim; ++j) sum[c][j] += points[i][j];
    }
    for (int c = 0; c < k; ++c) {
      if (count[c] == 0) continue;
      for (std::size_t j = 0; j < dim; ++j) out.centers[c][j] = sum[c][j] / count[c];
    }
  }
  return out;
}

}  // namespace modloco
