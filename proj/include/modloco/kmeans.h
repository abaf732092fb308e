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

#ifndef MODLOCO_KMEANS_H_
#define MODLOCO_KMEANS_H_

#include <random>
#include <vector>

namespace modloco {

struct KMeansResult {
  std::vector<std::vector<double>> centers;
  std::vector<int> assignment;
  int iterations = 0;
};

// k-means++ seeding followed by Lloyd iterations until the assignment is
// stable or max_iter is reached. Clusters may come out empty when there are
// fewer distinct points than k.
KMeansResult kmeans(const std::vector<std::vector<double>>& points, int k,
                    std::mt19937_64& rng, int max_iter = 50);

}  // namespace modloco

#endif  // MODLOCO_KMEANS_H_
