// Copyright 2026 The t2a-score Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "t2a/stats.hpp"

#include <algorithm>
#include <numeric>

namespace t2a {

std::vector<double> fractional_ranks(std::span<const double> values, bool descending) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return descending ? values[a] > values[b] : values[a] < values[b];
  });
  std::vector<double> ranks(n, 0.0);
  for (std::size_t start = 0; start < n;) {
    std::size_t stop = start + 1;
    while (stop < n && values[order[stop]] == values[order[start]]) ++stop;
    // Positions start+1 .. stop share their mean.
    const double shared = 0.5 * static_cast<double>(start + 1 + stop);
    for (std::size_t k = start; k < stop; ++k) ranks[order[k]] = shared;
    start = stop;
  }
  return ranks;
}

double mean(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("mean of an empty sequence");
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

}  // namespace t2a
