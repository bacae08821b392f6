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

#include "t2a/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace t2a {
namespace {

struct Biquad {
  double b0, b1, b2, a1, a2;

  void run(std::vector<double>& x) const {
    double z1 = 0.0, z2 = 0.0;
    for (double& v : x) {
      const double in = v;
      const double out = b0 * in + z1;
      z1 = b1 * in - a1 * out + z2;
      z2 = b2 * in - a2 * out;
      v = out;
    }
  }
};

Biquad design_band_pass(int sample_rate, double center_hz, double q) {
  const double w0 = 2.0 * std::numbers::pi * center_hz / sample_rate;
  const double alpha = std::sin(w0) / (2.0 * q);
  const double a0 = 1.0 + alpha;
  return {alpha / a0, 0.0, -alpha / a0, -2.0 * std::cos(w0) / a0, (1.0 - alpha) / a0};
}

}  // namespace

std::vector<float> band_pass(std::span<const float> samples, int sample_rate, double center_hz, double q,
                             int sections) {
  if (sample_rate <= 0 || !(center_hz > 0.0) || center_hz >= 0.5 * sample_rate || !(q > 0.0)) {
    throw std::invalid_argument("band_pass: centre frequency must lie in (0, Nyquist) and q > 0");
  }
  const Biquad stage = design_band_pass(sample_rate, center_hz, q);
  std::vector<double> work(samples.begin(), samples.end());
  for (int s = 0; s < sections; ++s) stage.run(work);
  std::reverse(work.begin(), work.end());
  for (int s = 0; s < sections; ++s) stage.run(work);
  std::reverse(work.begin(), work.end());

  std::vector<float> out(work.size());
  std::transform(work.begin(), work.end(), out.begin(),
                 [](double v) { return static_cast<float>(std::clamp(v, -1.0, 1.0)); });
  return out;
}

double mean_square(std::span<const float> samples) {
  if (samples.empty()) return 0.0;
  double sum = 0.0;
  for (float s : samples) sum += static_cast<double>(s) * s;
  return sum / static_cast<double>(samples.size());
}

}  // namespace t2a
