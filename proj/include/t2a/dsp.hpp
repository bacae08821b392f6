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

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace t2a {

/// RBJ band-pass biquad (0 dB peak gain), `sections` in cascade, run forward
/// and then backward so the result has no phase delay.
std::vector<float> band_pass(std::span<const float> samples, int sample_rate, double center_hz, double q,
                             int sections = 2);

double mean_square(std::span<const float> samples);

}  // namespace t2a
