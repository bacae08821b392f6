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

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "t2a/providers.hpp"

namespace t2a {

inline constexpr int kAhqClasses = 4;

/// Two-layer MLP over an audio embedding: 4 logits for quality classes 1..4.
/// w1 is d x h and w2 is h x 4, both row-major.
struct AhqModel {
  std::size_t d = 0;
  std::size_t h = 0;
  std::vector<double> w1, b1, w2, b2;

  static AhqModel zeros(std::size_t d, std::size_t h = 64);
  bool finite() const;
  friend bool operator==(const AhqModel&, const AhqModel&) = default;
};

struct AhqExample {
  EmbeddingVector embedding;
  int label = 1;  // 1..4
};

/// Same layout as AhqModel, used for gradients and optimizer moments.
struct AhqParams {
  std::vector<double> w1, b1, w2, b2;
};

std::vector<double> ahq_logits(const AhqModel& model, std::span<const float> x);
std::vector<double> softmax(std::span<const double> logits);

/// Expected class value sum_c c * p_c, in [1, 4]. Throws std::invalid_argument
/// on a dimension mismatch.
double ahq_predict(const AhqModel& model, const EmbeddingVector& embedding);
/// Most probable class, 1..4.
int ahq_classify(const AhqModel& model, const EmbeddingVector& embedding);

/// Mean cross-entropy over examples[indices]; fills `grad` when non-null.
double ahq_loss(const AhqModel& model, std::span<const AhqExample> examples, std::span<const std::size_t> indices,
                AhqParams* grad = nullptr);

struct AhqTrainOptions {
  int epochs = 6;
  double lr = std::pow(10.0, -2.5);
  std::size_t batch = 32;
  std::size_t hidden = 64;
  std::uint64_t seed = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AhqTrainResult {
  AhqModel model;
  std::vector<double> epoch_loss;  // mean loss seen during each epoch
  double train_accuracy = 0.0;     // fraction in [0, 1] after the last epoch
};

/// Adam on mean softmax cross-entropy. Weights start uniform in
/// +-1/sqrt(fan_in), biases at zero; examples are reshuffled every epoch.
/// Throws InputError for empty, single-class or inconsistent data and
/// Error when the loss stops being finite.
AhqTrainResult ahq_train(std::span<const AhqExample> examples, const AhqTrainOptions& options = {});

double ahq_accuracy(const AhqModel& model, std::span<const AhqExample> examples);

/// "AHQ1", u32 d, u32 h, then float32 w1, b1, w2, b2 (little-endian).
void save_ahq_model(const std::filesystem::path& path, const AhqModel& model);
AhqModel load_ahq_model(const std::filesystem::path& path);

struct AhqLabels {
  std::vector<std::pair<std::string, int>> labels;
  std::vector<std::string> dropped;  // three-annotator rows without a strict majority
};

/// CSV with header "audio_id,label" or "audio_id,a1,a2,a3"; labels in 1..4.
AhqLabels parse_ahq_labels(std::istream& in);
AhqLabels load_ahq_labels(const std::filesystem::path& path);

}  // namespace t2a
