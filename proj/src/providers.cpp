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

#include "t2a/providers.hpp"

#include <cmath>
#include <stdexcept>

#include "t2a/embedding_cache.hpp"
#include "t2a/remote_provider.hpp"
#include "t2a/stub_provider.hpp"

namespace t2a {

EmbeddingVector unit_normalize(std::span<const double> raw) {
  double norm = 0.0;
  for (double v : raw) norm += v * v;
  norm = std::sqrt(norm);
  EmbeddingVector out;
  out.values.resize(raw.size());
  if (norm > 0.0 && std::isfinite(norm)) {
    for (std::size_t i = 0; i < raw.size(); ++i) out.values[i] = static_cast<float>(raw[i] / norm);
    out.unit_norm = true;
  }
  return out;
}

EmbeddingVector unit_normalize(std::span<const float> raw) {
  const std::vector<double> wide(raw.begin(), raw.end());
  return unit_normalize(std::span<const double>(wide));
}

double similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dim() != b.dim()) {
    throw std::invalid_argument("embedding dimension mismatch: " + std::to_string(a.dim()) + " vs " +
                                std::to_string(b.dim()));
  }
  if (!a.unit_norm || !b.unit_norm) throw std::invalid_argument("similarity needs unit-normalized embeddings");
  double dot = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) dot += static_cast<double>(a.values[i]) * b.values[i];
  return std::clamp(dot, -1.0, 1.0);
}

void validate(const ProviderConfig& config) {
  if (config.kind == ProviderKind::kRemote && config.endpoint_url.empty()) {
    throw std::invalid_argument("remote provider requires an endpoint URL");
  }
  if (config.max_in_flight < 1) throw std::invalid_argument("max_in_flight must be >= 1");
  if (config.dim == 0) throw std::invalid_argument("embedding dimension must be positive");
  if (config.batch_size == 0) throw std::invalid_argument("batch_size must be positive");
  if (!(config.timeout_s > 0.0)) throw std::invalid_argument("timeout_s must be positive");
  if (config.retry.max_retries < 0) throw std::invalid_argument("max_retries must be >= 0");
}

EmbeddingVector Provider::embed_text(const std::string& text) const {
  return embed_text(std::span<const std::string>(&text, 1)).front();
}

EmbeddingVector Provider::embed_audio(const AudioClip& clip) const {
  return embed_audio(std::span<const AudioClip>(&clip, 1)).front();
}

InFlightLimiter::InFlightLimiter(int max_in_flight) : max_(max_in_flight) {
  if (max_in_flight < 1) throw std::invalid_argument("max_in_flight must be >= 1");
}

InFlightLimiter::Slot InFlightLimiter::acquire() {
  std::unique_lock lock(mu_);
  cv_.wait(lock, [this] { return current_ < max_; });
  ++current_;
  ++total_;
  peak_ = std::max(peak_, current_);
  return Slot(this);
}

void InFlightLimiter::release() {
  {
    std::lock_guard lock(mu_);
    --current_;
  }
  cv_.notify_one();
}

int InFlightLimiter::peak() const {
  std::lock_guard lock(mu_);
  return peak_;
}

long InFlightLimiter::total_calls() const {
  std::lock_guard lock(mu_);
  return total_;
}

InFlightLimiter::Slot::~Slot() {
  if (owner_ != nullptr) owner_->release();
}

std::unique_ptr<Provider> make_provider(const ProviderConfig& config) {
  validate(config);
  std::unique_ptr<Provider> provider;
  if (config.kind == ProviderKind::kRemote) {
    provider = std::make_unique<RemoteProvider>(config);
  } else {
    provider = std::make_unique<StubProvider>(
        config.dim, config.lexicon_path ? StubLexicon::load(*config.lexicon_path) : StubLexicon::builtin(),
        config.max_in_flight);
  }
  if (config.cache_dir) provider = std::make_unique<CachingProvider>(std::move(provider), *config.cache_dir);
  return provider;
}

}  // namespace t2a
