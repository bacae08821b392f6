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

#include <algorithm>
#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "t2a/audio_io.hpp"
#include "t2a/error.hpp"
#include "t2a/event_text.hpp"

namespace t2a {

struct EmbeddingVector {
  std::vector<float> values;
  bool unit_norm = false;

  std::size_t dim() const { return values.size(); }
  friend bool operator==(const EmbeddingVector&, const EmbeddingVector&) = default;
};

/// Normalizes in double precision. A zero vector stays zero (unit_norm false).
EmbeddingVector unit_normalize(std::span<const double> raw);
EmbeddingVector unit_normalize(std::span<const float> raw);

/// Cosine similarity of two unit vectors, clamped to [-1, 1].
/// Throws std::invalid_argument on a dimension mismatch or non-unit input.
double similarity(const EmbeddingVector& a, const EmbeddingVector& b);

struct RetryPolicy {
  int max_retries = 2;
  // Sleep before retry k is backoff[min(k, size-1)].
  std::vector<std::chrono::milliseconds> backoff{std::chrono::milliseconds(500),
                                                 std::chrono::milliseconds(1000)};
};

enum class ProviderKind { kRemote, kStub };

struct ProviderConfig {
  ProviderKind kind = ProviderKind::kStub;
  std::string endpoint_url;
  double timeout_s = 30.0;
  int max_in_flight = 4;
  std::optional<std::filesystem::path> cache_dir;
  std::size_t dim = 512;
  std::size_t batch_size = 32;
  std::string bearer_token;
  RetryPolicy retry;
  // Stub only; the built-in lexicon is used when unset.
  std::optional<std::filesystem::path> lexicon_path;
};

/// Throws std::invalid_argument when the configuration is unusable.
void validate(const ProviderConfig& config);

/// The three model dependencies of the scorer: a joint audio-text embedder,
/// a text-queried source separator and a caption decomposer.
///
/// Implementations are shared between scoring threads and must be thread-safe.
class Provider {
 public:
  virtual ~Provider() = default;

  virtual std::size_t dim() const = 0;
  /// One unit vector per input, in input order.
  virtual std::vector<EmbeddingVector> embed_text(std::span<const std::string> texts) const = 0;
  virtual std::vector<EmbeddingVector> embed_audio(std::span<const AudioClip> clips) const = 0;
  /// Stem for one event caption; same length and rate as the input.
  virtual AudioClip separate(const AudioClip& clip, std::string_view caption) const = 0;
  virtual EventList decompose(std::string_view caption) const = 0;
  /// Identifies the model behind the provider; part of every cache key.
  virtual std::string fingerprint() const = 0;

  EmbeddingVector embed_text(const std::string& text) const;
  EmbeddingVector embed_audio(const AudioClip& clip) const;
};

/// Bounds the number of concurrent calls and remembers the high-water mark.
class InFlightLimiter {
 public:
  explicit InFlightLimiter(int max_in_flight);

  class Slot {
   public:
    explicit Slot(InFlightLimiter* owner) : owner_(owner) {}
    Slot(Slot&& other) noexcept : owner_(std::exchange(other.owner_, nullptr)) {}
    Slot(const Slot&) = delete;
    Slot& operator=(const Slot&) = delete;
    Slot& operator=(Slot&&) = delete;
    ~Slot();

   private:
    InFlightLimiter* owner_;
  };

  Slot acquire();
  int max_in_flight() const { return max_; }
  int peak() const;
  long total_calls() const;

 private:
  void release();

  const int max_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  int current_ = 0;
  int peak_ = 0;
  long total_ = 0;
};

/// Runs `fn`, retrying retryable ProviderErrors per `policy`.
template <typename Fn>
auto with_retry(const RetryPolicy& policy, Fn&& fn) -> decltype(fn()) {
  for (int attempt = 0;; ++attempt) {
    try {
      return fn();
    } catch (const ProviderError& e) {
      if (!e.retryable() || attempt >= policy.max_retries) throw;
      if (!policy.backoff.empty()) {
        const auto k = std::min<std::size_t>(static_cast<std::size_t>(attempt), policy.backoff.size() - 1);
        std::this_thread::sleep_for(policy.backoff[k]);
      }
    }
  }
}

/// Builds the configured provider, wrapped in an embedding cache when
/// cache_dir is set.
std::unique_ptr<Provider> make_provider(const ProviderConfig& config);

}  // namespace t2a
