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

#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "t2a/providers.hpp"

namespace t2a {

/// Content-addressed embedding store: {dir}/{sha256(key)}.bin holding
/// u32 dim, u32 count and count*dim little-endian float32 values.
class EmbeddingCache {
 public:
  explicit EmbeddingCache(std::filesystem::path dir);

  std::optional<EmbeddingVector> get(const std::string& key) const;
  void put(const std::string& key, const EmbeddingVector& vec) const;
  std::filesystem::path path_for(const std::string& key) const;

  long hits() const;
  long misses() const;

 private:
  std::filesystem::path dir_;
  mutable std::mutex mu_;
  mutable long hits_ = 0;
  mutable long misses_ = 0;
};

/// Decorator that serves embeddings from an EmbeddingCache and forwards
/// everything else to the wrapped provider.
class CachingProvider final : public Provider {
 public:
  CachingProvider(std::unique_ptr<Provider> inner, std::filesystem::path cache_dir);

  std::size_t dim() const override { return inner_->dim(); }
  using Provider::embed_audio;
  using Provider::embed_text;
  std::vector<EmbeddingVector> embed_text(std::span<const std::string> texts) const override;
  std::vector<EmbeddingVector> embed_audio(std::span<const AudioClip> clips) const override;
  AudioClip separate(const AudioClip& clip, std::string_view caption) const override {
    return inner_->separate(clip, caption);
  }
  EventList decompose(std::string_view caption) const override { return inner_->decompose(caption); }
  std::string fingerprint() const override { return inner_->fingerprint(); }

  const EmbeddingCache& cache() const { return cache_; }
  const Provider& inner() const { return *inner_; }

  static std::string text_key(const std::string& fingerprint, const std::string& text);
  static std::string audio_key(const std::string& fingerprint, const AudioClip& clip);

 private:
  std::unique_ptr<Provider> inner_;
  EmbeddingCache cache_;
};

}  // namespace t2a
