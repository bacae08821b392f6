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

#include "t2a/embedding_cache.hpp"

#include <bit>
#include <fstream>
#include <iterator>
#include <system_error>

#include "t2a/codec.hpp"

namespace t2a {
namespace {

void put_u32(std::string& out, std::uint32_t v) {
  for (int shift = 0; shift < 32; shift += 8) out.push_back(static_cast<char>((v >> shift) & 0xFF));
}

std::uint32_t get_u32(const std::string& in, std::size_t at) {
  std::uint32_t v = 0;
  for (int b = 0; b < 4; ++b) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[at + b])) << (8 * b);
  return v;
}

}  // namespace

EmbeddingCache::EmbeddingCache(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
}

std::filesystem::path EmbeddingCache::path_for(const std::string& key) const {
  return dir_ / (sha256_hex(key) + ".bin");
}

std::optional<EmbeddingVector> EmbeddingCache::get(const std::string& key) const {
  std::ifstream in(path_for(key), std::ios::binary);
  std::optional<EmbeddingVector> found;
  if (in) {
    const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (bytes.size() >= 8) {
      const std::uint32_t dim = get_u32(bytes, 0);
      const std::uint32_t count = get_u32(bytes, 4);
      // Entries are written one vector per key; anything else is treated as a miss.
      if (count == 1 && bytes.size() == 8 + 4 * static_cast<std::size_t>(dim)) {
        EmbeddingVector vec;
        vec.unit_norm = true;
        vec.values.resize(dim);
        for (std::uint32_t i = 0; i < dim; ++i) vec.values[i] = std::bit_cast<float>(get_u32(bytes, 8 + 4 * i));
        found = std::move(vec);
      }
    }
  }
  std::lock_guard lock(mu_);
  ++(found ? hits_ : misses_);
  return found;
}

void EmbeddingCache::put(const std::string& key, const EmbeddingVector& vec) const {
  std::string bytes;
  bytes.reserve(8 + 4 * vec.dim());
  put_u32(bytes, static_cast<std::uint32_t>(vec.dim()));
  put_u32(bytes, 1);
  for (float v : vec.values) put_u32(bytes, std::bit_cast<std::uint32_t>(v));

  const auto target = path_for(key);
  std::lock_guard lock(mu_);
  const auto tmp = std::filesystem::path(target).concat(".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("cannot write cache entry " + tmp.string());
  }
  std::filesystem::rename(tmp, target);
}

long EmbeddingCache::hits() const {
  std::lock_guard lock(mu_);
  return hits_;
}

long EmbeddingCache::misses() const {
  std::lock_guard lock(mu_);
  return misses_;
}

CachingProvider::CachingProvider(std::unique_ptr<Provider> inner, std::filesystem::path cache_dir)
    : inner_(std::move(inner)), cache_(std::move(cache_dir)) {}

std::string CachingProvider::text_key(const std::string& fingerprint, const std::string& text) {
  return "embed_text\n" + fingerprint + "\n" + text;
}

std::string CachingProvider::audio_key(const std::string& fingerprint, const AudioClip& clip) {
  std::string key = "embed_audio\n" + fingerprint + "\n" + std::to_string(clip.sample_rate) + "\n";
  key.reserve(key.size() + 4 * clip.samples.size());
  for (float s : clip.samples) put_u32(key, std::bit_cast<std::uint32_t>(s));
  return key;
}

namespace {

template <typename Item, typename KeyFn, typename ComputeFn>
std::vector<EmbeddingVector> cached_embed(const EmbeddingCache& cache, std::span<const Item> items, KeyFn key_of,
                                          ComputeFn compute) {
  if (items.empty()) {
    throw ProviderError(ProviderError::Kind::kInvalidInput, "embedding request with empty batch", false);
  }
  std::vector<std::optional<EmbeddingVector>> found(items.size());
  std::vector<std::string> keys(items.size());
  std::vector<Item> missing;
  std::vector<std::size_t> missing_at;
  for (std::size_t i = 0; i < items.size(); ++i) {
    keys[i] = key_of(items[i]);
    found[i] = cache.get(keys[i]);
    if (!found[i]) {
      missing.push_back(items[i]);
      missing_at.push_back(i);
    }
  }
  if (!missing.empty()) {
    auto fresh = compute(std::span<const Item>(missing));
    for (std::size_t k = 0; k < fresh.size(); ++k) {
      cache.put(keys[missing_at[k]], fresh[k]);
      found[missing_at[k]] = std::move(fresh[k]);
    }
  }
  std::vector<EmbeddingVector> out;
  out.reserve(items.size());
  for (auto& f : found) out.push_back(std::move(*f));
  return out;
}

}  // namespace

std::vector<EmbeddingVector> CachingProvider::embed_text(std::span<const std::string> texts) const {
  const std::string fp = fingerprint();
  return cached_embed(
      cache_, texts, [&](const std::string& t) { return text_key(fp, t); },
      [&](std::span<const std::string> batch) { return inner_->embed_text(batch); });
}

std::vector<EmbeddingVector> CachingProvider::embed_audio(std::span<const AudioClip> clips) const {
  const std::string fp = fingerprint();
  return cached_embed(
      cache_, clips, [&](const AudioClip& c) { return audio_key(fp, c); },
      [&](std::span<const AudioClip> batch) { return inner_->embed_audio(batch); });
}

}  // namespace t2a
