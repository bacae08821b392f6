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

#include <string>

#include "json.hpp"
#include "t2a/providers.hpp"

namespace t2a {

/// HTTP/1.1 JSON client for a model server exposing
///   POST {endpoint}/v1/embed_text   {"texts": [...]}
///   POST {endpoint}/v1/embed_audio  {"sample_rate": sr, "clips": [{"id", "pcm_b64"}]}
///   POST {endpoint}/v1/separate     {"sample_rate": sr, "caption", "pcm_b64"}
///   POST {endpoint}/v1/decompose    {"caption"}
/// Non-200 answers carry {"error": "..."}; 429 and 5xx are retried.
class RemoteProvider final : public Provider {
 public:
  explicit RemoteProvider(ProviderConfig config);

  std::size_t dim() const override { return config_.dim; }
  using Provider::embed_audio;
  using Provider::embed_text;
  std::vector<EmbeddingVector> embed_text(std::span<const std::string> texts) const override;
  std::vector<EmbeddingVector> embed_audio(std::span<const AudioClip> clips) const override;
  AudioClip separate(const AudioClip& clip, std::string_view caption) const override;
  EventList decompose(std::string_view caption) const override;
  std::string fingerprint() const override;

  int peak_in_flight() const { return limiter_.peak(); }

 private:
  nlohmann::json post(const std::string& route, const nlohmann::json& body) const;
  nlohmann::json post_once(const std::string& route, const std::string& payload) const;
  std::vector<EmbeddingVector> parse_embeddings(const nlohmann::json& reply, std::size_t expected) const;
  template <typename Item, typename Encode>
  std::vector<EmbeddingVector> embed_batched(std::span<const Item> items, const std::string& route,
                                             Encode encode) const;

  ProviderConfig config_;
  std::string host_;      // scheme://host:port
  std::string base_path_;  // path prefix without trailing slash
  mutable InFlightLimiter limiter_;
};

}  // namespace t2a
