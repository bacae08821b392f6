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

#include "t2a/remote_provider.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <tuple>

#include "httplib.h"
#include "t2a/codec.hpp"

namespace t2a {
namespace {

using json = nlohmann::json;

ProviderError invalid_response(const std::string& what) {
  return ProviderError(ProviderError::Kind::kInvalidResponse, "invalid provider response: " + what, false);
}

void set_timeout(httplib::Client& cli, double seconds) {
  const auto sec = static_cast<time_t>(seconds);
  const auto usec = static_cast<time_t>((seconds - static_cast<double>(sec)) * 1e6);
  cli.set_connection_timeout(sec, usec);
  cli.set_read_timeout(sec, usec);
  cli.set_write_timeout(sec, usec);
}

}  // namespace

RemoteProvider::RemoteProvider(ProviderConfig config)
    : config_(std::move(config)), limiter_(config_.max_in_flight) {
  validate(config_);
  const std::string& url = config_.endpoint_url;
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos || url.substr(0, scheme_end) != "http") {
    throw std::invalid_argument("endpoint must be an http:// URL: " + url);
  }
  const auto path_start = url.find('/', scheme_end + 3);
  host_ = url.substr(0, path_start);
  base_path_ = path_start == std::string::npos ? std::string() : url.substr(path_start);
  while (!base_path_.empty() && base_path_.back() == '/') base_path_.pop_back();
}

json RemoteProvider::post_once(const std::string& route, const std::string& payload) const {
  const auto slot = limiter_.acquire();
  httplib::Client cli(host_);
  set_timeout(cli, config_.timeout_s);
  httplib::Headers headers;
  if (!config_.bearer_token.empty()) headers.emplace("Authorization", "Bearer " + config_.bearer_token);

  const auto res = cli.Post(base_path_ + route, headers, payload, "application/json");
  if (!res) {
    const auto err = res.error();
    const bool timeout = err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read;
    throw ProviderError(timeout ? ProviderError::Kind::kTimeout : ProviderError::Kind::kUnreachable,
                        route + ": " + httplib::to_string(err) + " (" + host_ + ")", true);
  }
  if (res->status != 200) {
    std::string message = res->body;
    try {
      message = json::parse(res->body).at("error").get<std::string>();
    } catch (const json::exception&) {
    }
    const bool retryable = res->status == 429 || res->status >= 500;
    throw ProviderError(ProviderError::Kind::kHttpStatus,
                        route + ": HTTP " + std::to_string(res->status) + ": " + message, retryable, res->status);
  }
  try {
    return json::parse(res->body);
  } catch (const json::exception& e) {
    throw invalid_response(route + ": body is not JSON (" + e.what() + ")");
  }
}

json RemoteProvider::post(const std::string& route, const json& body) const {
  const std::string payload = body.dump();
  return with_retry(config_.retry, [&] { return post_once(route, payload); });
}

std::vector<EmbeddingVector> RemoteProvider::parse_embeddings(const json& reply, std::size_t expected) const {
  const auto it = reply.find("embeddings");
  if (it == reply.end() || !it->is_array()) throw invalid_response("missing 'embeddings' array");
  if (it->size() != expected) {
    throw ProviderError(ProviderError::Kind::kWrongCount,
                        "provider returned " + std::to_string(it->size()) + " embeddings for " +
                            std::to_string(expected) + " inputs",
                        false);
  }
  if (const auto dim = reply.find("dim"); dim != reply.end()) {
    if (!dim->is_number_integer() || dim->get<std::size_t>() != config_.dim) {
      throw ProviderError(ProviderError::Kind::kWrongDimension,
                          "provider dim " + dim->dump() + " != configured " + std::to_string(config_.dim), false);
    }
  }
  std::vector<EmbeddingVector> out;
  out.reserve(expected);
  std::vector<double> raw;
  for (const auto& row : *it) {
    if (!row.is_array() || row.size() != config_.dim) {
      throw ProviderError(ProviderError::Kind::kWrongDimension,
                          "embedding of length " + std::to_string(row.is_array() ? row.size() : 0) +
                              ", expected " + std::to_string(config_.dim),
                          false);
    }
    raw.clear();
    for (const auto& v : row) {
      if (!v.is_number()) throw invalid_response("non-numeric embedding component");
      raw.push_back(v.get<double>());
    }
    auto vec = unit_normalize(std::span<const double>(raw));
    if (!vec.unit_norm) throw invalid_response("zero or non-finite embedding");
    out.push_back(std::move(vec));
  }
  return out;
}

template <typename Item, typename Encode>
std::vector<EmbeddingVector> RemoteProvider::embed_batched(std::span<const Item> items, const std::string& route,
                                                           Encode encode) const {
  // Chunks go out concurrently; the limiter caps how many are on the wire.
  std::vector<std::future<std::vector<EmbeddingVector>>> pending;
  for (std::size_t begin = 0; begin < items.size(); begin += config_.batch_size) {
    const auto chunk = items.subspan(begin, std::min(config_.batch_size, items.size() - begin));
    pending.push_back(std::async(std::launch::async, [this, chunk, &route, &encode] {
      return parse_embeddings(post(route, encode(chunk)), chunk.size());
    }));
  }
  std::vector<EmbeddingVector> out;
  out.reserve(items.size());
  for (auto& f : pending) {
    auto part = f.get();
    std::move(part.begin(), part.end(), std::back_inserter(out));
  }
  return out;
}

std::vector<EmbeddingVector> RemoteProvider::embed_text(std::span<const std::string> texts) const {
  if (texts.empty()) throw ProviderError(ProviderError::Kind::kInvalidInput, "embed_text: empty batch", false);
  for (const auto& t : texts) {
    if (t.empty()) throw ProviderError(ProviderError::Kind::kInvalidInput, "embed_text: empty text", false);
  }
  return embed_batched(texts, "/v1/embed_text", [](std::span<const std::string> chunk) {
    return json{{"texts", json(std::vector<std::string>(chunk.begin(), chunk.end()))}};
  });
}

std::vector<EmbeddingVector> RemoteProvider::embed_audio(std::span<const AudioClip> clips) const {
  if (clips.empty()) throw ProviderError(ProviderError::Kind::kInvalidInput, "embed_audio: empty batch", false);
  for (const auto& c : clips) {
    if (c.empty()) throw ProviderError(ProviderError::Kind::kInvalidInput, "embed_audio: empty clip", false);
    if (c.sample_rate != clips.front().sample_rate) {
      throw ProviderError(ProviderError::Kind::kInvalidInput, "embed_audio: mixed sample rates in one batch",
                          false);
    }
  }
  return embed_batched(clips, "/v1/embed_audio", [](std::span<const AudioClip> chunk) {
    json list = json::array();
    for (const auto& c : chunk) list.push_back({{"id", c.id}, {"pcm_b64", pcm_to_base64(c.samples)}});
    return json{{"sample_rate", chunk.front().sample_rate}, {"clips", std::move(list)}};
  });
}

AudioClip RemoteProvider::separate(const AudioClip& clip, std::string_view caption) const {
  if (clip.empty()) throw ProviderError(ProviderError::Kind::kInvalidInput, "separate: empty clip", false);
  if (caption.empty()) throw ProviderError(ProviderError::Kind::kInvalidInput, "separate: empty caption", false);
  const json reply = post("/v1/separate", {{"sample_rate", clip.sample_rate},
                                           {"caption", std::string(caption)},
                                           {"pcm_b64", pcm_to_base64(clip.samples)}});
  AudioClip stem;
  stem.id = clip.id;
  stem.sample_rate = clip.sample_rate;
  try {
    stem.samples = base64_to_pcm(reply.at("pcm_b64").get<std::string>());
  } catch (const json::exception& e) {
    throw invalid_response(std::string("separate: ") + e.what());
  } catch (const InputError& e) {
    throw invalid_response(std::string("separate: ") + e.what());
  }
  if (stem.samples.size() != clip.samples.size()) {
    throw invalid_response("separate: stem has " + std::to_string(stem.samples.size()) + " samples, expected " +
                           std::to_string(clip.samples.size()));
  }
  for (float& s : stem.samples) s = std::isfinite(s) ? std::clamp(s, -1.0f, 1.0f) : 0.0f;
  return stem;
}

EventList RemoteProvider::decompose(std::string_view caption) const {
  if (caption.empty()) throw ProviderError(ProviderError::Kind::kInvalidInput, "decompose: empty caption", false);
  const json reply = post("/v1/decompose", {{"caption", std::string(caption)}});
  EventList list;
  try {
    list.events = reply.at("events").get<std::vector<std::string>>();
    for (const auto& r : reply.at("relations")) {
      list.relations.push_back(
          {r.at("i").get<std::size_t>(), r.at("j").get<std::size_t>(), relation_from_string(r.at("rel").get<std::string>())});
    }
    std::sort(list.relations.begin(), list.relations.end(),
              [](const auto& a, const auto& b) { return std::tie(a.i, a.j) < std::tie(b.i, b.j); });
    validate(list);
  } catch (const json::exception& e) {
    throw invalid_response(std::string("decompose: ") + e.what());
  } catch (const InputError& e) {
    throw invalid_response(std::string("decompose: ") + e.what());
  }
  return list;
}

std::string RemoteProvider::fingerprint() const {
  return "remote/d" + std::to_string(config_.dim) + "/" + config_.endpoint_url;
}

}  // namespace t2a
