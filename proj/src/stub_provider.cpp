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

#include "t2a/stub_provider.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "t2a/codec.hpp"
#include "t2a/dsp.hpp"
#include "t2a/rng.hpp"
#include "t2a/text_util.hpp"

namespace t2a {
namespace {

std::vector<std::string> lexicon_key(std::string_view text) {
  auto key = content_words(text);
  std::sort(key.begin(), key.end());
  key.erase(std::unique(key.begin(), key.end()), key.end());
  return key;
}

bool band_usable(double center_hz, int sample_rate) { return center_hz < 0.45 * sample_rate; }

}  // namespace

StubLexicon::StubLexicon(std::vector<LexiconEntry> entries) : entries_(std::move(entries)) {
  for (const auto& e : entries_) {
    if (trim(e.text).empty()) throw InputError("lexicon entry with empty text");
    if (!(e.center_hz > 0.0)) throw InputError("lexicon entry '" + e.text + "' needs a positive center_hz");
    keys_.push_back(lexicon_key(e.text));
  }
}

StubLexicon StubLexicon::builtin() {
  return StubLexicon({
      {"thunder rumbles", 110.0},
      {"a dog barks", 220.0},
      {"a bell rings", 440.0},
      {"a car horn honks", 1000.0},
      {"a bird chirps", 2000.0},
      {"rain falls", 3000.0},
      {"a woman speaks", 4200.0},
      {"a cat meows", 5600.0},
  });
}

StubLexicon StubLexicon::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open lexicon " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
    std::vector<LexiconEntry> entries;
    for (const auto& e : doc.at("entries")) {
      entries.push_back({e.at("text").get<std::string>(), e.at("center_hz").get<double>()});
    }
    return StubLexicon(std::move(entries));
  } catch (const nlohmann::json::exception& e) {
    throw InputError("invalid lexicon " + path.string() + ": " + e.what());
  }
}

const LexiconEntry* StubLexicon::find(std::string_view caption) const {
  const auto key = lexicon_key(caption);
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (keys_[i] == key) return &entries_[i];
  }
  return nullptr;
}

const LexiconEntry* StubLexicon::find_band(double center_hz) const {
  for (const auto& e : entries_) {
    if (e.center_hz == center_hz) return &e;
  }
  return nullptr;
}

std::string StubLexicon::digest() const {
  std::ostringstream os;
  os.precision(17);
  for (const auto& e : entries_) os << e.text << '\t' << e.center_hz << '\n';
  return sha256_hex(os.str()).substr(0, 16);
}

StubProvider::StubProvider(std::size_t dim, StubLexicon lexicon, int max_in_flight)
    : dim_(dim), lexicon_(std::move(lexicon)), limiter_(max_in_flight) {
  if (dim_ == 0) throw std::invalid_argument("embedding dimension must be positive");
}

InFlightLimiter::Slot StubProvider::enter() const {
  auto slot = limiter_.acquire();
  if (delay_.count() > 0) std::this_thread::sleep_for(delay_);
  return slot;
}

EmbeddingVector StubProvider::hash_embed(std::string_view text) const {
  auto tokens = content_words(text);
  if (tokens.empty()) tokens.push_back(ascii_lower(trim(text)));
  std::vector<double> acc(dim_, 0.0);
  for (const auto& token : tokens) {
    std::uint64_t state = fnv1a64(token.data(), token.size());
    for (double& v : acc) v += static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-52 - 1.0;
  }
  return unit_normalize(std::span<const double>(acc));
}

std::vector<EmbeddingVector> StubProvider::embed_text(std::span<const std::string> texts) const {
  if (texts.empty()) throw ProviderError(ProviderError::Kind::kInvalidInput, "embed_text: empty batch", false);
  for (const auto& t : texts) {
    if (trim(t).empty()) throw ProviderError(ProviderError::Kind::kInvalidInput, "embed_text: empty text", false);
  }
  const auto slot = enter();
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(hash_embed(t));
  return out;
}

std::string StubProvider::dominant_phrase(const AudioClip& clip) const {
  if (clip.empty() || std::sqrt(mean_square(clip.samples)) < kSilenceRms) return kSilenceText;
  const LexiconEntry* best = nullptr;
  double best_energy = 0.0;
  for (const auto& entry : lexicon_.entries()) {
    if (!band_usable(entry.center_hz, clip.sample_rate)) continue;
    const double energy = mean_square(band_pass(clip.samples, clip.sample_rate, entry.center_hz, kBandQ));
    if (energy > best_energy) {
      best_energy = energy;
      best = &entry;
    }
  }
  if (best == nullptr || std::sqrt(best_energy) < kSilenceRms) return kSilenceText;
  return best->text;
}

std::vector<EmbeddingVector> StubProvider::embed_audio(std::span<const AudioClip> clips) const {
  if (clips.empty()) throw ProviderError(ProviderError::Kind::kInvalidInput, "embed_audio: empty batch", false);
  const auto slot = enter();
  std::vector<EmbeddingVector> out;
  out.reserve(clips.size());
  for (const auto& clip : clips) out.push_back(hash_embed(dominant_phrase(clip)));
  return out;
}

AudioClip StubProvider::separate(const AudioClip& clip, std::string_view caption) const {
  if (clip.empty()) throw ProviderError(ProviderError::Kind::kInvalidInput, "separate: empty clip", false);
  if (trim(caption).empty()) throw ProviderError(ProviderError::Kind::kInvalidInput, "separate: empty caption", false);
  const auto slot = enter();
  AudioClip stem;
  stem.id = clip.id;
  stem.sample_rate = clip.sample_rate;
  const LexiconEntry* entry = lexicon_.find(caption);
  if (entry == nullptr || !band_usable(entry->center_hz, clip.sample_rate)) {
    stem.samples.assign(clip.samples.size(), 0.0f);
  } else {
    stem.samples = band_pass(clip.samples, clip.sample_rate, entry->center_hz, kBandQ);
    const double rms = std::sqrt(mean_square(stem.samples));
    if (rms < kSilenceRms || rms < kLeakageFloor * std::sqrt(mean_square(clip.samples))) {
      std::fill(stem.samples.begin(), stem.samples.end(), 0.0f);
    }
  }
  return stem;
}

EventList StubProvider::decompose(std::string_view caption) const {
  const auto slot = enter();
  return decompose_caption(caption);
}

std::string StubProvider::fingerprint() const {
  return "stub/d" + std::to_string(dim_) + "/" + lexicon_.digest();
}

}  // namespace t2a
