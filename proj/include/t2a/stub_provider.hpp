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

#include <atomic>
#include <chrono>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "t2a/providers.hpp"

namespace t2a {

struct LexiconEntry {
  std::string text;
  double center_hz = 0.0;
};

/// Maps event phrases to frequency bands so the stub separator and stub
/// audio embedder share one space with the stub text embedder.
class StubLexicon {
 public:
  StubLexicon() = default;
  explicit StubLexicon(std::vector<LexiconEntry> entries);

  /// Eight well-separated bands between 110 Hz and 5.6 kHz.
  static StubLexicon builtin();
  /// JSON: {"entries": [{"text": "...", "center_hz": 440.0}, ...]}.
  static StubLexicon load(const std::filesystem::path& path);

  /// Entry whose content words equal the caption's (case and stopword
  /// insensitive), or nullptr.
  const LexiconEntry* find(std::string_view caption) const;
  const LexiconEntry* find_band(double center_hz) const;
  const std::vector<LexiconEntry>& entries() const { return entries_; }
  std::string digest() const;

 private:
  std::vector<LexiconEntry> entries_;
  std::vector<std::vector<std::string>> keys_;
};

/// Deterministic in-process provider.
///
/// Text: every content word seeds a pseudo-random vector in [-1, 1]^d, the
/// vectors are summed and normalized. Audio: the lexicon band holding the
/// most energy names a phrase that is then embedded as text; clips below
/// -80 dBFS RMS embed as the word "silence". Separation is a zero-phase
/// band-pass at the caption's lexicon band; unknown captions, stems below
/// -80 dBFS and stems more than 40 dB below the input come back as all zeros.
class StubProvider final : public Provider {
 public:
  static constexpr double kBandQ = 4.0;
  static constexpr double kSilenceRms = 1e-4;
  static constexpr double kLeakageFloor = 0.01;  // stem / input RMS
  static constexpr const char* kSilenceText = "silence";

  StubProvider(std::size_t dim, StubLexicon lexicon, int max_in_flight = 4);

  std::size_t dim() const override { return dim_; }
  using Provider::embed_audio;
  using Provider::embed_text;
  std::vector<EmbeddingVector> embed_text(std::span<const std::string> texts) const override;
  std::vector<EmbeddingVector> embed_audio(std::span<const AudioClip> clips) const override;
  AudioClip separate(const AudioClip& clip, std::string_view caption) const override;
  EventList decompose(std::string_view caption) const override;
  std::string fingerprint() const override;

  const StubLexicon& lexicon() const { return lexicon_; }
  /// Lexicon phrase for the dominant band of `clip`, or kSilenceText.
  std::string dominant_phrase(const AudioClip& clip) const;

  /// Test hooks: artificial per-call latency and the concurrency high-water mark.
  void set_call_delay(std::chrono::milliseconds delay) { delay_ = delay; }
  int peak_in_flight() const { return limiter_.peak(); }
  long total_calls() const { return limiter_.total_calls(); }

 private:
  InFlightLimiter::Slot enter() const;
  EmbeddingVector hash_embed(std::string_view text) const;

  std::size_t dim_;
  StubLexicon lexicon_;
  mutable InFlightLimiter limiter_;
  std::chrono::milliseconds delay_{0};
};

}  // namespace t2a
