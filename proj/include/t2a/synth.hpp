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

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>

#include "t2a/audio_io.hpp"

namespace t2a {

/// A sine burst with raised-cosine edges of `fade_s` (0 gives a hard gate).
struct ToneEvent {
  double freq_hz = 440.0;
  double onset_s = 0.0;
  double offset_s = 0.0;
  double amplitude = 0.5;
  double fade_s = 0.005;
};

/// Sum of the given bursts over a silent clip of `duration_s`.
AudioClip render_events(std::span<const ToneEvent> events, double duration_s, int sample_rate = 16000,
                        std::string id = {});

struct DemoCorpusOptions {
  std::size_t captions = 4;
  std::size_t events_per_caption = 3;
  std::uint64_t seed = 0;
};

/// Writes a small self-consistent corpus for the stub provider:
/// audio/*.wav, manifest.jsonl, ahq_labels.csv, eval_items.jsonl (ordered
/// renderings with distractor and reversed captions), quality_items.jsonl
/// (every rendering with a human label), timelines_ref.jsonl and a jittered
/// timelines_pred.jsonl.
///
/// Every caption gets three renderings: "ordered" (as described),
/// "swapped" (first two events exchanged) and "dropped" (last event missing).
void write_demo_corpus(const std::filesystem::path& dir, const DemoCorpusOptions& options = {});

}  // namespace t2a
