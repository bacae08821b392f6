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

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "t2a/ahq.hpp"
#include "t2a/audio_io.hpp"
#include "t2a/event_text.hpp"
#include "t2a/providers.hpp"

namespace t2a {

struct ScoringConfig {
  double volume_threshold = 0.3;
  double simultaneity_tol_s = 0.5;
  double frame_len_s = 0.02;
  double hop_s = 0.01;
};

/// Concordant / discordant counts over the n(n-1) ordered event pairs.
struct SequenceCounts {
  long concordant = 0;
  long discordant = 0;
  std::size_t n = 1;

  friend bool operator==(const SequenceCounts&, const SequenceCounts&) = default;
};

struct OccurrenceResult {
  double eos = 0.0;
  std::vector<double> per_event;
};

struct SequenceResult {
  std::optional<double> ess;  // nullopt for single-event captions
  SequenceCounts counts;
  std::vector<EventSpan> spans;
};

struct ScoreRecord {
  std::string audio_id;
  double eos = 0.0;
  std::vector<double> eos_per_event;
  std::optional<double> ess;
  SequenceCounts ess_counts;
  double ahq = 0.0;
  EventList events;
  std::vector<EventSpan> spans;
};

/// Minimum of the per-event similarities. Throws std::invalid_argument on empty input.
double occurrence_score(std::span<const double> per_event);

/// Rank agreement between the described order and detected onsets.
///
/// Every ordered pair (i, j), i != j, is classified once. For a kBefore pair
/// the pair is concordant when the described-first event has the strictly
/// earlier onset; for a kSimultaneous pair when the onsets differ by at most
/// `simultaneity_tol_s`. Pairs with an undetected member are discordant.
/// ess = (C - D) / (n (n - 1)); n == 1 gives nullopt.
SequenceResult sequence_score(const EventList& events, std::span<const EventSpan> spans,
                              double simultaneity_tol_s = 0.5);

/// One stem per event, in event order. Failures become ScoringError("separate", i).
std::vector<AudioClip> separate_events(const AudioClip& clip, const EventList& events, const Provider& provider);

OccurrenceResult occurrence_from_stems(std::span<const AudioClip> stems, const EventList& events,
                                       const Provider& provider);
std::vector<EventSpan> detect_spans(std::span<const AudioClip> stems, const ScoringConfig& config);

OccurrenceResult event_occurrence_score(const AudioClip& clip, const EventList& events, const Provider& provider);
SequenceResult event_sequence_score(const AudioClip& clip, const EventList& events, const Provider& provider,
                                    double threshold = 0.3, double simultaneity_tol_s = 0.5);

/// Decomposes once and shares the stems between the occurrence and sequence
/// scores; AHQ comes from the whole-clip audio embedding.
ScoreRecord score_pair(const AudioClip& clip, const std::string& caption, const Provider& provider,
                       const AhqModel& ahq_model, const ScoringConfig& config = {});

/// Score for several volume thresholds from one separation pass.
std::vector<ScoreRecord> score_pair_sweep(const AudioClip& clip, const std::string& caption,
                                          const Provider& provider, const AhqModel& ahq_model,
                                          const ScoringConfig& config, std::span<const double> thresholds);

}  // namespace t2a
