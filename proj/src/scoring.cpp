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

#include "t2a/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "t2a/error.hpp"

namespace t2a {
namespace {

// Runs `fn`, relabelling any library error as a ScoringError for `stage`.
template <typename Fn>
auto staged(const char* stage, std::optional<std::size_t> event, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const ScoringError&) {
    throw;
  } catch (const ProviderError& e) {
    throw ScoringError(stage, event, e.what(), e.retryable());
  } catch (const Error& e) {
    throw ScoringError(stage, event, e.what());
  } catch (const std::invalid_argument& e) {
    throw ScoringError(stage, event, e.what());
  }
}

}  // namespace

double occurrence_score(std::span<const double> per_event) {
  if (per_event.empty()) throw std::invalid_argument("occurrence score needs at least one event");
  return *std::min_element(per_event.begin(), per_event.end());
}

SequenceResult sequence_score(const EventList& events, std::span<const EventSpan> spans,
                              double simultaneity_tol_s) {
  const std::size_t n = events.size();
  if (n == 0) throw std::invalid_argument("sequence score needs at least one event");
  if (spans.size() != n) throw std::invalid_argument("one span per event required");

  SequenceResult result;
  result.spans.assign(spans.begin(), spans.end());
  result.counts.n = n;
  if (n == 1) return result;

  std::vector<Relation> rel(n * n, Relation::kBefore);
  for (const auto& r : events.relations) {
    rel[r.i * n + r.j] = r.rel;
    rel[r.j * n + r.i] = r.rel;
  }

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      bool concordant = false;
      if (spans[i].detected && spans[j].detected) {
        if (rel[i * n + j] == Relation::kBefore) {
          const std::size_t first = std::min(i, j);
          const std::size_t second = std::max(i, j);
          concordant = spans[first].onset_s < spans[second].onset_s;
        } else {
          concordant = std::abs(spans[i].onset_s - spans[j].onset_s) <= simultaneity_tol_s;
        }
      }
      ++(concordant ? result.counts.concordant : result.counts.discordant);
    }
  }
  const auto pairs = static_cast<double>(n * (n - 1));
  result.ess = static_cast<double>(result.counts.concordant - result.counts.discordant) / pairs;
  return result;
}

std::vector<AudioClip> separate_events(const AudioClip& clip, const EventList& events, const Provider& provider) {
  std::vector<AudioClip> stems;
  stems.reserve(events.size());
  for (std::size_t i = 0; i < events.size(); ++i) {
    stems.push_back(staged("separate", i, [&] { return provider.separate(clip, events.events[i]); }));
  }
  return stems;
}

OccurrenceResult occurrence_from_stems(std::span<const AudioClip> stems, const EventList& events,
                                       const Provider& provider) {
  if (stems.size() != events.size()) throw std::invalid_argument("one stem per event required");
  OccurrenceResult result;
  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto text = staged("embed_text", i, [&] { return provider.embed_text(events.events[i]); });
    const auto audio = staged("embed_audio", i, [&] { return provider.embed_audio(stems[i]); });
    result.per_event.push_back(staged("similarity", i, [&] { return similarity(text, audio); }));
  }
  result.eos = occurrence_score(result.per_event);
  return result;
}

std::vector<EventSpan> detect_spans(std::span<const AudioClip> stems, const ScoringConfig& config) {
  std::vector<EventSpan> spans;
  spans.reserve(stems.size());
  for (std::size_t i = 0; i < stems.size(); ++i) {
    auto span = staged("detect", i, [&] {
      const auto env = normalize_envelope(compute_envelope(stems[i], config.frame_len_s, config.hop_s));
      return detect_active_span(env, config.volume_threshold);
    });
    span.event_index = i;
    spans.push_back(span);
  }
  return spans;
}

OccurrenceResult event_occurrence_score(const AudioClip& clip, const EventList& events, const Provider& provider) {
  validate(events);
  const auto stems = separate_events(clip, events, provider);
  return occurrence_from_stems(stems, events, provider);
}

SequenceResult event_sequence_score(const AudioClip& clip, const EventList& events, const Provider& provider,
                                    double threshold, double simultaneity_tol_s) {
  validate(events);
  if (!(threshold > 0.0 && threshold < 1.0)) throw std::invalid_argument("threshold must lie in (0, 1)");
  ScoringConfig config;
  config.volume_threshold = threshold;
  config.simultaneity_tol_s = simultaneity_tol_s;
  const auto stems = separate_events(clip, events, provider);
  const auto spans = detect_spans(stems, config);
  return sequence_score(events, spans, simultaneity_tol_s);
}

std::vector<ScoreRecord> score_pair_sweep(const AudioClip& clip, const std::string& caption,
                                          const Provider& provider, const AhqModel& ahq_model,
                                          const ScoringConfig& config, std::span<const double> thresholds) {
  for (double t : thresholds) {
    if (!(t > 0.0 && t < 1.0)) throw std::invalid_argument("threshold must lie in (0, 1)");
  }
  const EventList events = staged("decompose", std::nullopt, [&] {
    auto list = provider.decompose(caption);
    validate(list);
    return list;
  });
  const auto stems = separate_events(clip, events, provider);
  const auto occurrence = occurrence_from_stems(stems, events, provider);
  const double ahq = staged("ahq", std::nullopt, [&] { return ahq_predict(ahq_model, provider.embed_audio(clip)); });

  std::vector<ScoreRecord> records;
  for (double threshold : thresholds) {
    ScoringConfig at = config;
    at.volume_threshold = threshold;
    auto sequence = sequence_score(events, detect_spans(stems, at), at.simultaneity_tol_s);

    ScoreRecord rec;
    rec.audio_id = clip.id;
    rec.eos = occurrence.eos;
    rec.eos_per_event = occurrence.per_event;
    rec.ess = sequence.ess;
    rec.ess_counts = sequence.counts;
    rec.ahq = ahq;
    rec.events = events;
    rec.spans = std::move(sequence.spans);
    records.push_back(std::move(rec));
  }
  return records;
}

ScoreRecord score_pair(const AudioClip& clip, const std::string& caption, const Provider& provider,
                       const AhqModel& ahq_model, const ScoringConfig& config) {
  const double threshold = config.volume_threshold;
  return std::move(score_pair_sweep(clip, caption, provider, ahq_model, config, std::span(&threshold, 1)).front());
}

}  // namespace t2a
