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
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "t2a/ahq.hpp"
#include "t2a/audio_io.hpp"
#include "t2a/providers.hpp"
#include "t2a/scoring.hpp"

namespace t2a {

struct EvalReport {
  std::string metric_name;
  double value = 0.0;
  std::size_t count = 0;     // items that entered the metric
  std::size_t excluded = 0;  // items dropped because scoring failed
  nlohmann::ordered_json extra = nlohmann::ordered_json::object();
  std::vector<nlohmann::ordered_json> details;
};

/// Scores one (audio, caption) pair; nullopt means "not applicable".
using Scorer = std::function<std::optional<double>(const AudioClip&, const std::string&)>;

Scorer make_eos_scorer(const Provider& provider);
Scorer make_ess_scorer(const Provider& provider, const ScoringConfig& config = {});
Scorer make_ahq_scorer(const Provider& provider, const AhqModel& model);

/// One audio with its ground-truth caption and an interference caption
/// (distractor-extended or order-reversed).
struct CaptionPairItem {
  std::string item_id;
  AudioClip clip;
  std::string gt_caption;
  std::string alt_caption;
};

/// Percentage of items where the ground truth scores strictly higher; ties
/// earn half credit. Items whose scoring throws or is not applicable are
/// excluded and counted. Throws Error when no item could be scored.
EvalReport missing_event_accuracy(std::span<const CaptionPairItem> items, const Scorer& scorer,
                                  int parallelism = 1);

/// Same protocol with order-reversed captions. `event_count`, when given,
/// rejects items with fewer than two events before anything is scored; a
/// not-applicable score is also rejected (InputError), since reversal is
/// undefined there.
EvalReport sequence_accuracy(std::span<const CaptionPairItem> items, const Scorer& scorer, int parallelism = 1,
                             const std::function<std::size_t(const std::string&)>& event_count = {});

struct SegmentTimeline {
  std::string event_label;
  std::vector<std::pair<double, double>> spans;
  double horizon_s = 0.0;
};

struct TimelineItem {
  std::string item_id;
  double horizon_s = 0.0;
  std::vector<SegmentTimeline> events;
};

/// Micro-averaged segment-based F1. Reference and prediction items are joined
/// on item_id (a side that lacks an item counts as empty). Each
/// (segment, label) cell is active when some span overlaps the segment by a
/// positive amount. Both sides empty gives 1.0. Throws InputError when the
/// horizons of a joined item differ.
EvalReport segment_f1(std::span<const TimelineItem> reference, std::span<const TimelineItem> prediction,
                      double segment_len_s = 1.0);

enum class CorrelationKind { kPearson, kSpearman };

/// Throws InputError on length mismatch, fewer than 3 points or constant input.
double correlation(std::span<const double> x, std::span<const double> y, CorrelationKind kind);

/// Percentage of positions where a > b, ties counting half. `extra` carries
/// wins, losses, ties and both means.
EvalReport win_rate(std::span<const double> a, std::span<const double> b);

}  // namespace t2a
