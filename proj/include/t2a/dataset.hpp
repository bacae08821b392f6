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
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "t2a/providers.hpp"
#include "t2a/scoring.hpp"

namespace t2a {

struct PoolEntry {
  std::string audio_id;
  std::string source_model;
  ScoreRecord score;
};

/// All audios generated for one caption.
struct Pool {
  std::string caption_id;
  std::string caption;
  std::vector<PoolEntry> entries;
};

/// Throws InputError for pools smaller than 2 or with repeated audio ids.
void validate(const Pool& pool);

enum class Aggregation {
  kMeanRank,   // mean of the three per-axis ranks
  kMeanScore,  // mean of eos, ess and ahq mapped from [1, 4] onto [-1, 1]
};

struct RankedEntry {
  std::string audio_id;
  std::size_t rank = 0;   // 1..m
  double combined = 0.0;  // mean rank, or mean score under kMeanScore
};

/// Entries ordered best first. Per axis, higher scores rank first, tied
/// scores share their mean rank and a missing ESS counts as 0. The combined
/// order breaks ties by higher eos, then higher ahq, then audio id.
std::vector<RankedEntry> rank_pool(const Pool& pool, Aggregation aggregation = Aggregation::kMeanRank);

enum class PairPolicy { kBestWorst, kAllOrdered };

struct PreferencePair {
  std::string caption;
  std::string chosen_id;
  std::string rejected_id;
  double margin_eos = 0.0;
  std::optional<double> margin_ess;  // nullopt when either side has no ESS
  double margin_ahq = 0.0;
  std::size_t rank_gap = 0;
};

std::vector<PreferencePair> emit_pairs(const Pool& pool, std::span<const RankedEntry> ranking,
                                       PairPolicy policy = PairPolicy::kBestWorst);

struct EventInventory {
  std::vector<std::string> events;
  std::size_t skipped_empty = 0;
};

/// Decomposes every caption and greedily keeps events whose text embedding
/// stays below `overlap_threshold` similarity to everything kept so far.
EventInventory build_event_inventory(std::span<const std::string> captions, const Provider& provider,
                                     double overlap_threshold = 0.85);

/// `count` prompts of `k_events` distinct inventory events each, composed in
/// sampled order. Repeated event sequences are resampled up to 100 times.
std::vector<std::string> compose_prompts(std::span<const std::string> inventory, std::size_t k_events,
                                         std::size_t count, std::uint64_t rng_seed);

}  // namespace t2a
