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

#include "t2a/dataset.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <stdexcept>
#include <unordered_map>

#include "t2a/error.hpp"
#include "t2a/rng.hpp"
#include "t2a/stats.hpp"
#include "t2a/text_util.hpp"

namespace t2a {

void validate(const Pool& pool) {
  if (pool.entries.size() < 2) {
    throw InputError("pool '" + pool.caption_id + "' has " + std::to_string(pool.entries.size()) +
                     " entries; ranking needs at least 2");
  }
  std::set<std::string> ids;
  for (const auto& e : pool.entries) {
    if (!ids.insert(e.audio_id).second) {
      throw InputError("pool '" + pool.caption_id + "' repeats audio id '" + e.audio_id + "'");
    }
  }
}

std::vector<RankedEntry> rank_pool(const Pool& pool, Aggregation aggregation) {
  validate(pool);
  const std::size_t m = pool.entries.size();
  std::vector<double> eos(m), ess(m), ahq(m);
  for (std::size_t i = 0; i < m; ++i) {
    const auto& s = pool.entries[i].score;
    eos[i] = s.eos;
    ess[i] = s.ess.value_or(0.0);
    ahq[i] = s.ahq;
  }

  std::vector<double> combined(m);
  if (aggregation == Aggregation::kMeanRank) {
    const auto r_eos = fractional_ranks(eos, true);
    const auto r_ess = fractional_ranks(ess, true);
    const auto r_ahq = fractional_ranks(ahq, true);
    for (std::size_t i = 0; i < m; ++i) combined[i] = (r_eos[i] + r_ess[i] + r_ahq[i]) / 3.0;
  } else {
    for (std::size_t i = 0; i < m; ++i) combined[i] = (eos[i] + ess[i] + (ahq[i] - 2.5) / 1.5) / 3.0;
  }
  const bool lower_is_better = aggregation == Aggregation::kMeanRank;

  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (combined[a] != combined[b]) return lower_is_better ? combined[a] < combined[b] : combined[a] > combined[b];
    if (eos[a] != eos[b]) return eos[a] > eos[b];
    if (ahq[a] != ahq[b]) return ahq[a] > ahq[b];
    return pool.entries[a].audio_id < pool.entries[b].audio_id;
  });

  std::vector<RankedEntry> ranking;
  ranking.reserve(m);
  for (std::size_t pos = 0; pos < m; ++pos) {
    ranking.push_back({pool.entries[order[pos]].audio_id, pos + 1, combined[order[pos]]});
  }
  return ranking;
}

std::vector<PreferencePair> emit_pairs(const Pool& pool, std::span<const RankedEntry> ranking, PairPolicy policy) {
  validate(pool);
  if (ranking.size() != pool.entries.size()) throw std::invalid_argument("ranking does not cover the pool");
  std::unordered_map<std::string, const ScoreRecord*> by_id;
  for (const auto& e : pool.entries) by_id[e.audio_id] = &e.score;

  const auto make = [&](const RankedEntry& chosen, const RankedEntry& rejected) {
    const auto it_c = by_id.find(chosen.audio_id);
    const auto it_r = by_id.find(rejected.audio_id);
    if (it_c == by_id.end() || it_r == by_id.end()) throw std::invalid_argument("ranking names an unknown audio id");
    const ScoreRecord& c = *it_c->second;
    const ScoreRecord& r = *it_r->second;
    PreferencePair pair;
    pair.caption = pool.caption;
    pair.chosen_id = chosen.audio_id;
    pair.rejected_id = rejected.audio_id;
    pair.margin_eos = c.eos - r.eos;
    if (c.ess && r.ess) pair.margin_ess = *c.ess - *r.ess;
    pair.margin_ahq = c.ahq - r.ahq;
    pair.rank_gap = rejected.rank - chosen.rank;
    return pair;
  };

  std::vector<RankedEntry> sorted(ranking.begin(), ranking.end());
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.rank < b.rank; });

  std::vector<PreferencePair> pairs;
  if (policy == PairPolicy::kBestWorst) {
    pairs.push_back(make(sorted.front(), sorted.back()));
    return pairs;
  }
  for (std::size_t a = 0; a < sorted.size(); ++a) {
    for (std::size_t b = a + 1; b < sorted.size(); ++b) pairs.push_back(make(sorted[a], sorted[b]));
  }
  return pairs;
}

EventInventory build_event_inventory(std::span<const std::string> captions, const Provider& provider,
                                     double overlap_threshold) {
  if (captions.empty()) throw std::invalid_argument("event inventory needs at least one caption");
  EventInventory inventory;
  std::vector<EmbeddingVector> kept;
  for (const auto& caption : captions) {
    if (trim(caption).empty()) {
      ++inventory.skipped_empty;
      continue;
    }
    const EventList events = provider.decompose(caption);
    const auto vectors = provider.embed_text(std::span<const std::string>(events.events));
    for (std::size_t i = 0; i < events.size(); ++i) {
      double closest = -1.0;
      for (const auto& k : kept) closest = std::max(closest, similarity(vectors[i], k));
      if (closest < overlap_threshold) {
        inventory.events.push_back(events.events[i]);
        kept.push_back(vectors[i]);
      }
    }
  }
  return inventory;
}

std::vector<std::string> compose_prompts(std::span<const std::string> inventory, std::size_t k_events,
                                         std::size_t count, std::uint64_t rng_seed) {
  if (k_events < 2 || k_events > inventory.size()) {
    throw std::invalid_argument("compose_prompts needs 2 <= k_events <= inventory size");
  }
  if (count < 1) throw std::invalid_argument("compose_prompts needs count >= 1");
  constexpr int kTries = 100;

  Rng rng(rng_seed);
  std::vector<std::size_t> pool(inventory.size());
  std::set<std::vector<std::string>> seen;
  std::vector<std::string> prompts;
  const std::vector<Relation> links(k_events - 1, Relation::kBefore);

  for (std::size_t p = 0; p < count; ++p) {
    bool accepted = false;
    for (int attempt = 0; attempt < kTries && !accepted; ++attempt) {
      std::iota(pool.begin(), pool.end(), 0);
      std::vector<std::string> picked;
      for (std::size_t k = 0; k < k_events; ++k) {
        std::swap(pool[k], pool[k + uniform_index(rng, pool.size() - k)]);
        picked.push_back(inventory[pool[k]]);
      }
      if (seen.insert(picked).second) {
        prompts.push_back(compose_caption(EventList::from_links(std::move(picked), links)));
        accepted = true;
      }
    }
    if (!accepted) {
      throw InputError("could not compose " + std::to_string(count) + " distinct prompts within " +
                       std::to_string(kTries) + " tries (stopped at prompt " + std::to_string(p + 1) + ")");
    }
  }
  return prompts;
}

}  // namespace t2a
