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
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace t2a {

enum class Relation { kBefore, kSimultaneous };

std::string_view to_string(Relation rel);
Relation relation_from_string(std::string_view text);

/// rel == kBefore means event i starts before event j.
struct TemporalRelation {
  std::size_t i = 0;
  std::size_t j = 0;
  Relation rel = Relation::kBefore;

  friend bool operator==(const TemporalRelation&, const TemporalRelation&) = default;
};

/// Event captions in described order plus one relation per unordered pair.
struct EventList {
  std::vector<std::string> events;
  std::vector<TemporalRelation> relations;

  std::size_t size() const { return events.size(); }
  Relation relation(std::size_t a, std::size_t b) const;

  /// Builds the full pair cover from relations between neighbours.
  /// Consecutive events joined by kSimultaneous form one group; every pair
  /// inside a group is simultaneous and every other pair is kBefore.
  static EventList from_links(std::vector<std::string> events, std::span<const Relation> links);

  friend bool operator==(const EventList&, const EventList&) = default;
};

/// Throws InputError describing the first violated EventList invariant.
void validate(const EventList& list);

/// Rule-based splitter used by the stub decomposer.
///
/// Clauses are separated by sentence punctuation and by the connectives
/// "followed by", "and then", "then", ", and", "before" (order kept), "after"
/// (the following clause moves in front of the preceding one), "as" and
/// "while" (simultaneous). Throws InputError when nothing is left.
EventList decompose_caption(std::string_view caption);

/// "a, then b while c". A single event is returned verbatim.
std::string compose_caption(const EventList& events);

/// Appends one candidate (uniform over candidates not already present,
/// case-insensitively) as a final event and recomposes. Throws InputError when
/// every candidate is excluded.
std::string make_distractor_caption(const EventList& events, std::span<const std::string> candidates,
                                    std::uint64_t rng_seed);

/// Reverses described order. Index pairs (i, j) map to (n-1-j, n-1-i) so
/// simultaneous pairs survive and the operation is an involution.
EventList reverse_events(const EventList& events);
std::string reverse_caption(const EventList& events);

}  // namespace t2a
