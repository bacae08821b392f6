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

#include "t2a/event_text.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <tuple>
#include <unordered_set>
#include <utility>

#include "t2a/error.hpp"
#include "t2a/rng.hpp"
#include "t2a/text_util.hpp"

namespace t2a {
namespace {

// How a clause attaches to the clause before it.
enum class Link { kBefore, kAfter, kSimultaneous };

struct Token {
  std::string lower;  // empty for commas
  std::size_t begin = 0;
  std::size_t end = 0;
  bool comma = false;
};

std::vector<Token> tokenize(std::string_view sentence) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < sentence.size()) {
    const char c = sentence[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (c == ',') {
      tokens.push_back({{}, i, i + 1, true});
      ++i;
    } else {
      const std::size_t begin = i;
      while (i < sentence.size() && sentence[i] != ',' &&
             !std::isspace(static_cast<unsigned char>(sentence[i]))) {
        ++i;
      }
      tokens.push_back({ascii_lower(sentence.substr(begin, i - begin)), begin, i, false});
    }
  }
  return tokens;
}

// Length of the connective starting at tokens[t] (0 if none) and its link.
std::pair<std::size_t, Link> match_connective(const std::vector<Token>& tokens, std::size_t t) {
  const auto word = [&](std::size_t k) -> std::string_view {
    return k < tokens.size() && !tokens[k].comma ? std::string_view(tokens[k].lower) : std::string_view();
  };
  const std::string_view w = word(t);
  if (w.empty()) return {0, Link::kBefore};
  if (w == "followed" && word(t + 1) == "by") return {2, Link::kBefore};
  if (w == "and" && word(t + 1) == "then") return {2, Link::kBefore};
  if (w == "then" || w == "before") return {1, Link::kBefore};
  if (w == "after") return {1, Link::kAfter};
  if (w == "as" || w == "while") return {1, Link::kSimultaneous};
  if (w == "and" && t > 0 && tokens[t - 1].comma) return {1, Link::kBefore};
  return {0, Link::kBefore};
}

std::string clause_text(std::string_view sentence, const std::vector<Token>& tokens, std::size_t from,
                        std::size_t to) {
  while (from < to && tokens[from].comma) ++from;
  while (to > from && tokens[to - 1].comma) --to;
  if (from >= to) return {};
  return std::string(trim(sentence.substr(tokens[from].begin, tokens[to - 1].end - tokens[from].begin)));
}

struct Clause {
  std::string text;
  Link link = Link::kBefore;  // ignored for the first clause overall
};

void split_sentence(std::string_view sentence, std::vector<Clause>& out) {
  const auto tokens = tokenize(sentence);
  if (tokens.empty()) return;

  // "After X, Y" / "Before X, Y" / "While X, Y": a leading subordinate clause
  // that ends at the first comma.
  if (!tokens[0].comma) {
    const std::string& lead = tokens[0].lower;
    const bool subordinate = lead == "after" || lead == "before" || lead == "while" || lead == "as";
    const auto comma = std::find_if(tokens.begin() + 1, tokens.end(), [](const Token& t) { return t.comma; });
    if (subordinate && comma != tokens.end()) {
      const auto split = static_cast<std::size_t>(comma - tokens.begin());
      std::string first = clause_text(sentence, tokens, 1, split);
      if (!first.empty()) {
        out.push_back({std::move(first), Link::kBefore});
        const Link next = lead == "after" ? Link::kBefore : lead == "before" ? Link::kAfter : Link::kSimultaneous;
        std::vector<Clause> rest;
        split_sentence(sentence.substr(tokens[split].end), rest);
        if (!rest.empty()) rest.front().link = next;
        out.insert(out.end(), std::make_move_iterator(rest.begin()), std::make_move_iterator(rest.end()));
        return;
      }
    }
  }

  Link pending = Link::kBefore;
  std::size_t clause_begin = 0;
  std::size_t t = 0;
  while (t < tokens.size()) {
    const auto [len, link] = match_connective(tokens, t);
    if (len == 0) {
      ++t;
      continue;
    }
    std::string text = clause_text(sentence, tokens, clause_begin, t);
    if (!text.empty()) {
      out.push_back({std::move(text), pending});
      pending = link;
    } else if (clause_begin != 0) {
      // Back-to-back connectives: the later one decides the link.
      pending = link;
    }
    t += len;
    clause_begin = t;
  }
  std::string tail = clause_text(sentence, tokens, clause_begin, tokens.size());
  if (!tail.empty()) out.push_back({std::move(tail), pending});
}

}  // namespace

std::string_view to_string(Relation rel) {
  return rel == Relation::kBefore ? "BEFORE" : "SIMULTANEOUS";
}

Relation relation_from_string(std::string_view text) {
  if (text == "BEFORE") return Relation::kBefore;
  if (text == "SIMULTANEOUS") return Relation::kSimultaneous;
  throw InputError("unknown temporal relation '" + std::string(text) + "'");
}

Relation EventList::relation(std::size_t a, std::size_t b) const {
  const std::size_t lo = std::min(a, b);
  const std::size_t hi = std::max(a, b);
  for (const auto& r : relations) {
    if (r.i == lo && r.j == hi) return r.rel;
  }
  throw std::out_of_range("no relation for pair (" + std::to_string(lo) + ", " + std::to_string(hi) + ")");
}

EventList EventList::from_links(std::vector<std::string> events, std::span<const Relation> links) {
  if (!events.empty() && links.size() + 1 != events.size()) {
    throw std::invalid_argument("from_links needs exactly one link between neighbouring events");
  }
  std::vector<std::size_t> group(events.size(), 0);
  for (std::size_t k = 1; k < events.size(); ++k) {
    group[k] = group[k - 1] + (links[k - 1] == Relation::kSimultaneous ? 0 : 1);
  }
  EventList list;
  list.events = std::move(events);
  for (std::size_t i = 0; i < list.events.size(); ++i) {
    for (std::size_t j = i + 1; j < list.events.size(); ++j) {
      list.relations.push_back({i, j, group[i] == group[j] ? Relation::kSimultaneous : Relation::kBefore});
    }
  }
  return list;
}

void validate(const EventList& list) {
  const std::size_t n = list.events.size();
  if (n == 0) throw InputError("event list is empty");
  for (std::size_t k = 0; k < n; ++k) {
    if (trim(list.events[k]).empty()) throw InputError("event " + std::to_string(k) + " is empty");
  }
  if (list.relations.size() != n * (n - 1) / 2) {
    throw InputError("expected " + std::to_string(n * (n - 1) / 2) + " relations, got " +
                     std::to_string(list.relations.size()));
  }
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (const auto& r : list.relations) {
    if (!(r.i < r.j && r.j < n)) {
      throw InputError("invalid relation pair (" + std::to_string(r.i) + ", " + std::to_string(r.j) + ")");
    }
    if (!seen.emplace(r.i, r.j).second) {
      throw InputError("duplicate relation pair (" + std::to_string(r.i) + ", " + std::to_string(r.j) + ")");
    }
  }
}

EventList decompose_caption(std::string_view caption) {
  if (trim(caption).empty()) throw InputError("caption is empty");

  std::vector<Clause> clauses;
  std::size_t begin = 0;
  for (std::size_t i = 0; i <= caption.size(); ++i) {
    const bool boundary = i == caption.size() || caption[i] == '.' || caption[i] == '!' || caption[i] == '?' ||
                          caption[i] == ';' || caption[i] == '\n';
    if (!boundary) continue;
    std::vector<Clause> sentence;
    split_sentence(caption.substr(begin, i - begin), sentence);
    clauses.insert(clauses.end(), std::make_move_iterator(sentence.begin()),
                   std::make_move_iterator(sentence.end()));
    begin = i + 1;
  }
  if (clauses.empty()) throw InputError("caption has no event clauses: '" + std::string(caption) + "'");

  std::vector<std::string> order;
  std::vector<Relation> links;
  for (auto& clause : clauses) {
    if (order.empty()) {
      order.push_back(std::move(clause.text));
      continue;
    }
    switch (clause.link) {
      case Link::kBefore:
        order.push_back(std::move(clause.text));
        links.push_back(Relation::kBefore);
        break;
      case Link::kSimultaneous:
        order.push_back(std::move(clause.text));
        links.push_back(Relation::kSimultaneous);
        break;
      case Link::kAfter:
        // The new clause happened first: slot it in front of its predecessor,
        // which inherits the old link to the clause before it.
        order.insert(order.end() - 1, std::move(clause.text));
        links.push_back(Relation::kBefore);
        break;
    }
  }
  return EventList::from_links(std::move(order), links);
}

std::string compose_caption(const EventList& events) {
  validate(events);
  std::string out = events.events.front();
  for (std::size_t k = 1; k < events.size(); ++k) {
    out += events.relation(k - 1, k) == Relation::kBefore ? ", then " : " while ";
    out += events.events[k];
  }
  return out;
}

std::string make_distractor_caption(const EventList& events, std::span<const std::string> candidates,
                                    std::uint64_t rng_seed) {
  validate(events);
  std::unordered_set<std::string> present;
  for (const auto& e : events.events) present.insert(ascii_lower(trim(e)));

  std::vector<std::string> eligible;
  for (const auto& c : candidates) {
    const std::string key = ascii_lower(trim(c));
    if (!key.empty() && !present.contains(key)) eligible.push_back(std::string(trim(c)));
  }
  if (eligible.empty()) throw InputError("every distractor candidate already occurs in the caption");

  Rng rng(rng_seed);
  EventList extended = events;
  const std::size_t n = extended.size();
  extended.events.push_back(eligible[uniform_index(rng, eligible.size())]);
  for (std::size_t i = 0; i < n; ++i) extended.relations.push_back({i, n, Relation::kBefore});
  std::sort(extended.relations.begin(), extended.relations.end(),
            [](const auto& a, const auto& b) { return std::tie(a.i, a.j) < std::tie(b.i, b.j); });
  return compose_caption(extended);
}

EventList reverse_events(const EventList& events) {
  validate(events);
  const std::size_t n = events.size();
  if (n < 2) throw InputError("cannot reverse a single-event caption");
  const bool any_before = std::any_of(events.relations.begin(), events.relations.end(),
                                      [](const auto& r) { return r.rel == Relation::kBefore; });
  if (!any_before) throw InputError("cannot reverse a caption whose events are all simultaneous");

  EventList out;
  out.events.assign(events.events.rbegin(), events.events.rend());
  for (const auto& r : events.relations) out.relations.push_back({n - 1 - r.j, n - 1 - r.i, r.rel});
  std::sort(out.relations.begin(), out.relations.end(),
            [](const auto& a, const auto& b) { return std::tie(a.i, a.j) < std::tie(b.i, b.j); });
  return out;
}

std::string reverse_caption(const EventList& events) { return compose_caption(reverse_events(events)); }

}  // namespace t2a
