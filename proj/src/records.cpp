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

#include "t2a/records.hpp"

#include <fstream>
#include <map>

#include "t2a/error.hpp"

namespace t2a {
namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

std::string where(const std::filesystem::path& path, std::size_t line) {
  return path.string() + ":" + std::to_string(line);
}

std::string require_string(const json& row, const char* key) {
  const auto it = row.find(key);
  if (it == row.end()) throw InputError(std::string("missing field '") + key + "'");
  if (!it->is_string()) throw InputError(std::string("field '") + key + "' must be a string");
  return it->get<std::string>();
}

double require_number(const json& row, const char* key) {
  const auto it = row.find(key);
  if (it == row.end()) throw InputError(std::string("missing field '") + key + "'");
  if (!it->is_number()) throw InputError(std::string("field '") + key + "' must be a number");
  return it->get<double>();
}

std::optional<std::string> optional_string(const json& row, const char* key) {
  const auto it = row.find(key);
  if (it == row.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw InputError(std::string("field '") + key + "' must be a string");
  return it->get<std::string>();
}

std::filesystem::path resolve(const std::filesystem::path& base_file, const std::string& p) {
  std::filesystem::path path(p);
  if (path.is_relative()) path = base_file.parent_path() / path;
  return path.lexically_normal();
}

// Applies `fn` to every row, prefixing errors with file and line.
template <typename Fn>
void for_each_row(const std::filesystem::path& path, Fn&& fn) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      json row = json::parse(text);
      if (!row.is_object()) throw InputError("expected a JSON object");
      fn(row);
    } catch (const json::exception& e) {
      throw InputError(where(path, line) + ": " + e.what());
    } catch (const InputError& e) {
      throw InputError(where(path, line) + ": " + e.what());
    }
  }
}

}  // namespace

std::vector<json> read_jsonl(const std::filesystem::path& path) {
  std::vector<json> rows;
  for_each_row(path, [&](json& row) { rows.push_back(std::move(row)); });
  return rows;
}

void write_jsonl(const std::filesystem::path& path, const std::vector<ojson>& rows) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  for (const auto& row : rows) out << row.dump() << '\n';
  if (!out) throw Error("write error on " + path.string());
}

void write_json(const std::filesystem::path& path, const ojson& value) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << value.dump(2) << '\n';
  if (!out) throw Error("write error on " + path.string());
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
  std::vector<ManifestEntry> entries;
  for_each_row(path, [&](const json& row) {
    ManifestEntry e;
    e.caption_id = require_string(row, "caption_id");
    e.caption = require_string(row, "caption");
    e.audio_id = require_string(row, "audio_id");
    e.audio_path = require_string(row, "audio_path");
    e.source_model = require_string(row, "source_model");
    e.resolved = resolve(path, e.audio_path);
    entries.push_back(std::move(e));
  });
  return entries;
}

ojson score_to_json(const ManifestEntry& entry, const ScoreRecord& score) {
  ojson row;
  row["caption_id"] = entry.caption_id;
  row["caption"] = entry.caption;
  row["audio_id"] = entry.audio_id;
  row["audio_path"] = entry.audio_path;
  row["source_model"] = entry.source_model;
  row["eos"] = score.eos;
  row["eos_per_event"] = score.eos_per_event;
  row["ess"] = score.ess ? ojson(*score.ess) : ojson(nullptr);
  ojson counts;
  counts["C"] = score.ess_counts.concordant;
  counts["D"] = score.ess_counts.discordant;
  counts["n"] = score.ess_counts.n;
  row["ess_counts"] = std::move(counts);
  row["ahq"] = score.ahq;
  return row;
}

ScoreRow score_from_json(const json& row) {
  ScoreRow out;
  out.entry.caption_id = require_string(row, "caption_id");
  out.entry.caption = require_string(row, "caption");
  out.entry.audio_id = require_string(row, "audio_id");
  out.entry.audio_path = require_string(row, "audio_path");
  out.entry.source_model = require_string(row, "source_model");
  out.score.audio_id = out.entry.audio_id;
  out.score.eos = require_number(row, "eos");
  if (row.contains("eos_per_event")) out.score.eos_per_event = row.at("eos_per_event").get<std::vector<double>>();
  if (!row.contains("ess")) throw InputError("missing field 'ess'");
  if (!row.at("ess").is_null()) out.score.ess = require_number(row, "ess");
  if (row.contains("ess_counts")) {
    const auto& c = row.at("ess_counts");
    out.score.ess_counts.concordant = c.at("C").get<long>();
    out.score.ess_counts.discordant = c.at("D").get<long>();
    out.score.ess_counts.n = c.at("n").get<std::size_t>();
  }
  out.score.ahq = require_number(row, "ahq");
  return out;
}

std::vector<ScoreRow> read_scores(const std::filesystem::path& path) {
  std::vector<ScoreRow> rows;
  for_each_row(path, [&](const json& row) { rows.push_back(score_from_json(row)); });
  return rows;
}

std::vector<Pool> group_into_pools(const std::vector<ScoreRow>& rows) {
  std::vector<Pool> pools;
  std::map<std::string, std::size_t> index;
  for (const auto& row : rows) {
    auto [it, inserted] = index.emplace(row.entry.caption_id, pools.size());
    if (inserted) pools.push_back(Pool{row.entry.caption_id, row.entry.caption, {}});
    pools[it->second].entries.push_back(PoolEntry{row.entry.audio_id, row.entry.source_model, row.score});
  }
  return pools;
}

ojson pair_to_json(const PreferencePair& pair) {
  ojson row;
  row["caption"] = pair.caption;
  row["chosen"] = pair.chosen_id;
  row["rejected"] = pair.rejected_id;
  ojson margins;
  margins["eos"] = pair.margin_eos;
  margins["ess"] = pair.margin_ess ? ojson(*pair.margin_ess) : ojson(nullptr);
  margins["ahq"] = pair.margin_ahq;
  row["margins"] = std::move(margins);
  row["rank_gap"] = pair.rank_gap;
  return row;
}

std::vector<EvalItem> read_eval_items(const std::filesystem::path& path) {
  std::vector<EvalItem> items;
  for_each_row(path, [&](const json& row) {
    EvalItem item;
    item.audio_path = require_string(row, "audio_path");
    item.resolved = resolve(path, item.audio_path);
    item.caption = require_string(row, "caption");
    item.distractor = optional_string(row, "distractor");
    item.reversed = optional_string(row, "reversed");
    if (row.contains("human_label") && !row.at("human_label").is_null()) {
      item.human_label = require_number(row, "human_label");
    }
    items.push_back(std::move(item));
  });
  return items;
}

std::vector<TimelineItem> read_timelines(const std::filesystem::path& path) {
  std::vector<TimelineItem> items;
  for_each_row(path, [&](const json& row) {
    TimelineItem item;
    item.item_id = require_string(row, "item_id");
    item.horizon_s = require_number(row, "horizon_s");
    if (!row.contains("events") || !row.at("events").is_array()) throw InputError("'events' must be an array");
    for (const auto& ev : row.at("events")) {
      SegmentTimeline t;
      t.event_label = require_string(ev, "label");
      t.horizon_s = item.horizon_s;
      for (const auto& span : ev.at("spans")) {
        if (!span.is_array() || span.size() != 2) throw InputError("a span must be [onset, offset]");
        t.spans.emplace_back(span[0].get<double>(), span[1].get<double>());
      }
      item.events.push_back(std::move(t));
    }
    items.push_back(std::move(item));
  });
  return items;
}

ojson timeline_to_json(const TimelineItem& item) {
  ojson row;
  row["item_id"] = item.item_id;
  row["horizon_s"] = item.horizon_s;
  ojson events = ojson::array();
  for (const auto& ev : item.events) {
    ojson e;
    e["label"] = ev.event_label;
    ojson spans = ojson::array();
    for (const auto& [on, off] : ev.spans) spans.push_back(ojson::array({on, off}));
    e["spans"] = std::move(spans);
    events.push_back(std::move(e));
  }
  row["events"] = std::move(events);
  return row;
}

}  // namespace t2a
