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

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "t2a/dataset.hpp"
#include "t2a/evalharness.hpp"
#include "t2a/scoring.hpp"

namespace t2a {

/// One line of the input manifest.
struct ManifestEntry {
  std::string caption_id;
  std::string caption;
  std::string audio_id;
  std::string audio_path;            // as written in the manifest
  std::filesystem::path resolved;    // relative paths resolved against the manifest directory
  std::string source_model;
};

/// A score line read back: the manifest fields plus the record.
struct ScoreRow {
  ManifestEntry entry;
  ScoreRecord score;
};

struct EvalItem {
  std::string audio_path;
  std::filesystem::path resolved;
  std::string caption;
  std::optional<std::string> distractor;
  std::optional<std::string> reversed;
  std::optional<double> human_label;
};

/// Reads a JSONL file, one object per non-blank line. Errors name the line.
std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path);
void write_jsonl(const std::filesystem::path& path, const std::vector<nlohmann::ordered_json>& rows);
void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& value);

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);

nlohmann::ordered_json score_to_json(const ManifestEntry& entry, const ScoreRecord& score);
ScoreRow score_from_json(const nlohmann::json& row);
std::vector<ScoreRow> read_scores(const std::filesystem::path& path);

/// Pools in order of first appearance of each caption_id.
std::vector<Pool> group_into_pools(const std::vector<ScoreRow>& rows);

nlohmann::ordered_json pair_to_json(const PreferencePair& pair);

std::vector<EvalItem> read_eval_items(const std::filesystem::path& path);
std::vector<TimelineItem> read_timelines(const std::filesystem::path& path);
nlohmann::ordered_json timeline_to_json(const TimelineItem& item);

}  // namespace t2a
