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

#include "t2a/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "t2a/ahq.hpp"
#include "t2a/dataset.hpp"
#include "t2a/error.hpp"
#include "t2a/evalharness.hpp"
#include "t2a/parallel.hpp"
#include "t2a/records.hpp"
#include "t2a/scoring.hpp"
#include "t2a/stats.hpp"
#include "t2a/synth.hpp"

namespace t2a {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

void reject_unknown(const json& obj, std::initializer_list<const char*> known, const std::string& where) {
  if (!obj.is_object()) throw InputError(where + " must be an object");
  for (const auto& [key, _] : obj.items()) {
    if (std::find_if(known.begin(), known.end(), [&](const char* k) { return key == k; }) == known.end()) {
      throw InputError("unknown config key '" + where + "." + key + "'");
    }
  }
}

fs::path config_path(const fs::path& config_file, const json& value) {
  fs::path p(value.get<std::string>());
  return p.is_relative() ? (config_file.parent_path() / p).lexically_normal() : p;
}

ProviderKind parse_kind(const std::string& s) {
  if (s == "stub") return ProviderKind::kStub;
  if (s == "remote") return ProviderKind::kRemote;
  throw InputError("provider must be 'remote' or 'stub', got '" + s + "'");
}

// Shortest round-trip decimal form, used in file names and tables.
std::string number(double v) { return json(v).dump(); }

struct Workspace {
  RunConfig config;
  std::unique_ptr<Provider> provider;
  std::ostream& out;
  std::ostream& err;

  // Creates the output directory on first use so failed commands leave nothing behind.
  fs::path output(const std::string& name) const {
    fs::create_directories(config.output_dir);
    return config.output_dir / name;
  }
};

AhqModel load_model_or_zero(const RunConfig& config, const Provider& provider) {
  if (!config.ahq_model_path) return AhqModel::zeros(provider.dim());
  AhqModel model = load_ahq_model(*config.ahq_model_path);
  if (model.d != provider.dim()) {
    throw InputError("AHQ model expects dimension " + std::to_string(model.d) + " but the provider yields " +
                     std::to_string(provider.dim()));
  }
  return model;
}

// Lists every missing audio file at once.
template <typename Items, typename PathOf>
void require_files(const Items& items, PathOf path_of) {
  std::ostringstream missing;
  std::size_t count = 0;
  for (const auto& item : items) {
    const fs::path p = path_of(item);
    if (!fs::is_regular_file(p)) {
      missing << "\n  " << p.string();
      ++count;
    }
  }
  if (count > 0) throw InputError(std::to_string(count) + " audio file(s) not found:" + missing.str());
}

ojson error_row(const std::string& id_key, const std::string& id, const std::exception& e) {
  ojson row;
  row[id_key] = id;
  if (const auto* se = dynamic_cast<const ScoringError*>(&e)) {
    row["stage"] = se->stage();
    row["event_index"] = se->event_index() ? ojson(*se->event_index()) : ojson(nullptr);
  } else if (dynamic_cast<const AudioError*>(&e) != nullptr) {
    row["stage"] = "load";
    row["event_index"] = nullptr;
  } else {
    row["stage"] = "score";
    row["event_index"] = nullptr;
  }
  row["error"] = e.what();
  return row;
}

void write_errors(const Workspace& ws, const std::vector<ojson>& errors) {
  const fs::path path = ws.output("errors.jsonl");
  if (errors.empty()) {
    fs::remove(path);
    return;
  }
  write_jsonl(path, errors);
  ws.err << errors.size() << " item(s) failed; see " << path.string() << '\n';
}

ojson summarize(double threshold, std::size_t manifest_items, const std::vector<const ScoreRecord*>& records) {
  std::vector<double> eos, ess, ahq;
  for (const auto* r : records) {
    eos.push_back(r->eos);
    ahq.push_back(r->ahq);
    if (r->ess) ess.push_back(*r->ess);
  }
  ojson s;
  s["threshold"] = threshold;
  s["manifest_items"] = manifest_items;
  s["count"] = records.size();
  s["failed"] = manifest_items - records.size();
  s["eos_mean"] = eos.empty() ? ojson(nullptr) : ojson(mean(eos));
  s["ess_mean"] = ess.empty() ? ojson(nullptr) : ojson(mean(ess));
  s["ess_applicable"] = ess.size();
  s["ahq_mean"] = ahq.empty() ? ojson(nullptr) : ojson(mean(ahq));
  return s;
}

std::string cell(const ojson& v) { return v.is_null() ? "n/a" : v.dump(); }

int cmd_score(Workspace& ws, const fs::path& manifest_path) {
  const auto entries = read_manifest(manifest_path);
  require_files(entries, [](const ManifestEntry& e) { return e.resolved; });
  const AhqModel model = load_model_or_zero(ws.config, *ws.provider);

  ScoringConfig scoring;
  scoring.volume_threshold = ws.config.volume_threshold;
  scoring.simultaneity_tol_s = ws.config.simultaneity_tol_s;
  const std::vector<double> thresholds =
      ws.config.sweep.empty() ? std::vector<double>{ws.config.volume_threshold} : ws.config.sweep;

  std::vector<std::vector<ScoreRecord>> results(entries.size());
  std::vector<std::optional<ojson>> failures(entries.size());
  parallel_for(entries.size(), ws.config.parallelism, [&](std::size_t i) {
    try {
      AudioClip clip = load_wav(entries[i].resolved);
      clip.id = entries[i].audio_id;
      results[i] = score_pair_sweep(clip, entries[i].caption, *ws.provider, model, scoring, thresholds);
    } catch (const std::exception& e) {
      failures[i] = error_row("audio_id", entries[i].audio_id, e);
    }
  });

  std::vector<ojson> errors;
  for (const auto& f : failures) {
    if (f) errors.push_back(*f);
  }
  ojson sweep = ojson::array();
  for (std::size_t t = 0; t < thresholds.size(); ++t) {
    std::vector<ojson> rows;
    std::vector<const ScoreRecord*> records;
    for (std::size_t i = 0; i < entries.size(); ++i) {
      if (failures[i]) continue;
      rows.push_back(score_to_json(entries[i], results[i][t]));
      records.push_back(&results[i][t]);
    }
    const std::string name =
        ws.config.sweep.empty() ? "scores.jsonl" : "scores_t" + number(thresholds[t]) + ".jsonl";
    write_jsonl(ws.output(name), rows);
    ojson summary = summarize(thresholds[t], entries.size(), records);
    ws.out << "threshold " << number(thresholds[t]) << ": " << records.size() << " scored, "
           << errors.size() << " failed, eos " << cell(summary["eos_mean"]) << ", ess "
           << cell(summary["ess_mean"]) << " (" << summary["ess_applicable"].get<std::size_t>()
           << " applicable), ahq " << cell(summary["ahq_mean"]) << '\n';
    sweep.push_back(std::move(summary));
  }
  if (ws.config.sweep.empty()) {
    write_json(ws.output("summary.json"), sweep[0]);
  } else {
    ojson summary;
    summary["sweep"] = std::move(sweep);
    write_json(ws.output("summary.json"), summary);
  }
  write_errors(ws, errors);
  return errors.empty() ? kExitOk : kExitPartial;
}

struct TrainFlags {
  int epochs = 6;
  std::size_t hidden = 64;
};

int cmd_train_ahq(Workspace& ws, const fs::path& labels_path, const fs::path& manifest_path,
                  const TrainFlags& flags) {
  const AhqLabels labels = load_ahq_labels(labels_path);
  if (!labels.dropped.empty()) {
    ws.out << "dropped " << labels.dropped.size() << " row(s) without a strict majority:";
    for (const auto& id : labels.dropped) ws.out << ' ' << id;
    ws.out << '\n';
  }
  const auto entries = read_manifest(manifest_path);
  std::map<std::string, const ManifestEntry*> by_id;
  for (const auto& e : entries) by_id.emplace(e.audio_id, &e);
  std::vector<const ManifestEntry*> matched;
  std::string unknown;
  for (const auto& [id, label] : labels.labels) {
    const auto it = by_id.find(id);
    if (it == by_id.end()) {
      unknown += " " + id;
    } else {
      matched.push_back(it->second);
    }
  }
  if (!unknown.empty()) throw InputError("labelled audio ids missing from the manifest:" + unknown);
  require_files(matched, [](const ManifestEntry* e) { return e->resolved; });

  std::vector<AhqExample> examples(matched.size());
  parallel_for(matched.size(), ws.config.parallelism, [&](std::size_t i) {
    examples[i].embedding = ws.provider->embed_audio(load_wav(matched[i]->resolved));
    examples[i].label = labels.labels[i].second;
  });

  AhqTrainOptions options;
  options.seed = ws.config.seed;
  options.epochs = flags.epochs;
  options.hidden = flags.hidden;
  const AhqTrainResult result = ahq_train(examples, options);
  save_ahq_model(ws.output("ahq_model.bin"), result.model);

  ojson trace;
  trace["examples"] = examples.size();
  trace["dropped"] = labels.dropped;
  trace["epochs"] = options.epochs;
  trace["lr"] = options.lr;
  trace["epoch_loss"] = result.epoch_loss;
  trace["train_accuracy"] = result.train_accuracy;
  write_json(ws.output("ahq_loss.json"), trace);

  std::ostringstream acc;
  acc << std::fixed << std::setprecision(2) << 100.0 * result.train_accuracy;
  ws.out << "train accuracy: " << acc.str() << "% on " << examples.size() << " examples\n";
  return kExitOk;
}

Aggregation parse_aggregation(const std::string& s) {
  if (s == "mean-rank") return Aggregation::kMeanRank;
  if (s == "mean-score") return Aggregation::kMeanScore;
  throw InputError("unknown aggregation '" + s + "'");
}

PairPolicy parse_policy(const std::string& s) {
  if (s == "best-worst") return PairPolicy::kBestWorst;
  if (s == "all-ordered") return PairPolicy::kAllOrdered;
  throw InputError("unknown pair policy '" + s + "'");
}

int cmd_rank(Workspace& ws, const fs::path& scores_path, Aggregation aggregation) {
  const auto pools = group_into_pools(read_scores(scores_path));
  std::vector<ojson> rows, errors;
  for (const auto& pool : pools) {
    try {
      ojson row;
      row["caption_id"] = pool.caption_id;
      row["caption"] = pool.caption;
      ojson ranking = ojson::array();
      for (const auto& r : rank_pool(pool, aggregation)) {
        ojson e;
        e["audio_id"] = r.audio_id;
        e["rank"] = r.rank;
        e["combined"] = r.combined;
        ranking.push_back(std::move(e));
      }
      row["ranking"] = std::move(ranking);
      rows.push_back(std::move(row));
    } catch (const Error& e) {
      errors.push_back(error_row("caption_id", pool.caption_id, e));
    }
  }
  write_jsonl(ws.output("rankings.jsonl"), rows);
  write_errors(ws, errors);
  ws.out << "ranked " << rows.size() << " pool(s)\n";
  return errors.empty() ? kExitOk : kExitPartial;
}

int cmd_pairs(Workspace& ws, const fs::path& scores_path, Aggregation aggregation, PairPolicy policy) {
  const auto pools = group_into_pools(read_scores(scores_path));
  std::vector<ojson> rows, errors;
  for (const auto& pool : pools) {
    try {
      const auto ranking = rank_pool(pool, aggregation);
      for (const auto& pair : emit_pairs(pool, ranking, policy)) rows.push_back(pair_to_json(pair));
    } catch (const Error& e) {
      errors.push_back(error_row("caption_id", pool.caption_id, e));
    }
  }
  write_jsonl(ws.output("pairs.jsonl"), rows);
  write_errors(ws, errors);
  ws.out << "emitted " << rows.size() << " pair(s) from " << pools.size() - errors.size() << " pool(s)\n";
  return errors.empty() ? kExitOk : kExitPartial;
}

void print_table(std::ostream& out, const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> widths;
  for (const auto& row : rows) {
    widths.resize(std::max(widths.size(), row.size()), 0);
    for (std::size_t c = 0; c < row.size(); ++c) widths[c] = std::max(widths[c], row[c].size());
  }
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      out << std::left << std::setw(static_cast<int>(widths[c])) << row[c] << (c + 1 < row.size() ? "  " : "\n");
    }
  }
}

int emit_report(Workspace& ws, const std::string& name, const EvalReport& report) {
  const fs::path details = ws.output("eval_" + name + "_details.jsonl");
  write_jsonl(details, report.details);
  ojson summary;
  summary["metric"] = report.metric_name;
  summary["value"] = report.value;
  summary["count"] = report.count;
  summary["excluded"] = report.excluded;
  for (const auto& [key, value] : report.extra.items()) summary[key] = value;
  summary["details_path"] = details.filename().string();
  write_json(ws.output("eval_" + name + ".json"), summary);
  print_table(ws.out, {{"metric", "value", "count", "excluded"},
                       {report.metric_name, number(report.value), std::to_string(report.count),
                        std::to_string(report.excluded)}});
  return report.excluded == 0 ? kExitOk : kExitPartial;
}

std::vector<AudioClip> load_item_clips(const Workspace& ws, const std::vector<EvalItem>& items) {
  require_files(items, [](const EvalItem& item) { return item.resolved; });
  std::vector<AudioClip> clips(items.size());
  parallel_for(items.size(), ws.config.parallelism, [&](std::size_t i) { clips[i] = load_wav(items[i].resolved); });
  return clips;
}

std::string item_id(std::size_t i) { return "item" + std::to_string(i); }

Scorer make_scorer(const Workspace& ws, const std::string& kind, const AhqModel& model) {
  ScoringConfig scoring;
  scoring.volume_threshold = ws.config.volume_threshold;
  scoring.simultaneity_tol_s = ws.config.simultaneity_tol_s;
  if (kind == "eos") return make_eos_scorer(*ws.provider);
  if (kind == "ess") return make_ess_scorer(*ws.provider, scoring);
  if (kind == "ahq") return make_ahq_scorer(*ws.provider, model);
  throw InputError("unknown scorer '" + kind + "'");
}

int cmd_eval_pairs(Workspace& ws, const fs::path& items_path, const std::string& scorer_kind, bool sequence) {
  const auto items = read_eval_items(items_path);
  if (items.empty()) throw InputError(items_path.string() + ": no items");
  const auto clips = load_item_clips(ws, items);
  const AhqModel model = load_model_or_zero(ws.config, *ws.provider);

  std::vector<CaptionPairItem> pairs;
  for (std::size_t i = 0; i < items.size(); ++i) {
    std::string alt;
    if (sequence) {
      alt = items[i].reversed ? *items[i].reversed : reverse_caption(ws.provider->decompose(items[i].caption));
    } else {
      if (!items[i].distractor) throw InputError(item_id(i) + ": missing 'distractor'");
      alt = *items[i].distractor;
    }
    pairs.push_back({item_id(i), clips[i], items[i].caption, std::move(alt)});
  }
  const Scorer scorer = make_scorer(ws, scorer_kind, model);
  if (sequence) {
    const auto count = [&](const std::string& caption) { return ws.provider->decompose(caption).size(); };
    return emit_report(ws, "sequence", sequence_accuracy(pairs, scorer, ws.config.parallelism, count));
  }
  return emit_report(ws, "missing_event", missing_event_accuracy(pairs, scorer, ws.config.parallelism));
}

int cmd_eval_segment_f1(Workspace& ws, const fs::path& ref_path, const fs::path& pred_path, double segment_len) {
  const auto ref = read_timelines(ref_path);
  const auto pred = read_timelines(pred_path);
  return emit_report(ws, "segment_f1", segment_f1(ref, pred, segment_len));
}

int cmd_eval_correlation(Workspace& ws, const fs::path& items_path, const std::string& scorer_kind,
                         const std::string& kind) {
  if (kind != "spearman" && kind != "pearson") throw InputError("unknown correlation kind '" + kind + "'");
  auto items = read_eval_items(items_path);
  std::erase_if(items, [](const EvalItem& item) { return !item.human_label; });
  const auto clips = load_item_clips(ws, items);
  const AhqModel model = load_model_or_zero(ws.config, *ws.provider);
  const Scorer scorer = make_scorer(ws, scorer_kind, model);

  std::vector<std::optional<double>> scores(items.size());
  std::vector<std::string> failures(items.size());
  parallel_for(items.size(), ws.config.parallelism, [&](std::size_t i) {
    try {
      scores[i] = scorer(clips[i], items[i].caption);
      if (!scores[i]) failures[i] = "score not applicable";
    } catch (const std::exception& e) {
      failures[i] = e.what();
    }
  });

  EvalReport report;
  std::vector<double> x, y;
  for (std::size_t i = 0; i < items.size(); ++i) {
    ojson row;
    row["audio_path"] = items[i].audio_path;
    row["human_label"] = *items[i].human_label;
    if (failures[i].empty()) {
      row["score"] = *scores[i];
      x.push_back(*scores[i]);
      y.push_back(*items[i].human_label);
    } else {
      row["error"] = failures[i];
      ++report.excluded;
    }
    report.details.push_back(std::move(row));
  }
  const double pearson = correlation(x, y, CorrelationKind::kPearson);
  const double spearman = correlation(x, y, CorrelationKind::kSpearman);
  report.metric_name = kind + "_correlation_" + scorer_kind;
  report.value = kind == "spearman" ? spearman : pearson;
  report.count = x.size();
  report.extra["pearson"] = pearson;
  report.extra["spearman"] = spearman;
  return emit_report(ws, "correlation", report);
}

struct CaptionMeans {
  double eos = 0.0;
  std::optional<double> ess;
  double ahq = 0.0;
};

std::vector<std::pair<std::string, CaptionMeans>> caption_means(const std::vector<ScoreRow>& rows) {
  std::vector<std::pair<std::string, CaptionMeans>> out;
  for (const auto& pool : group_into_pools(rows)) {
    std::vector<double> eos, ess, ahq;
    for (const auto& e : pool.entries) {
      eos.push_back(e.score.eos);
      ahq.push_back(e.score.ahq);
      if (e.score.ess) ess.push_back(*e.score.ess);
    }
    CaptionMeans m{mean(eos), std::nullopt, mean(ahq)};
    if (!ess.empty()) m.ess = mean(ess);
    out.emplace_back(pool.caption_id, m);
  }
  return out;
}

int cmd_bench(Workspace& ws, const fs::path& a_path, const fs::path& b_path) {
  const auto a = caption_means(read_scores(a_path));
  const auto b_list = caption_means(read_scores(b_path));
  const std::map<std::string, CaptionMeans> b(b_list.begin(), b_list.end());

  std::vector<double> eos_a, eos_b, ess_a, ess_b, ahq_a, ahq_b;
  std::vector<std::string> unmatched;
  for (const auto& [id, ma] : a) {
    const auto it = b.find(id);
    if (it == b.end()) {
      unmatched.push_back(id);
      continue;
    }
    eos_a.push_back(ma.eos);
    eos_b.push_back(it->second.eos);
    ahq_a.push_back(ma.ahq);
    ahq_b.push_back(it->second.ahq);
    if (ma.ess && it->second.ess) {
      ess_a.push_back(*ma.ess);
      ess_b.push_back(*it->second.ess);
    }
  }
  for (const auto& [id, _] : b_list) {
    if (std::none_of(a.begin(), a.end(), [&](const auto& p) { return p.first == id; })) unmatched.push_back(id);
  }
  if (eos_a.empty()) throw InputError("the two score files share no caption_id");

  ojson axes;
  std::vector<std::vector<std::string>> table{{"axis", "win_rate", "wins", "losses", "ties", "mean_a", "mean_b"}};
  const auto add_axis = [&](const char* name, const std::vector<double>& x, const std::vector<double>& y) {
    if (x.empty()) {
      axes[name] = nullptr;
      table.push_back({name, "n/a", "", "", "", "", ""});
      return;
    }
    const EvalReport r = win_rate(x, y);
    ojson axis;
    axis["value"] = r.value;
    axis["count"] = r.count;
    for (const auto& [key, value] : r.extra.items()) axis[key] = value;
    table.push_back({name, number(r.value), r.extra["wins"].dump(), r.extra["losses"].dump(),
                     r.extra["ties"].dump(), r.extra["mean_a"].dump(), r.extra["mean_b"].dump()});
    axes[name] = std::move(axis);
  };
  add_axis("eos", eos_a, eos_b);
  add_axis("ess", ess_a, ess_b);
  add_axis("ahq", ahq_a, ahq_b);

  ojson report;
  report["metric"] = "win_rate";
  report["count"] = eos_a.size();
  report["axes"] = std::move(axes);
  report["unmatched"] = unmatched;
  write_json(ws.output("bench.json"), report);
  print_table(ws.out, table);
  if (!unmatched.empty()) ws.err << unmatched.size() << " caption_id(s) present in only one file\n";
  return kExitOk;
}

int cmd_prompts(Workspace& ws, const fs::path& captions_path, std::size_t k, std::size_t count) {
  std::ifstream in(captions_path);
  if (!in) throw InputError("cannot open " + captions_path.string());
  std::vector<std::string> captions;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    captions.push_back(line);
  }
  const EventInventory inventory = build_event_inventory(captions, *ws.provider, ws.config.overlap_threshold);
  if (inventory.skipped_empty > 0) ws.err << "skipped " << inventory.skipped_empty << " empty caption(s)\n";
  const auto prompts = compose_prompts(inventory.events, k, count, ws.config.seed);

  std::vector<ojson> inv_rows, prompt_rows;
  for (const auto& e : inventory.events) inv_rows.push_back(ojson{{"event", e}});
  for (const auto& p : prompts) prompt_rows.push_back(ojson{{"prompt", p}});
  write_jsonl(ws.output("inventory.jsonl"), inv_rows);
  write_jsonl(ws.output("prompts.jsonl"), prompt_rows);
  ws.out << inventory.events.size() << " inventory event(s), " << prompts.size() << " prompt(s)\n";
  return kExitOk;
}

int cmd_synth(Workspace& ws, std::size_t captions, std::size_t events) {
  write_demo_corpus(ws.config.output_dir, {captions, events, ws.config.seed});
  ws.out << "wrote demo corpus to " << ws.config.output_dir.string() << '\n';
  return kExitOk;
}

}  // namespace

void validate(const RunConfig& config) {
  if (!(config.volume_threshold > 0.0 && config.volume_threshold < 1.0)) {
    throw InputError("volume threshold must lie in (0, 1)");
  }
  for (double t : config.sweep) {
    if (!(t > 0.0 && t < 1.0)) throw InputError("sweep thresholds must lie in (0, 1), got " + number(t));
  }
  if (!(config.overlap_threshold > 0.0 && config.overlap_threshold <= 1.0)) {
    throw InputError("overlap threshold must lie in (0, 1]");
  }
  if (!(config.simultaneity_tol_s >= 0.0)) throw InputError("simultaneity tolerance must be non-negative");
  if (config.parallelism < 1) throw InputError("parallelism must be at least 1");
  try {
    validate(config.provider);
  } catch (const std::invalid_argument& e) {
    throw InputError(std::string("provider config: ") + e.what());
  }
}

RunConfig load_run_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw InputError(path.string() + ": " + e.what());
  }
  RunConfig config;
  try {
    reject_unknown(doc, {"provider", "thresholds", "ahq_model_path", "parallelism", "seed", "output_dir", "sweep"},
                   "config");
    if (doc.contains("provider")) {
      const json& p = doc["provider"];
      reject_unknown(p,
                     {"kind", "endpoint", "timeout_s", "max_in_flight", "cache_dir", "dim", "batch_size",
                      "lexicon_path", "max_retries", "backoff_ms"},
                     "provider");
      auto& pc = config.provider;
      if (p.contains("kind")) pc.kind = parse_kind(p["kind"].get<std::string>());
      if (p.contains("endpoint")) pc.endpoint_url = p["endpoint"].get<std::string>();
      if (p.contains("timeout_s")) pc.timeout_s = p["timeout_s"].get<double>();
      if (p.contains("max_in_flight")) pc.max_in_flight = p["max_in_flight"].get<int>();
      if (p.contains("cache_dir") && !p["cache_dir"].is_null()) pc.cache_dir = config_path(path, p["cache_dir"]);
      if (p.contains("dim")) pc.dim = p["dim"].get<std::size_t>();
      if (p.contains("batch_size")) pc.batch_size = p["batch_size"].get<std::size_t>();
      if (p.contains("lexicon_path") && !p["lexicon_path"].is_null()) {
        pc.lexicon_path = config_path(path, p["lexicon_path"]);
      }
      if (p.contains("max_retries")) pc.retry.max_retries = p["max_retries"].get<int>();
      if (p.contains("backoff_ms")) {
        pc.retry.backoff.clear();
        for (const auto& ms : p["backoff_ms"]) pc.retry.backoff.emplace_back(ms.get<long>());
      }
    }
    if (doc.contains("thresholds")) {
      const json& t = doc["thresholds"];
      reject_unknown(t, {"volume", "overlap", "simultaneity_tol_s"}, "thresholds");
      if (t.contains("volume")) config.volume_threshold = t["volume"].get<double>();
      if (t.contains("overlap")) config.overlap_threshold = t["overlap"].get<double>();
      if (t.contains("simultaneity_tol_s")) config.simultaneity_tol_s = t["simultaneity_tol_s"].get<double>();
    }
    if (doc.contains("ahq_model_path") && !doc["ahq_model_path"].is_null()) {
      config.ahq_model_path = config_path(path, doc["ahq_model_path"]);
    }
    if (doc.contains("parallelism")) config.parallelism = doc["parallelism"].get<int>();
    if (doc.contains("seed")) config.seed = doc["seed"].get<std::uint64_t>();
    if (doc.contains("output_dir")) config.output_dir = config_path(path, doc["output_dir"]);
    if (doc.contains("sweep")) config.sweep = doc["sweep"].get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw InputError(path.string() + ": " + e.what());
  }
  return config;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Event-level scoring and preference-data tooling for text-to-audio generation", "t2a-score"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_file, provider_kind, endpoint, cache_dir, out_dir, ahq_model;
  std::uint64_t seed = 0;
  int parallelism = 1;
  double threshold = 0.3;
  std::vector<double> sweep;
  app.add_option("--config", config_file, "JSON run configuration");
  auto* seed_opt = app.add_option("--seed", seed, "random seed");
  auto* par_opt = app.add_option("--parallelism", parallelism, "worker threads")->check(CLI::PositiveNumber);
  auto* provider_opt =
      app.add_option("--provider", provider_kind, "remote or stub")->check(CLI::IsMember({"remote", "stub"}));
  auto* endpoint_opt = app.add_option("--endpoint", endpoint, "base URL of the remote provider");
  auto* cache_opt = app.add_option("--cache", cache_dir, "embedding cache directory");
  auto* out_opt = app.add_option("--out", out_dir, "output directory");
  auto* threshold_opt = app.add_option("--threshold", threshold, "volume threshold in (0, 1)");
  auto* sweep_opt = app.add_option("--sweep", sweep, "comma-separated volume thresholds")->delimiter(',');
  auto* ahq_opt = app.add_option("--ahq-model", ahq_model, "trained AHQ model file");

  std::string manifest, labels, scores, scores_b, items, ref, pred, captions;
  std::string aggregation = "mean-rank", policy = "best-worst", scorer, corr_kind = "spearman";
  double segment_len = 1.0;
  TrainFlags train_flags;
  std::size_t k_events = 2, prompt_count = 10, synth_captions = 4, synth_events = 3;

  auto* score = app.add_subcommand("score", "score every manifest line (eos, ess, ahq)");
  score->add_option("manifest", manifest, "manifest JSONL")->required();

  auto* train = app.add_subcommand("train-ahq", "train the quality classifier");
  train->add_option("labels", labels, "label CSV")->required();
  train->add_option("manifest", manifest, "manifest JSONL mapping audio ids to files")->required();
  train->add_option("--epochs", train_flags.epochs)->check(CLI::PositiveNumber);
  train->add_option("--hidden", train_flags.hidden)->check(CLI::PositiveNumber);

  auto* rank = app.add_subcommand("rank", "rank the audios of each caption");
  rank->add_option("scores", scores, "score JSONL")->required();
  rank->add_option("--aggregation", aggregation)->check(CLI::IsMember({"mean-rank", "mean-score"}));

  auto* pairs = app.add_subcommand("pairs", "emit preference pairs");
  pairs->add_option("scores", scores, "score JSONL")->required();
  pairs->add_option("--aggregation", aggregation)->check(CLI::IsMember({"mean-rank", "mean-score"}));
  pairs->add_option("--policy", policy)->check(CLI::IsMember({"best-worst", "all-ordered"}));

  auto* eval = app.add_subcommand("eval", "evaluation protocols");
  eval->require_subcommand(1);
  auto* eval_missing = eval->add_subcommand("missing-event", "ground truth vs distractor caption");
  eval_missing->add_option("items", items, "evaluation item JSONL")->required();
  eval_missing->add_option("--scorer", scorer)->check(CLI::IsMember({"eos", "ess", "ahq"}));
  auto* eval_sequence = eval->add_subcommand("sequence", "ground truth vs order-reversed caption");
  eval_sequence->add_option("items", items, "evaluation item JSONL")->required();
  eval_sequence->add_option("--scorer", scorer)->check(CLI::IsMember({"eos", "ess", "ahq"}));
  auto* eval_f1 = eval->add_subcommand("segment-f1", "segment-based F1 between two timeline files");
  eval_f1->add_option("reference", ref)->required();
  eval_f1->add_option("prediction", pred)->required();
  eval_f1->add_option("--segment-len", segment_len)->check(CLI::PositiveNumber);
  auto* eval_corr = eval->add_subcommand("correlation", "correlation of a score with human labels");
  eval_corr->add_option("items", items, "evaluation item JSONL with human_label")->required();
  eval_corr->add_option("--scorer", scorer)->check(CLI::IsMember({"eos", "ess", "ahq"}));
  eval_corr->add_option("--kind", corr_kind)->check(CLI::IsMember({"spearman", "pearson"}));

  auto* bench = app.add_subcommand("bench", "win rates between two score files");
  bench->add_option("scores_a", scores)->required();
  bench->add_option("scores_b", scores_b)->required();

  auto* prompts = app.add_subcommand("prompts", "build an event inventory and compose multi-event prompts");
  prompts->add_option("captions", captions, "text file, one caption per line")->required();
  prompts->add_option("--k", k_events)->check(CLI::Range(2, 64));
  prompts->add_option("--count", prompt_count)->check(CLI::PositiveNumber);

  auto* synth = app.add_subcommand("synth", "write a synthetic demo corpus for the stub provider");
  synth->add_option("--captions", synth_captions)->check(CLI::PositiveNumber);
  synth->add_option("--events", synth_events)->check(CLI::Range(2, 8));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitFatal;
  }

  try {
    Workspace ws{config_file.empty() ? RunConfig{} : load_run_config(config_file), nullptr, out, err};
    RunConfig& cfg = ws.config;
    if (seed_opt->count() > 0) cfg.seed = seed;
    if (par_opt->count() > 0) cfg.parallelism = parallelism;
    if (provider_opt->count() > 0) cfg.provider.kind = parse_kind(provider_kind);
    if (endpoint_opt->count() > 0) cfg.provider.endpoint_url = endpoint;
    if (cache_opt->count() > 0) cfg.provider.cache_dir = fs::path(cache_dir);
    if (out_opt->count() > 0) cfg.output_dir = out_dir;
    if (threshold_opt->count() > 0) cfg.volume_threshold = threshold;
    if (sweep_opt->count() > 0) cfg.sweep = sweep;
    if (ahq_opt->count() > 0) cfg.ahq_model_path = fs::path(ahq_model);
    if (const char* token = std::getenv("T2A_PROVIDER_TOKEN")) cfg.provider.bearer_token = token;
    validate(cfg);

    if (*synth) return cmd_synth(ws, synth_captions, synth_events);
    if (*rank) return cmd_rank(ws, scores, parse_aggregation(aggregation));
    if (*pairs) return cmd_pairs(ws, scores, parse_aggregation(aggregation), parse_policy(policy));
    if (*bench) return cmd_bench(ws, scores, scores_b);
    if (*eval_f1) return cmd_eval_segment_f1(ws, ref, pred, segment_len);

    ws.provider = make_provider(cfg.provider);
    if (*score) return cmd_score(ws, manifest);
    if (*train) return cmd_train_ahq(ws, labels, manifest, train_flags);
    if (*eval_missing) return cmd_eval_pairs(ws, items, scorer.empty() ? "eos" : scorer, false);
    if (*eval_sequence) return cmd_eval_pairs(ws, items, scorer.empty() ? "ess" : scorer, true);
    if (*eval_corr) return cmd_eval_correlation(ws, items, scorer.empty() ? "ahq" : scorer, corr_kind);
    if (*prompts) return cmd_prompts(ws, captions, k_events, prompt_count);
    err << "error: no command\n";
    return kExitFatal;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFatal;
  }
}

}  // namespace t2a
