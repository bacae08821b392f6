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

#include "t2a/evalharness.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "t2a/error.hpp"
#include "t2a/parallel.hpp"
#include "t2a/stats.hpp"

namespace t2a {
namespace {

using ojson = nlohmann::ordered_json;

struct PairOutcome {
  std::optional<double> gt;
  std::optional<double> alt;
  std::string error;
  bool not_applicable = false;
};

std::vector<PairOutcome> score_items(std::span<const CaptionPairItem> items, const Scorer& scorer, int parallelism) {
  std::vector<PairOutcome> out(items.size());
  parallel_for(items.size(), parallelism, [&](std::size_t i) {
    auto& o = out[i];
    try {
      o.gt = scorer(items[i].clip, items[i].gt_caption);
      o.alt = scorer(items[i].clip, items[i].alt_caption);
      o.not_applicable = !o.gt || !o.alt;
    } catch (const std::exception& e) {
      o.error = e.what();
    }
  });
  return out;
}

EvalReport accuracy_report(std::string metric, std::span<const CaptionPairItem> items,
                           const std::vector<PairOutcome>& outcomes) {
  EvalReport report;
  report.metric_name = std::move(metric);
  double credit_sum = 0.0;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto& o = outcomes[i];
    ojson row;
    row["item_id"] = items[i].item_id;
    if (!o.error.empty() || o.not_applicable) {
      ++report.excluded;
      row["error"] = o.error.empty() ? "score not applicable" : o.error;
    } else {
      const double credit = *o.gt > *o.alt ? 1.0 : *o.gt == *o.alt ? 0.5 : 0.0;
      credit_sum += credit;
      ++report.count;
      row["gt_score"] = *o.gt;
      row["alt_score"] = *o.alt;
      row["credit"] = credit;
    }
    report.details.push_back(std::move(row));
  }
  if (report.count == 0) throw Error(report.metric_name + ": no item could be scored");
  report.value = 100.0 * credit_sum / static_cast<double>(report.count);
  return report;
}

std::string decompose_or_throw(const Provider& provider, const std::string& caption, EventList& out) {
  out = provider.decompose(caption);
  validate(out);
  return caption;
}

void require_equal_length(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw InputError("length mismatch: " + std::to_string(x.size()) + " vs " + std::to_string(y.size()));
  }
}

double pearson(std::span<const double> x, std::span<const double> y) {
  const double mx = mean(x), my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw InputError("correlation is undefined for constant input");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

}  // namespace

Scorer make_eos_scorer(const Provider& provider) {
  return [&provider](const AudioClip& clip, const std::string& caption) -> std::optional<double> {
    EventList events;
    decompose_or_throw(provider, caption, events);
    return event_occurrence_score(clip, events, provider).eos;
  };
}

Scorer make_ess_scorer(const Provider& provider, const ScoringConfig& config) {
  return [&provider, config](const AudioClip& clip, const std::string& caption) -> std::optional<double> {
    EventList events;
    decompose_or_throw(provider, caption, events);
    return event_sequence_score(clip, events, provider, config.volume_threshold, config.simultaneity_tol_s).ess;
  };
}

Scorer make_ahq_scorer(const Provider& provider, const AhqModel& model) {
  return [&provider, &model](const AudioClip& clip, const std::string&) -> std::optional<double> {
    return ahq_predict(model, provider.embed_audio(clip));
  };
}

EvalReport missing_event_accuracy(std::span<const CaptionPairItem> items, const Scorer& scorer, int parallelism) {
  if (items.empty()) throw InputError("missing-event evaluation needs at least one item");
  return accuracy_report("missing_event_accuracy", items, score_items(items, scorer, parallelism));
}

EvalReport sequence_accuracy(std::span<const CaptionPairItem> items, const Scorer& scorer, int parallelism,
                             const std::function<std::size_t(const std::string&)>& event_count) {
  if (items.empty()) throw InputError("sequence evaluation needs at least one item");
  if (event_count) {
    for (const auto& item : items) {
      if (event_count(item.gt_caption) < 2) {
        throw InputError("item '" + item.item_id + "': single-event caption cannot be order-reversed");
      }
    }
  }
  const auto outcomes = score_items(items, scorer, parallelism);
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (outcomes[i].error.empty() && outcomes[i].not_applicable) {
      throw InputError("item '" + items[i].item_id + "': sequence score not applicable (single event)");
    }
  }
  return accuracy_report("sequence_accuracy", items, outcomes);
}

EvalReport segment_f1(std::span<const TimelineItem> reference, std::span<const TimelineItem> prediction,
                      double segment_len_s) {
  if (!(segment_len_s > 0.0)) throw std::invalid_argument("segment length must be positive");

  // Join on item_id, keeping reference order first.
  std::vector<std::string> ids;
  std::map<std::string, const TimelineItem*> ref_by_id, pred_by_id;
  for (const auto& item : reference) {
    if (!ref_by_id.emplace(item.item_id, &item).second) throw InputError("duplicate reference item " + item.item_id);
    ids.push_back(item.item_id);
  }
  for (const auto& item : prediction) {
    if (!pred_by_id.emplace(item.item_id, &item).second) throw InputError("duplicate prediction item " + item.item_id);
    if (!ref_by_id.contains(item.item_id)) ids.push_back(item.item_id);
  }
  if (ids.empty()) throw InputError("segment F1 needs at least one item");

  EvalReport report;
  report.metric_name = "segment_f1";
  long tp = 0, fp = 0, fn = 0;
  for (const auto& id : ids) {
    const TimelineItem* ref = ref_by_id.contains(id) ? ref_by_id[id] : nullptr;
    const TimelineItem* pred = pred_by_id.contains(id) ? pred_by_id[id] : nullptr;
    const double horizon = ref ? ref->horizon_s : pred->horizon_s;
    if (ref && pred && std::abs(ref->horizon_s - pred->horizon_s) > 1e-9) {
      throw InputError("item '" + id + "': reference horizon " + std::to_string(ref->horizon_s) +
                       " differs from prediction horizon " + std::to_string(pred->horizon_s));
    }
    if (!(horizon > 0.0)) throw InputError("item '" + id + "': horizon must be positive");
    const auto segments = static_cast<std::size_t>(std::ceil(horizon / segment_len_s - 1e-9));

    // label -> (reference activity, predicted activity)
    std::map<std::string, std::pair<std::vector<bool>, std::vector<bool>>> grid;
    const auto mark = [&](const TimelineItem* side, bool is_ref) {
      if (side == nullptr) return;
      for (const auto& ev : side->events) {
        auto& cell = grid[ev.event_label];
        cell.first.resize(segments, false);
        cell.second.resize(segments, false);
        auto& active = is_ref ? cell.first : cell.second;
        for (const auto& [on, off] : ev.spans) {
          if (!(on >= 0.0 && on <= off && off <= horizon + 1e-9)) {
            throw InputError("item '" + id + "', label '" + ev.event_label + "': span [" + std::to_string(on) + ", " +
                             std::to_string(off) + "] outside [0, horizon]");
          }
          const auto lo = static_cast<std::size_t>(std::max(0.0, std::floor(on / segment_len_s) - 1.0));
          const auto hi = std::min(segments - 1, static_cast<std::size_t>(std::floor(off / segment_len_s)) + 1);
          for (std::size_t s = lo; s <= hi; ++s) {
            const double seg_begin = static_cast<double>(s) * segment_len_s;
            const double seg_end = std::min(static_cast<double>(s + 1) * segment_len_s, horizon);
            if (std::min(off, seg_end) - std::max(on, seg_begin) > 0.0) active[s] = true;
          }
        }
      }
    };
    mark(ref, true);
    mark(pred, false);

    long item_tp = 0, item_fp = 0, item_fn = 0;
    for (const auto& [label, cell] : grid) {
      for (std::size_t s = 0; s < segments; ++s) {
        item_tp += cell.first[s] && cell.second[s];
        item_fp += !cell.first[s] && cell.second[s];
        item_fn += cell.first[s] && !cell.second[s];
      }
    }
    tp += item_tp;
    fp += item_fp;
    fn += item_fn;
    ojson row;
    row["item_id"] = id;
    row["tp"] = item_tp;
    row["fp"] = item_fp;
    row["fn"] = item_fn;
    report.details.push_back(std::move(row));
    ++report.count;
  }
  const long denom = 2 * tp + fp + fn;
  report.value = denom == 0 ? 1.0 : static_cast<double>(2 * tp) / static_cast<double>(denom);
  report.extra["tp"] = tp;
  report.extra["fp"] = fp;
  report.extra["fn"] = fn;
  report.extra["segment_len_s"] = segment_len_s;
  return report;
}

double correlation(std::span<const double> x, std::span<const double> y, CorrelationKind kind) {
  require_equal_length(x, y);
  if (x.size() < 3) throw InputError("correlation needs at least 3 points");
  if (kind == CorrelationKind::kPearson) return pearson(x, y);
  const auto rx = fractional_ranks(x, false);
  const auto ry = fractional_ranks(y, false);
  return pearson(rx, ry);
}

EvalReport win_rate(std::span<const double> a, std::span<const double> b) {
  require_equal_length(a, b);
  if (a.empty()) throw InputError("win rate needs at least one matched pair");
  long wins = 0, losses = 0, ties = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] > b[i]) {
      ++wins;
    } else if (a[i] < b[i]) {
      ++losses;
    } else {
      ++ties;
    }
  }
  EvalReport report;
  report.metric_name = "win_rate";
  report.count = a.size();
  report.value = 100.0 * (static_cast<double>(wins) + 0.5 * static_cast<double>(ties)) / static_cast<double>(a.size());
  report.extra["wins"] = wins;
  report.extra["losses"] = losses;
  report.extra["ties"] = ties;
  report.extra["mean_a"] = mean(a);
  report.extra["mean_b"] = mean(b);
  return report;
}

}  // namespace t2a
