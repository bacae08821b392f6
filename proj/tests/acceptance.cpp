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

// Acceptance gate: one PASS/FAIL line per criterion, non-zero exit on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "t2a/cli.hpp"
#include "t2a/dataset.hpp"
#include "t2a/evalharness.hpp"
#include "t2a/scoring.hpp"
#include "test_support.hpp"

using namespace t2a;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      if (pass) detail << "first failure: " << what << "; ";
      pass = false;
    }
  }
};

EventList all_before(std::size_t n) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < n; ++i) names.push_back("e" + std::to_string(i));
  return EventList::from_links(names, std::vector<Relation>(n - 1, Relation::kBefore));
}

const StubProvider& stub() {
  static const StubProvider provider(512, StubLexicon::builtin());
  return provider;
}

struct Burst {
  AudioClip clip;
  double onset = 0.0;
  double offset = 0.0;
};

std::vector<Burst> random_bursts(std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Burst> out;
  for (int i = 0; i < 100; ++i) {
    const double onset = uniform_real(rng, 0.1, 1.5);
    const double duration = uniform_real(rng, 0.2, 2.0);
    const double tail = uniform_real(rng, 0.1, 1.0);
    const ToneEvent tone{uniform_real(rng, 150.0, 4000.0), onset, onset + duration, uniform_real(rng, 0.1, 0.9), 0.0};
    out.push_back({render_events(std::span(&tone, 1), onset + duration + tail), onset, onset + duration});
  }
  return out;
}

Outcome kendall_oracle() {
  Outcome o;
  Rng rng(1);
  const auto start = Clock::now();
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + uniform_index(rng, 7);
    std::vector<double> onset(n), described(n);
    std::iota(onset.begin(), onset.end(), 0.0);
    std::iota(described.begin(), described.end(), 0.0);
    shuffle(std::span(onset), rng);
    std::vector<EventSpan> spans;
    for (std::size_t i = 0; i < n; ++i) spans.push_back({i, onset[i], onset[i] + 0.5, true});
    const auto r = sequence_score(all_before(n), spans);
    const auto pc = oracle::ordered_pairs(onset, std::vector<bool>(n, true), [](std::size_t, std::size_t) { return false; }, 0.5);
    o.require(r.counts.concordant == pc.c && r.counts.discordant == pc.d, "pair counts, trial " + std::to_string(trial));
    o.require(*r.ess == oracle::kendall_tau(described, onset), "tau, trial " + std::to_string(trial));
  }
  const double elapsed = seconds_since(start);
  o.require(elapsed < 1.0, "runtime");
  o.detail << "1000 permutations exact, " << elapsed << " s";
  return o;
}

Outcome stub_pipeline() {
  Outcome o;
  const auto start = Clock::now();
  const testing::ThreeEventFixture fx;
  const AudioClip clip = fx.render({0, 1, 2});
  const AhqModel zero = AhqModel::zeros(512);
  const auto ordered = score_pair(clip, fx.caption({0, 1, 2}), stub(), zero);
  const auto reversed = score_pair(clip, fx.caption({2, 1, 0}), stub(), zero);
  const auto swapped = score_pair(clip, fx.caption({0, 2, 1}), stub(), zero);
  const double elapsed = seconds_since(start);
  o.require(ordered.ess && *ordered.ess == 1.0, "ordered ess");
  o.require(ordered.eos >= 0.99, "ordered eos");
  o.require(reversed.ess && *reversed.ess == -1.0, "reversed ess");
  o.require(swapped.ess && *swapped.ess == 1.0 / 3.0, "swapped ess");
  o.require(elapsed < 5.0, "runtime");
  o.detail << "ess " << ordered.ess.value_or(NAN) << " / " << reversed.ess.value_or(NAN) << " / "
           << swapped.ess.value_or(NAN) << ", eos " << ordered.eos << ", " << elapsed << " s";
  return o;
}

Outcome onset_accuracy() {
  Outcome o;
  double worst = 0.0;
  for (const auto& b : random_bursts(2)) {
    const EventSpan span = detect_active_span(normalize_envelope(compute_envelope(b.clip)), 0.3);
    o.require(span.detected, "burst not detected");
    const double err = std::max(std::fabs(span.onset_s - b.onset), std::fabs(span.offset_s - b.offset));
    worst = std::max(worst, err);
  }
  o.require(worst <= 0.010 + 1e-12, "error above one hop");
  o.detail << "100 bursts, worst onset/offset error " << worst * 1000.0 << " ms";
  return o;
}

Outcome threshold_sweep() {
  Outcome o;
  const double thresholds[] = {0.1, 0.3, 0.5};
  for (const auto& b : random_bursts(3)) {
    const Envelope env = normalize_envelope(compute_envelope(b.clip));
    EventSpan prev = detect_active_span(env, thresholds[0]);
    for (std::size_t t = 1; t < 3; ++t) {
      const EventSpan next = detect_active_span(env, thresholds[t]);
      o.require(prev.contains(next), "spans not nested");
      prev = next;
    }
  }
  Rng rng(4);
  const auto& entries = stub().lexicon().entries();
  int fixtures = 0;
  for (int trial = 0; trial < 10; ++trial, ++fixtures) {
    const std::size_t n = 2 + uniform_index(rng, 3);
    std::vector<std::size_t> idx(entries.size());
    std::iota(idx.begin(), idx.end(), 0);
    shuffle(std::span(idx), rng);
    std::vector<ToneEvent> tones;
    std::vector<std::string> names;
    for (std::size_t k = 0; k < n; ++k) {
      const double start = 0.2 + 1.1 * static_cast<double>(k);
      tones.push_back({entries[idx[k]].center_hz, start, start + 0.9, uniform_real(rng, 0.2, 0.8), 0.005});
      names.push_back(entries[idx[k]].text);
    }
    const AudioClip clip = render_events(tones, 0.5 + 1.1 * static_cast<double>(n));
    const std::string caption = compose_caption(EventList::from_links(names, std::vector<Relation>(n - 1, Relation::kBefore)));
    const auto recs = score_pair_sweep(clip, caption, stub(), AhqModel::zeros(512), {}, thresholds);
    for (const auto& r : recs) o.require(r.ess && *r.ess == 1.0, "ordered fixture ess != 1");
  }
  o.detail << "100 bursts nested over {0.1, 0.3, 0.5}; " << fixtures << " ordered fixtures at ess 1.0";
  return o;
}

Outcome ahq_trainer() {
  Outcome o;
  const auto set = testing::make_clusters(1000, 512, 7);
  std::size_t oracle_hits = 0;
  for (const auto& ex : set.examples) oracle_hits += testing::nearest_centroid(set, ex.embedding) == ex.label;
  o.require(oracle_hits == set.examples.size(), "nearest-centroid oracle below 100%");

  AhqTrainOptions opts;
  opts.seed = 11;
  const auto a = ahq_train(set.examples, opts);
  const auto b = ahq_train(set.examples, opts);
  o.require(a.train_accuracy >= 0.95, "accuracy");
  o.require(a.model == b.model, "not bitwise identical");

  const auto small = testing::make_clusters(40, 24, 3, 1.5);
  AhqTrainOptions small_opts;
  small_opts.epochs = 1;
  small_opts.hidden = 8;
  AhqModel model = ahq_train(small.examples, small_opts).model;
  std::vector<std::size_t> idx(small.examples.size());
  std::iota(idx.begin(), idx.end(), 0);
  AhqParams grad;
  ahq_loss(model, small.examples, idx, &grad);
  Rng rng(8);
  double worst = 0.0;
  for (int k = 0; k < 10; ++k) {
    const std::size_t which = uniform_index(rng, 4);
    std::vector<double>* param = which == 0 ? &model.w1 : which == 1 ? &model.b1 : which == 2 ? &model.w2 : &model.b2;
    const std::vector<double>& g = which == 0 ? grad.w1 : which == 1 ? grad.b1 : which == 2 ? grad.w2 : grad.b2;
    const std::size_t at = uniform_index(rng, param->size());
    const double saved = (*param)[at];
    (*param)[at] = saved + 1e-4;
    const double up = ahq_loss(model, small.examples, idx);
    (*param)[at] = saved - 1e-4;
    const double down = ahq_loss(model, small.examples, idx);
    (*param)[at] = saved;
    const double numeric = (up - down) / 2e-4;
    worst = std::max(worst, std::fabs(numeric - g[at]) / std::max({std::fabs(numeric), std::fabs(g[at]), 1e-7}));
  }
  o.require(worst <= 1e-4, "gradient check");
  o.detail << "train accuracy " << a.train_accuracy * 100.0 << "%, worst gradient rel. error " << worst
           << ", seeds reproduce bitwise";
  return o;
}

std::vector<TimelineItem> to_items(const std::vector<oracle::Timeline>& timelines) {
  std::vector<TimelineItem> out;
  for (const auto& t : timelines) {
    TimelineItem item{t.id, t.horizon, {}};
    for (const auto& [label, span] : t.spans) {
      auto it = std::find_if(item.events.begin(), item.events.end(),
                             [&](const SegmentTimeline& e) { return e.event_label == label; });
      if (it == item.events.end()) {
        item.events.push_back({label, {}, t.horizon});
        it = item.events.end() - 1;
      }
      it->spans.push_back(span);
    }
    out.push_back(std::move(item));
  }
  return out;
}

Outcome segment_f1_oracle() {
  Outcome o;
  Rng rng(64);
  const char* labels[] = {"dog", "bell", "rain"};
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<oracle::Timeline> ref, pred;
    const std::size_t items = 1 + uniform_index(rng, 4);
    for (std::size_t i = 0; i < items; ++i) {
      const double horizon = 0.25 * static_cast<double>(4 + uniform_index(rng, 40));
      oracle::Timeline a{"t" + std::to_string(i), horizon, {}}, b = a;
      for (auto* side : {&a, &b}) {
        const std::size_t spans = uniform_index(rng, 5);
        for (std::size_t s = 0; s < spans; ++s) {
          const double on = uniform_index(rng, 3) == 0 ? std::floor(uniform_real(rng, 0.0, horizon)) : uniform_real(rng, 0.0, horizon);
          const double off = std::min(horizon, on + uniform_real(rng, 0.0, 3.0));
          side->spans.push_back({labels[uniform_index(rng, 3)], {on, off}});
        }
      }
      const std::size_t mode = uniform_index(rng, 6);
      if (mode != 0) ref.push_back(a);
      if (mode != 1) pred.push_back(b);
    }
    const auto expected = oracle::segment_grid(ref, pred, 1.0);
    const auto report = segment_f1(to_items(ref), to_items(pred), 1.0);
    o.require(report.extra["tp"].get<long>() == expected.tp && report.extra["fp"].get<long>() == expected.fp &&
                  report.extra["fn"].get<long>() == expected.fn && report.value == expected.f1(),
              "grid mismatch, trial " + std::to_string(trial));
  }
  const std::vector<oracle::Timeline> ref = {{"x", 10.0, {{"dog", {2.0, 5.0}}}}};
  const std::vector<oracle::Timeline> pred = {{"x", 10.0, {{"dog", {3.0, 7.0}}}}};
  const auto expected = oracle::segment_grid(ref, pred, 1.0);
  const auto report = segment_f1(to_items(ref), to_items(pred), 1.0);
  o.require(expected.tp == 2 && expected.fp == 2 && expected.fn == 1, "hand-worked grid counts");
  o.require(report.value == expected.f1(), "hand-worked value");
  o.detail << "200 random timelines exact; [2,5] vs [3,7] over 10 s: TP " << report.extra["tp"] << " FP "
           << report.extra["fp"] << " FN " << report.extra["fn"] << ", F1 " << report.value << " (4/7)";
  return o;
}

Outcome ranking_algebra() {
  Outcome o;
  Rng rng(77);
  for (int trial = 0; trial < 500; ++trial) {
    Pool pool;
    pool.caption = "c";
    const std::size_t m = 2 + uniform_index(rng, 9);
    for (std::size_t i = 0; i < m; ++i) {
      PoolEntry e;
      e.audio_id = "a" + std::to_string(i);
      e.score.eos = -1.0 + 0.25 * static_cast<double>(uniform_index(rng, 9));
      if (uniform_index(rng, 4) != 0) e.score.ess = -1.0 + 0.5 * static_cast<double>(uniform_index(rng, 5));
      e.score.ahq = 1.0 + 0.5 * static_cast<double>(uniform_index(rng, 7));
      pool.entries.push_back(e);
    }
    const auto ranking = rank_pool(pool);
    std::vector<std::size_t> ranks;
    std::vector<std::string> ids;
    for (const auto& r : ranking) ranks.push_back(r.rank), ids.push_back(r.audio_id);
    std::vector<std::size_t> expected(m);
    std::iota(expected.begin(), expected.end(), 1);
    o.require(ranks == expected, "not a permutation");

    Pool warped = pool;
    for (auto& e : warped.entries) {
      e.score.eos = std::pow(e.score.eos, 3);
      if (e.score.ess) e.score.ess = 0.5 * *e.score.ess;  // a missing ess ranks as 0, so keep 0 fixed
      e.score.ahq = 1.0 + 0.3 * (e.score.ahq - 1.0);
    }
    std::vector<std::string> warped_ids;
    for (const auto& r : rank_pool(warped)) warped_ids.push_back(r.audio_id);
    o.require(warped_ids == ids, "monotone transform changed the order");

    const auto pairs = emit_pairs(pool, ranking, PairPolicy::kBestWorst);
    o.require(pairs.size() == 1 && pairs[0].rank_gap == m - 1, "best-worst gap");
  }
  o.detail << "500 random pools";
  return o;
}

Outcome harness_baselines() {
  Outcome o;
  std::vector<CaptionPairItem> items(200);
  for (std::size_t i = 0; i < items.size(); ++i) items[i] = {"i" + std::to_string(i), {}, "gt", "alt"};
  const Scorer tie = [](const AudioClip&, const std::string&) -> std::optional<double> { return 0.5; };
  const double tie_acc = missing_event_accuracy(items, tie).value;
  o.require(tie_acc == 50.0, "tie accuracy");
  Rng rng(5);
  double self = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + uniform_index(rng, 50);
    std::vector<double> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = static_cast<double>(uniform_index(rng, 4));
      b[i] = static_cast<double>(uniform_index(rng, 4));
    }
    self = win_rate(a, a).value;
    o.require(self == 50.0, "win_rate(a, a)");
    o.require(std::fabs(win_rate(a, b).value + win_rate(b, a).value - 100.0) <= 1e-9, "antisymmetry");
  }
  o.detail << "tie accuracy " << tie_acc << "%, win_rate(a,a) " << self << "%, antisymmetry on 100 vectors";
  return o;
}

Outcome end_to_end_determinism(Clock::time_point suite_start) {
  Outcome o;
  const testing::TempDir dir("acceptance");
  DemoCorpusOptions opts;
  opts.captions = 4;
  opts.seed = 1;
  write_demo_corpus(dir.path(), opts);
  const std::vector<std::string> artifacts = {"scores.jsonl", "rankings.jsonl", "pairs.jsonl"};
  std::vector<std::string> first;
  for (int pass = 0; pass < 2; ++pass) {
    const std::string out = (dir / ("run" + std::to_string(pass))).string();
    const std::string manifest = (dir / "manifest.jsonl").string();
    const std::string scores = out + "/scores.jsonl";
    const std::vector<std::vector<std::string>> commands = {
        {"t2a-score", "--seed", "42", "--parallelism", "4", "--out", out, "score", manifest},
        {"t2a-score", "--seed", "42", "--out", out, "rank", scores},
        {"t2a-score", "--seed", "42", "--out", out, "pairs", scores}};
    for (const auto& args : commands) {
      std::vector<const char*> argv;
      for (const auto& a : args) argv.push_back(a.c_str());
      std::ostringstream sink;
      const int code = run_cli(static_cast<int>(argv.size()), argv.data(), sink, sink);
      o.require(code == kExitOk, args[args.size() - 2] + " exited " + std::to_string(code));
    }
    for (std::size_t k = 0; k < artifacts.size(); ++k) {
      const std::string bytes = testing::read_file(fs::path(out) / artifacts[k]);
      o.require(!bytes.empty(), artifacts[k] + " empty");
      if (pass == 0) {
        first.push_back(bytes);
      } else {
        o.require(bytes == first[k], artifacts[k] + " differs between runs");
      }
    }
  }
  const double elapsed = seconds_since(suite_start);
  o.require(elapsed < 60.0, "suite runtime");
  o.detail << "scores/rankings/pairs byte-identical across two runs; acceptance suite " << elapsed << " s";
  return o;
}

}  // namespace

int main() {
  const auto suite_start = Clock::now();
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"Kendall oracle", kendall_oracle},
      {"End-to-end stub pipeline", stub_pipeline},
      {"Onset accuracy", onset_accuracy},
      {"Threshold sweep sanity", threshold_sweep},
      {"AHQ trainer", ahq_trainer},
      {"Segment F1 oracle", segment_f1_oracle},
      {"Ranking algebra", ranking_algebra},
      {"Harness baselines", harness_baselines},
      {"Determinism end-to-end", [suite_start] { return end_to_end_determinism(suite_start); }},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "exception: " << e.what();
    }
    std::cout << (o.pass ? "PASS: " : "FAIL: ") << name << " (" << o.detail.str() << ")\n";
    failures += o.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
