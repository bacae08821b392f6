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

#include "t2a/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "json.hpp"
#include "t2a/error.hpp"
#include "t2a/event_text.hpp"
#include "t2a/evalharness.hpp"
#include "t2a/records.hpp"
#include "t2a/rng.hpp"
#include "t2a/stub_provider.hpp"

namespace t2a {

AudioClip render_events(std::span<const ToneEvent> events, double duration_s, int sample_rate, std::string id) {
  if (sample_rate <= 0 || !(duration_s > 0.0)) throw std::invalid_argument("duration and rate must be positive");
  AudioClip clip;
  clip.id = std::move(id);
  clip.sample_rate = sample_rate;
  const auto n = static_cast<std::size_t>(std::llround(duration_s * sample_rate));
  std::vector<double> acc(n, 0.0);
  for (const auto& ev : events) {
    const auto begin = static_cast<std::size_t>(std::clamp(std::llround(ev.onset_s * sample_rate), 0LL,
                                                           static_cast<long long>(n)));
    const auto end = static_cast<std::size_t>(std::clamp(std::llround(ev.offset_s * sample_rate), 0LL,
                                                         static_cast<long long>(n)));
    const double w = 2.0 * std::numbers::pi * ev.freq_hz / sample_rate;
    const double fade = std::max(0.0, ev.fade_s * sample_rate);
    for (std::size_t i = begin; i < end; ++i) {
      const double edge = std::min(static_cast<double>(i - begin), static_cast<double>(end - 1 - i)) + 0.5;
      const double gain = edge >= fade ? 1.0 : 0.5 - 0.5 * std::cos(std::numbers::pi * edge / fade);
      acc[i] += gain * ev.amplitude * std::sin(w * static_cast<double>(i - begin));
    }
  }
  clip.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) clip.samples[i] = static_cast<float>(std::clamp(acc[i], -1.0, 1.0));
  return clip;
}

void write_demo_corpus(const std::filesystem::path& dir, const DemoCorpusOptions& options) {
  const auto lexicon = StubLexicon::builtin().entries();
  const std::size_t k = options.events_per_caption;
  if (k < 2 || k > lexicon.size()) throw std::invalid_argument("events_per_caption out of range");
  if (options.captions == 0) throw std::invalid_argument("captions must be positive");

  std::filesystem::create_directories(dir / "audio");
  std::vector<std::string> candidates;
  for (const auto& e : lexicon) candidates.push_back(e.text);

  Rng rng(options.seed);
  std::vector<nlohmann::ordered_json> manifest, eval_items, quality_items, ref_rows, pred_rows;
  std::ofstream labels(dir / "ahq_labels.csv", std::ios::binary | std::ios::trunc);
  if (!labels) throw Error("cannot write " + (dir / "ahq_labels.csv").string());
  labels << "audio_id,label\n";

  for (std::size_t c = 0; c < options.captions; ++c) {
    std::vector<std::size_t> order(lexicon.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    shuffle(std::span<std::size_t>(order), rng);
    order.resize(k);

    std::vector<ToneEvent> tones;
    double t = uniform_real(rng, 0.1, 0.3);
    for (std::size_t idx : order) {
      const double len = uniform_real(rng, 0.4, 0.8);
      tones.push_back({lexicon[idx].center_hz, t, t + len, 0.5});
      t += len + uniform_real(rng, 0.2, 0.4);
    }
    const double duration = t;

    std::vector<std::string> texts;
    for (std::size_t idx : order) texts.push_back(lexicon[idx].text);
    const std::vector<Relation> links(k - 1, Relation::kBefore);
    const EventList events = EventList::from_links(texts, links);
    const std::string caption = compose_caption(events);
    const std::string caption_id = "c" + std::to_string(c);

    std::vector<ToneEvent> swapped = tones;
    std::swap(swapped[0].freq_hz, swapped[1].freq_hz);
    std::vector<ToneEvent> dropped(tones.begin(), tones.end() - 1);

    const struct {
      const char* model;
      const std::vector<ToneEvent>* tones;
      int label;
    } variants[] = {{"ordered", &tones, 4}, {"swapped", &swapped, 3}, {"dropped", &dropped, 1}};

    for (const auto& v : variants) {
      const std::string audio_id = caption_id + "_" + v.model;
      const std::string rel = "audio/" + audio_id + ".wav";
      write_wav(dir / rel, render_events(*v.tones, duration, 16000, audio_id));

      nlohmann::ordered_json m;
      m["caption_id"] = caption_id;
      m["caption"] = caption;
      m["audio_id"] = audio_id;
      m["audio_path"] = rel;
      m["source_model"] = v.model;
      manifest.push_back(std::move(m));
      labels << audio_id << ',' << v.label << '\n';

      nlohmann::ordered_json item;
      item["audio_path"] = rel;
      item["caption"] = caption;
      if (v.tones == &tones) {
        item["distractor"] = make_distractor_caption(events, candidates, options.seed + c);
        item["reversed"] = reverse_caption(events);
        eval_items.push_back(item);
      }
      item["human_label"] = v.label;
      quality_items.push_back(std::move(item));
    }

    TimelineItem ref{caption_id, duration, {}};
    TimelineItem pred{caption_id, duration, {}};
    for (std::size_t i = 0; i < k; ++i) {
      ref.events.push_back({texts[i], {{tones[i].onset_s, tones[i].offset_s}}, duration});
      const double shift = uniform_real(rng, -0.6, 0.6);
      const double on = std::clamp(tones[i].onset_s + shift, 0.0, duration);
      const double off = std::clamp(tones[i].offset_s + shift, on, duration);
      pred.events.push_back({texts[i], {{on, off}}, duration});
    }
    ref_rows.push_back(timeline_to_json(ref));
    pred_rows.push_back(timeline_to_json(pred));
  }
  if (!labels) throw Error("write error on " + (dir / "ahq_labels.csv").string());

  write_jsonl(dir / "manifest.jsonl", manifest);
  write_jsonl(dir / "eval_items.jsonl", eval_items);
  write_jsonl(dir / "quality_items.jsonl", quality_items);
  write_jsonl(dir / "timelines_ref.jsonl", ref_rows);
  write_jsonl(dir / "timelines_pred.jsonl", pred_rows);
}

}  // namespace t2a
