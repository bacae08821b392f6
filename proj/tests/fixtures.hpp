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

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "t2a/ahq.hpp"
#include "t2a/rng.hpp"
#include "t2a/stub_provider.hpp"
#include "t2a/synth.hpp"

namespace t2a::testing {

/// Four well-separated unit-vector clusters labelled 1..4.
struct ClusterSet {
  std::vector<std::vector<double>> centroids;
  std::vector<AhqExample> examples;
};

inline ClusterSet make_clusters(std::size_t n, std::size_t d, std::uint64_t seed, double noise = 0.6) {
  Rng rng(seed);
  ClusterSet set;
  for (int c = 0; c < kAhqClasses; ++c) {
    std::vector<double> mu(d);
    for (double& x : mu) x = uniform_real(rng, -1.0, 1.0);
    set.centroids.push_back(mu);
  }
  for (std::size_t i = 0; i < n; ++i) {
    const int label = 1 + static_cast<int>(i % kAhqClasses);
    std::vector<double> x = set.centroids[static_cast<std::size_t>(label - 1)];
    for (double& v : x) v += noise * uniform_real(rng, -1.0, 1.0);
    set.examples.push_back({unit_normalize(x), label});
  }
  return set;
}

/// Label of the closest centroid after normalization.
inline int nearest_centroid(const ClusterSet& set, const EmbeddingVector& x) {
  int best = 1;
  double best_dist = INFINITY;
  for (std::size_t c = 0; c < set.centroids.size(); ++c) {
    const EmbeddingVector mu = unit_normalize(set.centroids[c]);
    double dist = 0;
    for (std::size_t k = 0; k < x.values.size(); ++k) {
      const double diff = static_cast<double>(x.values[k]) - mu.values[k];
      dist += diff * diff;
    }
    if (dist < best_dist) {
      best_dist = dist;
      best = static_cast<int>(c) + 1;
    }
  }
  return best;
}

/// Three lexicon tones, each 1.5 s, one per slot of a 6 s clip.
struct ThreeEventFixture {
  std::vector<std::string> phrases = {"a dog barks", "a bell rings", "a car horn honks"};
  std::vector<double> freqs = {220.0, 440.0, 1000.0};

  /// `slot_of[i]` is the time slot of phrase i.
  AudioClip render(const std::vector<int>& slot_of) const {
    std::vector<ToneEvent> events;
    for (std::size_t i = 0; i < freqs.size(); ++i) {
      const double start = 0.25 + 2.0 * slot_of[i];
      events.push_back({freqs[i], start, start + 1.5, 0.5, 0.005});
    }
    return render_events(events, 6.0, 16000, "three");
  }

  std::string caption(const std::vector<std::size_t>& order) const {
    std::string out;
    for (std::size_t k = 0; k < order.size(); ++k) {
      if (k > 0) out += ", then ";
      out += phrases[order[k]];
    }
    return out;
  }
};

/// Forwards to a stub but fails separation for one event caption.
class FailingProvider final : public Provider {
 public:
  FailingProvider(std::size_t dim, std::string fail_on) : stub_(dim, StubLexicon::builtin()), fail_on_(std::move(fail_on)) {}

  std::size_t dim() const override { return stub_.dim(); }
  using Provider::embed_audio;
  using Provider::embed_text;
  std::vector<EmbeddingVector> embed_text(std::span<const std::string> texts) const override {
    return stub_.embed_text(texts);
  }
  std::vector<EmbeddingVector> embed_audio(std::span<const AudioClip> clips) const override {
    return stub_.embed_audio(clips);
  }
  AudioClip separate(const AudioClip& clip, std::string_view caption) const override {
    if (caption == fail_on_) throw ProviderError(ProviderError::Kind::kHttpStatus, "separator down", true, 503);
    return stub_.separate(clip, caption);
  }
  EventList decompose(std::string_view caption) const override { return stub_.decompose(caption); }
  std::string fingerprint() const override { return "failing/" + stub_.fingerprint(); }

 private:
  StubProvider stub_;
  std::string fail_on_;
};

}  // namespace t2a::testing
