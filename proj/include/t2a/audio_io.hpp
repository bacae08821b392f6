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
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace t2a {

/// Mono PCM audio. Samples are clamped to [-1, 1] at decode time.
struct AudioClip {
  std::string id;
  std::vector<float> samples;
  int sample_rate = 16000;

  double duration_seconds() const {
    return static_cast<double>(samples.size()) / static_cast<double>(sample_rate);
  }
  bool empty() const { return samples.empty(); }
};

enum class WavEncoding { kPcm16, kFloat32 };

/// Decodes RIFF/WAVE bytes (PCM16 or IEEE float32, mono or stereo).
/// Stereo is downmixed by channel mean. Throws AudioError.
AudioClip decode_wav(std::span<const std::uint8_t> bytes, std::string id = {});

/// Reads and decodes a WAV file. The clip id defaults to the file stem.
AudioClip load_wav(const std::filesystem::path& path);

std::vector<std::uint8_t> encode_wav(const AudioClip& clip, WavEncoding encoding);
void write_wav(const std::filesystem::path& path, const AudioClip& clip,
               WavEncoding encoding = WavEncoding::kFloat32);

/// Per-frame RMS volume curve.
///
/// Frame k is centred on t = k * hop_s and spans [t - frame_len_s/2,
/// t + frame_len_s/2), truncated to the clip; the RMS is taken over the samples
/// that fall inside the clip. There are ceil(samples / hop_samples) frames.
struct Envelope {
  std::vector<double> values;
  double frame_len_s = 0.02;
  double hop_s = 0.01;
  double duration_s = 0.0;
  bool normalized = false;

  double frame_time(std::size_t k) const { return static_cast<double>(k) * hop_s; }
};

/// Throws AudioError(kEmptyClip) on an empty clip and std::invalid_argument
/// unless frame_len_s >= hop_s > 0. hop_s and frame_len_s are rounded to whole
/// samples; the stored values are the effective (rounded) durations.
Envelope compute_envelope(const AudioClip& clip, double frame_len_s = 0.02, double hop_s = 0.01);

/// Scales the envelope so its maximum is 1. An all-zero envelope stays zero.
Envelope normalize_envelope(Envelope env);

/// Onset/offset of one event within one stem. Undetected spans are [0, 0].
struct EventSpan {
  std::size_t event_index = 0;
  double onset_s = 0.0;
  double offset_s = 0.0;
  bool detected = false;

  bool contains(const EventSpan& other) const {
    if (!other.detected) return true;
    return detected && onset_s <= other.onset_s && other.offset_s <= offset_s;
  }
};

/// Hull of all frames whose normalized value is strictly above `threshold`.
/// onset is the centre time of the first such frame, offset the centre time of
/// the last one (clamped to the clip duration).
EventSpan detect_active_span(const Envelope& env, double threshold = 0.3);

}  // namespace t2a
