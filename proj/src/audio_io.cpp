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

#include "t2a/audio_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <optional>
#include <stdexcept>

#include "t2a/error.hpp"

namespace t2a {
namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint16_t read_u16(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8));
}

std::uint32_t read_u32(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint32_t>(b[at]) | (static_cast<std::uint32_t>(b[at + 1]) << 8) |
         (static_cast<std::uint32_t>(b[at + 2]) << 16) |
         (static_cast<std::uint32_t>(b[at + 3]) << 24);
}

bool tag_is(std::span<const std::uint8_t> b, std::size_t at, const char* tag) {
  return std::memcmp(b.data() + at, tag, 4) == 0;
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int shift = 0; shift < 32; shift += 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

void put_tag(std::vector<std::uint8_t>& out, const char* tag) { out.insert(out.end(), tag, tag + 4); }

float clamp_sample(float x) {
  if (std::isnan(x)) return 0.0f;
  return std::clamp(x, -1.0f, 1.0f);
}

struct FormatChunk {
  std::uint16_t format = 0;
  std::uint16_t channels = 0;
  std::uint32_t sample_rate = 0;
  std::uint16_t bits = 0;
};

FormatChunk parse_format(std::span<const std::uint8_t> chunk) {
  if (chunk.size() < 16) throw AudioError(AudioError::Kind::kMalformed, "fmt chunk shorter than 16 bytes");
  FormatChunk fmt;
  fmt.format = read_u16(chunk, 0);
  fmt.channels = read_u16(chunk, 2);
  fmt.sample_rate = read_u32(chunk, 4);
  fmt.bits = read_u16(chunk, 14);
  if (fmt.format == kFormatExtensible) {
    if (chunk.size() < 40) {
      throw AudioError(AudioError::Kind::kMalformed, "WAVE_FORMAT_EXTENSIBLE chunk too short");
    }
    fmt.format = read_u16(chunk, 24);
  }
  return fmt;
}

}  // namespace

AudioClip decode_wav(std::span<const std::uint8_t> bytes, std::string id) {
  if (bytes.size() < 12 || !tag_is(bytes, 0, "RIFF") || !tag_is(bytes, 8, "WAVE")) {
    throw AudioError(AudioError::Kind::kNotRiffWave, "not a RIFF/WAVE stream");
  }

  std::optional<FormatChunk> fmt;
  std::span<const std::uint8_t> data;
  bool have_data = false;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint32_t size = read_u32(bytes, pos + 4);
    const std::size_t body = pos + 8;
    // Writers that stream audio sometimes leave the data size unset; take what is there.
    const std::size_t avail = std::min<std::size_t>(size, bytes.size() - body);
    if (tag_is(bytes, pos, "fmt ")) {
      if (avail < size) throw AudioError(AudioError::Kind::kMalformed, "truncated fmt chunk");
      fmt = parse_format(bytes.subspan(body, avail));
    } else if (tag_is(bytes, pos, "data")) {
      data = bytes.subspan(body, avail);
      have_data = true;
      break;
    }
    pos = body + size + (size & 1U);
  }
  if (!fmt) throw AudioError(AudioError::Kind::kMalformed, "missing fmt chunk");
  if (!have_data) throw AudioError(AudioError::Kind::kMalformed, "missing data chunk");

  if (fmt->format != kFormatPcm && fmt->format != kFormatFloat) {
    throw AudioError(AudioError::Kind::kUnsupportedCodec,
                     "unsupported WAV codec tag " + std::to_string(fmt->format), fmt->format);
  }
  const std::uint16_t expected_bits = fmt->format == kFormatPcm ? 16 : 32;
  if (fmt->bits != expected_bits) {
    throw AudioError(AudioError::Kind::kUnsupportedBitDepth,
                     "unsupported bit depth " + std::to_string(fmt->bits) +
                         (fmt->format == kFormatPcm ? " for PCM" : " for float"),
                     fmt->bits);
  }
  if (fmt->channels != 1 && fmt->channels != 2) {
    throw AudioError(AudioError::Kind::kUnsupportedChannelCount,
                     "unsupported channel count " + std::to_string(fmt->channels), fmt->channels);
  }
  if (fmt->sample_rate == 0) throw AudioError(AudioError::Kind::kMalformed, "sample rate is zero");

  const std::size_t bytes_per_sample = fmt->bits / 8;
  const std::size_t frame_bytes = bytes_per_sample * fmt->channels;
  const std::size_t frames = data.size() / frame_bytes;

  auto sample_at = [&](std::size_t offset) -> float {
    if (fmt->format == kFormatPcm) {
      const auto raw = static_cast<std::int16_t>(read_u16(data, offset));
      return static_cast<float>(raw) / 32768.0f;
    }
    return std::bit_cast<float>(read_u32(data, offset));
  };

  AudioClip clip;
  clip.id = std::move(id);
  clip.sample_rate = static_cast<int>(fmt->sample_rate);
  clip.samples.resize(frames);
  for (std::size_t i = 0; i < frames; ++i) {
    const std::size_t at = i * frame_bytes;
    float value = sample_at(at);
    if (fmt->channels == 2) value = 0.5f * (value + sample_at(at + bytes_per_sample));
    clip.samples[i] = clamp_sample(value);
  }
  return clip;
}

AudioClip load_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw AudioError(AudioError::Kind::kUnreadable, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw AudioError(AudioError::Kind::kUnreadable, "read error on " + path.string());
  try {
    return decode_wav(bytes, path.stem().string());
  } catch (const AudioError& e) {
    throw AudioError(e.kind(), path.string() + ": " + e.what(), e.offending_value());
  }
}

std::vector<std::uint8_t> encode_wav(const AudioClip& clip, WavEncoding encoding) {
  if (clip.sample_rate <= 0) throw std::invalid_argument("sample_rate must be positive");
  const bool pcm = encoding == WavEncoding::kPcm16;
  const std::uint16_t bits = pcm ? 16 : 32;
  const std::uint32_t data_size = static_cast<std::uint32_t>(clip.samples.size() * (bits / 8));

  std::vector<std::uint8_t> out;
  out.reserve(44 + data_size);
  put_tag(out, "RIFF");
  put_u32(out, 36 + data_size);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put_u32(out, 16);
  put_u16(out, pcm ? kFormatPcm : kFormatFloat);
  put_u16(out, 1);
  put_u32(out, static_cast<std::uint32_t>(clip.sample_rate));
  put_u32(out, static_cast<std::uint32_t>(clip.sample_rate) * (bits / 8));
  put_u16(out, bits / 8);
  put_u16(out, bits);
  put_tag(out, "data");
  put_u32(out, data_size);
  for (float s : clip.samples) {
    if (pcm) {
      const long q = std::lround(static_cast<double>(clamp_sample(s)) * 32768.0);
      put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(std::clamp(q, -32768L, 32767L))));
    } else {
      put_u32(out, std::bit_cast<std::uint32_t>(s));
    }
  }
  return out;
}

void write_wav(const std::filesystem::path& path, const AudioClip& clip, WavEncoding encoding) {
  const auto bytes = encode_wav(clip, encoding);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw AudioError(AudioError::Kind::kUnreadable, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw AudioError(AudioError::Kind::kUnreadable, "write error on " + path.string());
}

Envelope compute_envelope(const AudioClip& clip, double frame_len_s, double hop_s) {
  if (!(hop_s > 0.0) || !(frame_len_s >= hop_s)) {
    throw std::invalid_argument("envelope requires frame_len_s >= hop_s > 0");
  }
  if (clip.empty()) throw AudioError(AudioError::Kind::kEmptyClip, "cannot compute envelope of empty clip");

  const double rate = clip.sample_rate;
  const auto hop = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(hop_s * rate)));
  const auto frame = std::max(hop, static_cast<std::size_t>(std::lround(frame_len_s * rate)));
  const std::size_t n = clip.samples.size();
  const std::size_t frames = (n + hop - 1) / hop;
  const std::size_t left = frame / 2;

  // Prefix sums of squares make every window O(1).
  std::vector<double> energy(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double s = clip.samples[i];
    energy[i + 1] = energy[i] + s * s;
  }

  Envelope env;
  env.frame_len_s = static_cast<double>(frame) / rate;
  env.hop_s = static_cast<double>(hop) / rate;
  env.duration_s = static_cast<double>(n) / rate;
  env.values.resize(frames);
  for (std::size_t k = 0; k < frames; ++k) {
    const std::size_t centre = k * hop;
    const std::size_t begin = centre > left ? centre - left : 0;
    const std::size_t stop = std::min(n, centre + (frame - left));
    const double sum = std::max(0.0, energy[stop] - energy[begin]);
    env.values[k] = std::sqrt(sum / static_cast<double>(stop - begin));
  }
  return env;
}

Envelope normalize_envelope(Envelope env) {
  if (env.normalized) throw std::invalid_argument("envelope is already normalized");
  const auto peak = env.values.empty() ? 0.0 : *std::max_element(env.values.begin(), env.values.end());
  if (peak > 0.0) {
    for (double& v : env.values) v /= peak;
  }
  env.normalized = true;
  return env;
}

EventSpan detect_active_span(const Envelope& env, double threshold) {
  if (!env.normalized) throw std::invalid_argument("detect_active_span needs a normalized envelope");
  if (!(threshold > 0.0 && threshold < 1.0)) throw std::invalid_argument("threshold must lie in (0, 1)");

  const auto above = [threshold](double v) { return v > threshold; };
  const auto first = std::find_if(env.values.begin(), env.values.end(), above);
  if (first == env.values.end()) return {};
  const auto last = std::find_if(env.values.rbegin(), env.values.rend(), above);

  EventSpan span;
  span.detected = true;
  span.onset_s = env.frame_time(static_cast<std::size_t>(first - env.values.begin()));
  span.offset_s = std::min(env.duration_s,
                           env.frame_time(static_cast<std::size_t>(env.values.rend() - last - 1)));
  return span;
}

}  // namespace t2a
