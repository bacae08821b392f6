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

#include <optional>
#include <stdexcept>
#include <string>

namespace t2a {

/// Base class of every recoverable error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or unsupported input data (manifests, label files, timelines).
class InputError : public Error {
 public:
  using Error::Error;
};

class AudioError : public Error {
 public:
  enum class Kind {
    kUnreadable,
    kNotRiffWave,
    kMalformed,
    kUnsupportedCodec,
    kUnsupportedBitDepth,
    kUnsupportedChannelCount,
    kEmptyClip,
  };

  AudioError(Kind kind, std::string message, long offending_value = 0)
      : Error(std::move(message)), kind_(kind), offending_value_(offending_value) {}

  Kind kind() const noexcept { return kind_; }
  // Format tag, bit depth or channel count that was rejected.
  long offending_value() const noexcept { return offending_value_; }

 private:
  Kind kind_;
  long offending_value_;
};

class ProviderError : public Error {
 public:
  enum class Kind {
    kUnreachable,
    kTimeout,
    kHttpStatus,
    kWrongCount,
    kWrongDimension,
    kInvalidResponse,
    kInvalidInput,
  };

  ProviderError(Kind kind, std::string message, bool retryable, int http_status = 0)
      : Error(std::move(message)), kind_(kind), retryable_(retryable), http_status_(http_status) {}

  Kind kind() const noexcept { return kind_; }
  bool retryable() const noexcept { return retryable_; }
  int http_status() const noexcept { return http_status_; }

 private:
  Kind kind_;
  bool retryable_;
  int http_status_;
};

/// A failure inside score_pair or one of the per-score operations, labeled with
/// the pipeline stage and, where relevant, the event it happened on.
class ScoringError : public Error {
 public:
  ScoringError(std::string stage, std::optional<std::size_t> event_index, const std::string& cause,
               bool retryable = false)
      : Error(format(stage, event_index, cause)),
        stage_(std::move(stage)),
        event_index_(event_index),
        retryable_(retryable) {}

  const std::string& stage() const noexcept { return stage_; }
  std::optional<std::size_t> event_index() const noexcept { return event_index_; }
  bool retryable() const noexcept { return retryable_; }

 private:
  static std::string format(const std::string& stage, std::optional<std::size_t> event_index,
                            const std::string& cause) {
    std::string out = stage;
    if (event_index) out += " (event " + std::to_string(*event_index) + ")";
    return out + ": " + cause;
  }

  std::string stage_;
  std::optional<std::size_t> event_index_;
  bool retryable_;
};

}  // namespace t2a
