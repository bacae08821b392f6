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

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

#include "t2a/providers.hpp"

namespace t2a {

struct RunConfig {
  ProviderConfig provider;
  double volume_threshold = 0.3;
  double overlap_threshold = 0.85;
  double simultaneity_tol_s = 0.5;
  std::optional<std::filesystem::path> ahq_model_path;
  int parallelism = 1;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "out";
  std::vector<double> sweep;  // score at each of these thresholds instead of volume_threshold
};

/// Throws InputError when a field is out of range.
void validate(const RunConfig& config);

/// Reads a JSON config. Unknown keys are rejected; relative paths are taken
/// relative to the config file.
RunConfig load_run_config(const std::filesystem::path& path);

/// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFatal = 1;
inline constexpr int kExitPartial = 2;

/// Entry point of the t2a-score tool.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace t2a
