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
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace t2a {

std::string sha256_hex(std::string_view data);

std::string base64_encode(std::span<const std::uint8_t> bytes);
/// Throws InputError on malformed input.
std::vector<std::uint8_t> base64_decode(std::string_view text);

/// Little-endian float32 PCM <-> base64, the wire format of the remote API.
std::string pcm_to_base64(std::span<const float> samples);
std::vector<float> base64_to_pcm(std::string_view text);

}  // namespace t2a
