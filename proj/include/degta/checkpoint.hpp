// Copyright 2026 The degta Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Checkpoint layout:
//
//   "DEGTA1\n"
//   one line of JSON: {config, input_dim, num_outputs, task, regression,
//                      manifest: [{name, shape: [rows, cols], offset, bytes}]}
//   "\n"
//   parameter blob, little-endian IEEE-754 doubles in manifest order
//
// Offsets count from the first byte of the blob.

#ifndef DEGTA_CHECKPOINT_HPP
#define DEGTA_CHECKPOINT_HPP

#include <filesystem>
#include <string>
#include <string_view>

#include "degta/model.hpp"

namespace degta {

inline constexpr std::string_view kCheckpointMagic = "DEGTA1\n";

/// Config as a compact JSON object string.
std::string config_to_json(const DeGTAConfig& cfg);
DeGTAConfig config_from_json(std::string_view text);

std::string serialize_checkpoint(const Model& model);
Model deserialize_checkpoint(std::string_view bytes);

void save_checkpoint(const Model& model, const std::filesystem::path& file);
Model load_checkpoint(const std::filesystem::path& file);

}  // namespace degta

#endif  // DEGTA_CHECKPOINT_HPP
