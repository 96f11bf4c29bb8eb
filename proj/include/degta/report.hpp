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

// Attention export: per-layer view weights, per-edge local scores and
// per-pair global scores of a trained model on one graph.

#ifndef DEGTA_REPORT_HPP
#define DEGTA_REPORT_HPP

#include <array>
#include <string>
#include <vector>

#include "degta/model.hpp"

namespace degta {

struct AttentionReport {
  std::vector<LayerTrace> layers;
  /// Mean over layers of the average of the local and global triples
  /// (local only when the model has no global channel).
  std::array<double, 3> summary{};  ///< positional, structural, attribute
};

AttentionReport build_report(const Model& model, const Graph& g);

/// {layers, summary, local_edges, global_pairs} as JSON text.
std::string report_to_json(const AttentionReport& report);

}  // namespace degta

#endif  // DEGTA_REPORT_HPP
