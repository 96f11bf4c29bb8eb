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

#include "degta/report.hpp"

#include "degta/error.hpp"
#include "json.hpp"

namespace degta {

AttentionReport build_report(const Model& model, const Graph& g) {
  const GraphContext ctx = make_context(g, model.config);
  ad::Tape tape;
  AttentionReport report;
  report.layers = run_inference(model, tape, ctx, /*trace=*/true).traces;
  for (const LayerTrace& t : report.layers)
    for (int v = 0; v < 3; ++v)
      report.summary[v] += t.has_global ? 0.5 * (t.local_weights[v] + t.global_weights[v]) : t.local_weights[v];
  for (double& v : report.summary) v /= static_cast<double>(report.layers.size());
  return report;
}

std::string report_to_json(const AttentionReport& report) {
  using json = nlohmann::json;
  json layers = json::array();
  json local_edges = json::array();
  json global_pairs = json::array();
  for (std::size_t l = 0; l < report.layers.size(); ++l) {
    const LayerTrace& t = report.layers[l];
    layers.push_back({{"local_weights", t.local_weights}, {"global_weights", t.global_weights}});
    for (std::size_t e = 0; e < t.local_rows.size(); ++e)
      local_edges.push_back({{"layer", l},
                             {"i", t.local_rows[e]},
                             {"j", t.local_cols[e]},
                             {"s", t.local_s[e]},
                             {"p", t.local_p[e]},
                             {"a", t.local_a[e]},
                             {"z", t.local_z[e]}});
    for (std::size_t e = 0; e < t.global_rows.size(); ++e)
      global_pairs.push_back({{"layer", l},
                              {"i", t.global_rows[e]},
                              {"j", t.global_cols[e]},
                              {"us", t.global_us[e]},
                              {"up", t.global_up[e]},
                              {"ua", t.global_ua[e]},
                              {"z", t.global_z[e]}});
  }
  const json doc{
      {"layers", layers},
      {"summary",
       {{"positional", report.summary[0]}, {"structural", report.summary[1]}, {"attribute", report.summary[2]}}},
      {"local_edges", local_edges},
      {"global_pairs", global_pairs}};
  return doc.dump(1) + "\n";
}

}  // namespace degta
