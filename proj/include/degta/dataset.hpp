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

// On-disk dataset layouts.
//
// Node dataset directory:
//   edges.tsv     one "u<TAB>v" pair per line, 0-based; '#' starts a comment
//   features.csv  N rows of d comma-separated reals
//   labels.csv    N rows, one integer class per row
//   train.idx, val.idx, test.idx   one node index per line
//
// A directory with only edges.tsv and features.csv loads as an unlabeled
// graph (enough for `encode`).
//
// Graph dataset directory:
//   <name>/edges.tsv, <name>/features.csv   one subdirectory per graph
//   targets.csv   "name,value" rows; integer values mean classification
//   splits.csv    "name,split" rows with split in {train,val,test}

#ifndef DEGTA_DATASET_HPP
#define DEGTA_DATASET_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "degta/graph.hpp"

namespace degta {

struct GraphDataset {
  std::vector<std::string> names;
  std::vector<Graph> graphs;
  std::vector<double> targets;
  bool regression = false;
  Splits splits;  ///< indices into graphs

  std::size_t size() const noexcept { return graphs.size(); }
  std::size_t feature_dim() const { return graphs.empty() ? 0 : graphs.front().feature_dim(); }
  /// Number of classes (max target + 1); 1 for regression.
  int num_outputs() const;
  friend bool operator==(const GraphDataset&, const GraphDataset&) = default;
};

enum class DatasetKind { kNode, kGraphOnly, kGraphSet };

/// Inspects the directory layout without parsing it.
DatasetKind detect_dataset_kind(const std::filesystem::path& dir);

Graph load_graph_dir(const std::filesystem::path& dir);
Graph load_node_dataset(const std::filesystem::path& dir);
GraphDataset load_graph_dataset(const std::filesystem::path& dir);

/// Writes edges.tsv and features.csv, plus labels and split files when present.
void save_node_dataset(const Graph& g, const std::filesystem::path& dir);
void save_graph_dataset(const GraphDataset& ds, const std::filesystem::path& dir);

/// Shortest round-trip decimal form of a double.
std::string format_double(double v);

/// Writes a matrix as CSV with shortest round-trip formatting.
void write_matrix_csv(const Matrix& m, const std::filesystem::path& file);
Matrix read_matrix_csv(const std::filesystem::path& file);

}  // namespace degta

#endif  // DEGTA_DATASET_HPP
