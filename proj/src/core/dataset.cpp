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

#include "degta/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "degta/error.hpp"

namespace fs = std::filesystem;

namespace degta {

namespace {

struct Line {
  std::size_t number;
  std::string text;
};

[[noreturn]] void fail_at(const fs::path& file, std::size_t line, const std::string& msg) {
  fail(ErrorKind::kValidation, file.string() + ":" + std::to_string(line) + ": " + msg);
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

/// Non-blank, non-comment lines of a text file.
std::vector<Line> read_lines(const fs::path& file) {
  std::ifstream in(file);
  require(in.good(), ErrorKind::kValidation, [&] { return "missing file " + file.string(); });
  std::vector<Line> lines;
  std::string text;
  std::size_t n = 0;
  while (std::getline(in, text)) {
    ++n;
    const std::string_view t = trim(text);
    if (t.empty() || t.front() == '#') continue;
    lines.push_back({n, std::string(t)});
  }
  return lines;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    const std::size_t b = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t') ++i;
    if (i > b) out.push_back(s.substr(b, i - b));
  }
  return out;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

double parse_real(std::string_view s, const fs::path& file, std::size_t line) {
  double v = 0.0;
  if (!parse_number(s, v) || !std::isfinite(v))
    fail_at(file, line, "expected a finite number, got '" + std::string(s) + "'");
  return v;
}

long long parse_int(std::string_view s, const fs::path& file, std::size_t line) {
  long long v = 0;
  if (!parse_number(s, v)) fail_at(file, line, "expected an integer, got '" + std::string(s) + "'");
  return v;
}

NodeId parse_index(std::string_view s, std::size_t n, const fs::path& file, std::size_t line) {
  const long long v = parse_int(s, file, line);
  if (v < 0 || static_cast<unsigned long long>(v) >= n)
    fail_at(file, line, "index " + std::to_string(v) + " is out of range for " + std::to_string(n) + " nodes");
  return static_cast<NodeId>(v);
}

std::vector<Edge> read_edges(const fs::path& file, std::size_t n) {
  std::vector<Edge> edges;
  for (const Line& l : read_lines(file)) {
    const auto f = split_ws(l.text);
    if (f.size() != 2)
      fail_at(file, l.number, "expected two node indices, got " + std::to_string(f.size()) + " fields");
    edges.emplace_back(parse_index(f[0], n, file, l.number), parse_index(f[1], n, file, l.number));
  }
  return edges;
}

std::vector<NodeId> read_index_file(const fs::path& file, std::size_t n) {
  std::vector<NodeId> idx;
  for (const Line& l : read_lines(file)) idx.push_back(parse_index(l.text, n, file, l.number));
  return idx;
}

void write_text(const fs::path& file, const std::string& content) {
  std::ofstream out(file, std::ios::binary);
  require(out.good(), ErrorKind::kValidation, [&] { return "cannot write " + file.string(); });
  out << content;
  require(out.good(), ErrorKind::kValidation, [&] { return "failed writing " + file.string(); });
}

void write_index_file(const fs::path& file, const std::vector<NodeId>& idx) {
  std::string s;
  for (NodeId v : idx) s += std::to_string(v) + "\n";
  write_text(file, s);
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  require(!ec && fs::is_directory(dir), ErrorKind::kValidation,
          [&] { return "cannot create directory " + dir.string(); });
}

std::string format_target(double v, bool regression) {
  std::string s = format_double(v);
  if (regression && s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

bool looks_real(std::string_view s) { return s.find_first_of(".eE") != std::string_view::npos; }

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return ec == std::errc() ? std::string(buf, ptr) : std::string("nan");
}

void write_matrix_csv(const Matrix& m, const fs::path& file) {
  std::string s;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      if (c) s += ',';
      s += format_double(m(r, c));
    }
    s += '\n';
  }
  write_text(file, s);
}

Matrix read_matrix_csv(const fs::path& file) {
  const auto lines = read_lines(file);
  require(!lines.empty(), ErrorKind::kValidation, [&] { return file.string() + ": file has no rows"; });
  std::vector<double> data;
  const std::size_t width = split(lines.front().text, ',').size();
  for (const Line& l : lines) {
    const auto f = split(l.text, ',');
    if (f.size() != width)
      fail_at(file, l.number, "ragged row: " + std::to_string(f.size()) + " fields, expected " + std::to_string(width));
    for (auto field : f) data.push_back(parse_real(field, file, l.number));
  }
  return Matrix(lines.size(), width, std::move(data));
}

int GraphDataset::num_outputs() const {
  if (regression) return 1;
  double mx = 0.0;
  for (double t : targets) mx = std::max(mx, t);
  return static_cast<int>(mx) + 1;
}

DatasetKind detect_dataset_kind(const fs::path& dir) {
  require(fs::is_directory(dir), ErrorKind::kValidation,
          [&] { return "dataset directory " + dir.string() + " does not exist"; });
  if (fs::exists(dir / "targets.csv")) return DatasetKind::kGraphSet;
  if (fs::exists(dir / "edges.tsv"))
    return fs::exists(dir / "labels.csv") ? DatasetKind::kNode : DatasetKind::kGraphOnly;
  fail(ErrorKind::kValidation, "no dataset found in " + dir.string() + " (expected edges.tsv or targets.csv)");
}

Graph load_graph_dir(const fs::path& dir) {
  Matrix features = read_matrix_csv(dir / "features.csv");
  const std::vector<Edge> edges = read_edges(dir / "edges.tsv", features.rows());
  return build_graph(features.rows(), edges, std::move(features)).graph;
}

Graph load_node_dataset(const fs::path& dir) {
  Graph g = load_graph_dir(dir);
  const std::size_t n = g.num_nodes();
  const fs::path labels_file = dir / "labels.csv";
  const auto lines = read_lines(labels_file);
  require(lines.size() == n, ErrorKind::kValidation, [&] {
    return labels_file.string() + ": has " + std::to_string(lines.size()) + " rows, expected " + std::to_string(n) +
           " (one per node)";
  });
  std::vector<int> labels;
  labels.reserve(n);
  for (const Line& l : lines) {
    const long long y = parse_int(l.text, labels_file, l.number);
    if (y < 0 || y > 1'000'000) fail_at(labels_file, l.number, "label must be a class index >= 0");
    labels.push_back(static_cast<int>(y));
  }
  Splits sp;
  sp.train = read_index_file(dir / "train.idx", n);
  sp.val = read_index_file(dir / "val.idx", n);
  sp.test = read_index_file(dir / "test.idx", n);
  return g.with_labels(std::move(labels)).with_splits(std::move(sp));
}

GraphDataset load_graph_dataset(const fs::path& dir) {
  require(fs::is_directory(dir), ErrorKind::kValidation,
          [&] { return "dataset directory " + dir.string() + " does not exist"; });
  const fs::path targets_file = dir / "targets.csv";
  const fs::path splits_file = dir / "splits.csv";
  GraphDataset ds;
  std::map<std::string, std::size_t> index;
  bool any_real = false;
  std::vector<std::pair<std::string_view, std::size_t>> raw_targets;
  const auto target_lines = read_lines(targets_file);
  require(!target_lines.empty(), ErrorKind::kValidation, [&] { return targets_file.string() + ": no graphs listed"; });
  for (const Line& l : target_lines) {
    const auto f = split(l.text, ',');
    if (f.size() != 2) fail_at(targets_file, l.number, "expected 'name,value'");
    const std::string name(f[0]);
    if (name.empty()) fail_at(targets_file, l.number, "empty graph name");
    if (!index.emplace(name, ds.names.size()).second) fail_at(targets_file, l.number, "duplicate graph '" + name + "'");
    ds.names.push_back(name);
    ds.targets.push_back(parse_real(f[1], targets_file, l.number));
    any_real = any_real || looks_real(f[1]) || ds.targets.back() != std::floor(ds.targets.back());
  }
  ds.regression = any_real;
  if (!ds.regression)
    for (std::size_t i = 0; i < ds.targets.size(); ++i)
      if (ds.targets[i] < 0) fail_at(targets_file, target_lines[i].number, "class targets must be >= 0");

  for (const std::string& name : ds.names) {
    const fs::path sub = dir / name;
    require(fs::is_directory(sub), ErrorKind::kValidation,
            [&] { return "graph '" + name + "' has no directory " + sub.string(); });
    ds.graphs.push_back(load_graph_dir(sub));
    require(ds.graphs.back().feature_dim() == ds.graphs.front().feature_dim(), ErrorKind::kValidation, [&] {
      return "graph '" + name + "' has feature width " + std::to_string(ds.graphs.back().feature_dim()) +
             ", expected " + std::to_string(ds.graphs.front().feature_dim());
    });
  }

  std::set<std::string> seen;
  for (const Line& l : read_lines(splits_file)) {
    const auto f = split(l.text, ',');
    if (f.size() != 2) fail_at(splits_file, l.number, "expected 'name,split'");
    const std::string name(f[0]);
    const auto it = index.find(name);
    if (it == index.end()) fail_at(splits_file, l.number, "unknown graph '" + name + "'");
    if (!seen.insert(name).second) fail_at(splits_file, l.number, "graph '" + name + "' assigned twice");
    const auto id = static_cast<NodeId>(it->second);
    if (f[1] == "train")
      ds.splits.train.push_back(id);
    else if (f[1] == "val")
      ds.splits.val.push_back(id);
    else if (f[1] == "test")
      ds.splits.test.push_back(id);
    else
      fail_at(splits_file, l.number, "split must be train, val or test, got '" + std::string(f[1]) + "'");
  }
  return ds;
}

void save_node_dataset(const Graph& g, const fs::path& dir) {
  ensure_dir(dir);
  std::string edges;
  for (const auto& [u, v] : g.edge_list()) edges += std::to_string(u) + "\t" + std::to_string(v) + "\n";
  write_text(dir / "edges.tsv", edges);
  write_matrix_csv(g.features(), dir / "features.csv");
  if (g.has_labels()) {
    std::string labels;
    for (int y : g.labels()) labels += std::to_string(y) + "\n";
    write_text(dir / "labels.csv", labels);
  }
  if (g.has_labels() || !g.splits().empty()) {
    write_index_file(dir / "train.idx", g.splits().train);
    write_index_file(dir / "val.idx", g.splits().val);
    write_index_file(dir / "test.idx", g.splits().test);
  }
}

void save_graph_dataset(const GraphDataset& ds, const fs::path& dir) {
  require(ds.names.size() == ds.graphs.size() && ds.targets.size() == ds.graphs.size(), ErrorKind::kValidation,
          "graph dataset has inconsistent name/graph/target counts");
  ensure_dir(dir);
  std::string targets;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    save_node_dataset(ds.graphs[i].with_labels({}).with_splits({}), dir / ds.names[i]);
    targets += ds.names[i] + "," + format_target(ds.targets[i], ds.regression) + "\n";
  }
  write_text(dir / "targets.csv", targets);
  std::string splits;
  auto emit = [&](const std::vector<NodeId>& idx, const char* tag) {
    for (NodeId i : idx) splits += ds.names.at(i) + "," + tag + "\n";
  };
  emit(ds.splits.train, "train");
  emit(ds.splits.val, "val");
  emit(ds.splits.test, "test");
  write_text(dir / "splits.csv", splits);
}

}  // namespace degta
