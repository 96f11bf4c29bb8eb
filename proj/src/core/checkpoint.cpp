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

#include "degta/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "degta/error.hpp"
#include "json.hpp"

namespace degta {

namespace {

using json = nlohmann::json;

json config_json(const DeGTAConfig& c) {
  return json{{"k", c.k},
              {"hidden", c.hidden},
              {"struct_dim", c.struct_dim},
              {"pos_dim", c.pos_dim},
              {"score_dim", c.score_dim},
              {"attr_score_dim", c.attr_score_dim},
              {"layers", c.layers},
              {"pe", to_string(c.pe)},
              {"se", to_string(c.se)},
              {"bandwidth", c.bandwidth},
              {"sampling", attn::to_string(c.sampling.kind)},
              {"top_k", c.sampling.top_k},
              {"tau", c.sampling.tau},
              {"literal_softmax", c.literal_softmax},
              {"learning_rate", c.learning_rate},
              {"weight_decay", c.weight_decay},
              {"epochs", c.epochs},
              {"seed", c.seed},
              {"dropout", c.dropout},
              {"residual", c.residual},
              {"ablation", to_string(c.ablation)}};
}

DeGTAConfig config_from(const json& j) {
  DeGTAConfig c;
  c.k = j.at("k").get<int>();
  c.hidden = j.at("hidden").get<int>();
  c.struct_dim = j.at("struct_dim").get<int>();
  c.pos_dim = j.at("pos_dim").get<int>();
  c.score_dim = j.at("score_dim").get<int>();
  c.attr_score_dim = j.at("attr_score_dim").get<int>();
  c.layers = j.at("layers").get<int>();
  c.pe = parse_pe_kind(j.at("pe").get<std::string>());
  c.se = parse_se_kind(j.at("se").get<std::string>());
  c.bandwidth = j.at("bandwidth").get<double>();
  c.sampling.kind = attn::parse_sampling_kind(j.at("sampling").get<std::string>());
  c.sampling.top_k = j.at("top_k").get<int>();
  c.sampling.tau = j.at("tau").get<double>();
  c.literal_softmax = j.at("literal_softmax").get<bool>();
  c.learning_rate = j.at("learning_rate").get<double>();
  c.weight_decay = j.at("weight_decay").get<double>();
  c.epochs = j.at("epochs").get<int>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.dropout = j.at("dropout").get<double>();
  c.residual = j.at("residual").get<bool>();
  c.ablation = parse_ablation(j.at("ablation").get<std::string>());
  return c;
}

/// Runs a JSON-reading step, turning parser and schema errors into validation errors.
template <typename F>
auto guarded(const char* what, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    fail(ErrorKind::kValidation, std::string(what) + ": " + e.what());
  } catch (const json::exception& e) {
    fail(ErrorKind::kValidation, std::string(what) + ": " + e.what());
  }
}

void put_le(std::string& out, double v) {
  auto bits = std::bit_cast<std::uint64_t>(v);
  for (int b = 0; b < 8; ++b) {
    out.push_back(static_cast<char>(bits & 0xFF));
    bits >>= 8;
  }
}

double get_le(const char* p) {
  std::uint64_t bits = 0;
  for (int b = 7; b >= 0; --b) bits = (bits << 8) | static_cast<unsigned char>(p[b]);
  return std::bit_cast<double>(bits);
}

}  // namespace

std::string config_to_json(const DeGTAConfig& cfg) { return config_json(cfg).dump(); }

DeGTAConfig config_from_json(std::string_view text) {
  return guarded("config", [&] { return config_from(json::parse(text)); });
}

std::string serialize_checkpoint(const Model& model) {
  json manifest = json::array();
  std::size_t offset = 0;
  for (const auto& e : model.params.entries) {
    const std::size_t bytes = e.value.size() * sizeof(double);
    manifest.push_back(
        {{"name", e.name}, {"shape", {e.value.rows(), e.value.cols()}}, {"offset", offset}, {"bytes", bytes}});
    offset += bytes;
  }
  const json header{{"config", config_json(model.config)}, {"input_dim", model.input_dim},
                    {"num_outputs", model.num_outputs},    {"task", to_string(model.task)},
                    {"regression", model.regression},      {"manifest", manifest}};
  std::string out(kCheckpointMagic);
  out += header.dump();
  out += '\n';
  out.reserve(out.size() + offset);
  for (const auto& e : model.params.entries)
    for (double v : e.value.values()) put_le(out, v);
  return out;
}

Model deserialize_checkpoint(std::string_view bytes) {
  require(bytes.substr(0, kCheckpointMagic.size()) == kCheckpointMagic, ErrorKind::kValidation,
          "not a checkpoint file (bad magic bytes)");
  bytes.remove_prefix(kCheckpointMagic.size());
  const auto nl = bytes.find('\n');
  require(nl != std::string_view::npos, ErrorKind::kValidation, "checkpoint header is not terminated");
  const std::string_view blob = bytes.substr(nl + 1);

  return guarded("checkpoint header", [&] {
    const json header = json::parse(bytes.substr(0, nl));
    Model m;
    m.config = config_from(header.at("config"));
    m.input_dim = header.at("input_dim").get<std::size_t>();
    m.num_outputs = header.at("num_outputs").get<std::size_t>();
    m.task = parse_task(header.at("task").get<std::string>());
    m.regression = header.at("regression").get<bool>();
    // The manifest must match the layout implied by the config.
    ParameterSet expected = init_parameters(m.config, m.input_dim, m.num_outputs);
    const json& manifest = header.at("manifest");
    require(manifest.size() == expected.entries.size(), ErrorKind::kValidation, [&] {
      return "manifest lists " + std::to_string(manifest.size()) + " parameters, expected " +
             std::to_string(expected.entries.size());
    });
    for (std::size_t i = 0; i < manifest.size(); ++i) {
      const json& item = manifest[i];
      auto& entry = expected.entries[i];
      const auto name = item.at("name").get<std::string>();
      const auto rows = item.at("shape").at(0).get<std::size_t>();
      const auto cols = item.at("shape").at(1).get<std::size_t>();
      const auto offset = item.at("offset").get<std::size_t>();
      const auto nbytes = item.at("bytes").get<std::size_t>();
      require(name == entry.name && rows == entry.value.rows() && cols == entry.value.cols() &&
                  nbytes == rows * cols * sizeof(double),
              ErrorKind::kValidation,
              [&] { return "manifest entry '" + name + "' does not match the configured model"; });
      require(offset <= blob.size() && nbytes <= blob.size() - offset, ErrorKind::kValidation,
              [&] { return "parameter blob is truncated at '" + name + "'"; });
      for (std::size_t j = 0; j < rows * cols; ++j) entry.value[j] = get_le(blob.data() + offset + 8 * j);
    }
    m.params = std::move(expected);
    return m;
  });
}

void save_checkpoint(const Model& model, const std::filesystem::path& file) {
  std::ofstream out(file, std::ios::binary);
  require(out.good(), ErrorKind::kValidation, [&] { return "cannot write checkpoint " + file.string(); });
  const std::string bytes = serialize_checkpoint(model);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  require(out.good(), ErrorKind::kValidation, [&] { return "failed writing checkpoint " + file.string(); });
}

Model load_checkpoint(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  require(in.good(), ErrorKind::kValidation, [&] { return "missing checkpoint " + file.string(); });
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_checkpoint(bytes);
}

}  // namespace degta
