// Copyright 2026 The logdense Authors
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

#include "logdense/topology_io.hpp"

#include <sstream>

namespace logdense {

using nlohmann::json;
using nlohmann::ordered_json;

ordered_json topology_to_json(const Topology& topo) {
  ordered_json doc;
  doc["scheme"] = scheme_name(topo.scheme());
  doc["L"] = topo.num_layers();
  doc["block_sizes"] = topo.block_sizes();
  ordered_json params = ordered_json::object();
  for (const auto& [key, value] : topo.scheme_params()) {
    std::visit([&](const auto& v) { params[key] = v; }, value);
  }
  doc["scheme_params"] = std::move(params);
  ordered_json nodes = ordered_json::array();
  for (const Node& n : topo.nodes()) {
    ordered_json entry;
    entry["id"] = n.id;
    entry["kind"] = node_kind_name(n.kind);
    entry["block"] = n.block;
    nodes.push_back(std::move(entry));
  }
  doc["nodes"] = std::move(nodes);
  ordered_json inputs = ordered_json::object();
  for (const Node& n : topo.nodes()) inputs[std::to_string(n.id)] = topo.inputs(n.id);
  doc["inputs"] = std::move(inputs);
  return doc;
}

Topology topology_from_json(const json& doc) {
  try {
    const Scheme scheme = parse_scheme(doc.at("scheme").get<std::string>());
    const int num_layers = doc.at("L").get<int>();
    auto block_sizes = doc.at("block_sizes").get<std::vector<int>>();

    std::map<std::string, ParamValue> params;
    for (const auto& [key, value] : doc.at("scheme_params").items()) {
      if (value.is_number_integer()) {
        params[key] = value.get<std::int64_t>();
      } else if (value.is_string()) {
        params[key] = value.get<std::string>();
      } else if (value.is_array()) {
        params[key] = value.get<std::vector<std::int64_t>>();
      } else {
        throw ConfigError("unsupported value for scheme parameter '" + key + "'");
      }
    }

    std::vector<Node> nodes;
    for (const auto& entry : doc.at("nodes")) {
      nodes.push_back({entry.at("id").get<NodeId>(),
                       parse_node_kind(entry.at("kind").get<std::string>()),
                       entry.at("block").get<int>()});
    }
    const auto& in_doc = doc.at("inputs");
    if (!in_doc.is_object() || in_doc.size() != nodes.size()) {
      throw ConfigError("inputs must list every node exactly once");
    }
    std::vector<std::vector<NodeId>> inputs(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      inputs[i] = in_doc.at(std::to_string(i)).get<std::vector<NodeId>>();
    }
    Topology topo(scheme, std::move(block_sizes), std::move(nodes), std::move(inputs),
                  std::move(params));
    if (topo.num_layers() != num_layers) {
      throw ConfigError("L disagrees with the number of feature nodes");
    }
    return topo;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed topology document: ") + e.what());
  }
}

std::string topology_to_json_string(const Topology& topo) {
  return topology_to_json(topo).dump(1) + "\n";
}

Topology topology_from_json_string(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("topology is not valid JSON: ") + e.what());
  }
  return topology_from_json(doc);
}

std::string topology_to_dot(const Topology& topo) {
  std::ostringstream os;
  os << "digraph \"" << scheme_name(topo.scheme()) << "\" {\n";
  os << "  rankdir=BT;\n";
  for (const Node& n : topo.nodes()) {
    os << "  n" << n.id << " [label=\"" << n.id << "\"";
    if (n.kind == NodeKind::kInitial) os << ", shape=box";
    if (n.kind == NodeKind::kCompression) os << ", shape=diamond";
    os << ", block=" << n.block << "];\n";
  }
  for (const Node& n : topo.nodes()) {
    for (NodeId p : topo.inputs(n.id)) os << "  n" << n.id << " -> n" << p << ";\n";
  }
  os << "}\n";
  return os.str();
}

std::string render_ascii(const Topology& topo, char filled, char empty) {
  const int n = topo.num_nodes();
  std::string out;
  out.reserve(static_cast<std::size_t>(n) * (n + 1));
  for (int r = 0; r < n; ++r) {
    std::string row(n, empty);
    for (NodeId c : topo.inputs(r)) row[c] = filled;
    out += row;
    out += '\n';
  }
  return out;
}

std::string render_pgm(const Topology& topo, PgmFormat format, int cell) {
  if (cell < 1) throw ConfigError("cell size must be positive");
  const int n = topo.num_nodes();
  const int side = n * cell;
  std::ostringstream os;
  os << (format == PgmFormat::kPlain ? "P2" : "P5") << "\n"
     << side << " " << side << "\n255\n";
  for (int r = 0; r < n; ++r) {
    std::string pixels(n, static_cast<char>(255));
    for (NodeId c : topo.inputs(r)) pixels[c] = 0;
    for (int rep = 0; rep < cell; ++rep) {
      for (int c = 0; c < n; ++c) {
        for (int k = 0; k < cell; ++k) {
          const int v = static_cast<unsigned char>(pixels[c]);
          if (format == PgmFormat::kRaw) {
            os.put(static_cast<char>(v));
          } else {
            os << v << ((c == n - 1 && k == cell - 1) ? "\n" : " ");
          }
        }
      }
    }
  }
  return os.str();
}

}  // namespace logdense
