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

#ifndef LOGDENSE_TOPOLOGY_IO_HPP_
#define LOGDENSE_TOPOLOGY_IO_HPP_

#include <string>

#include "json.hpp"
#include "logdense/topology.hpp"

namespace logdense {

// Field order is fixed: scheme, L, block_sizes, scheme_params, nodes, inputs.
nlohmann::ordered_json topology_to_json(const Topology& topo);
// Throws ConfigError on a malformed document or an invalid topology.
Topology topology_from_json(const nlohmann::json& doc);

std::string topology_to_json_string(const Topology& topo);
Topology topology_from_json_string(const std::string& text);

// Graphviz digraph, edges drawn consumer -> producer.
std::string topology_to_dot(const Topology& topo);

// Connection matrix: row r is the consumer, column c the producer, and a
// cell is filled when node r takes direct input from node c.
std::string render_ascii(const Topology& topo, char filled = '#', char empty = '.');

enum class PgmFormat { kPlain /* P2 */, kRaw /* P5 */ };
// Filled cells are black (0) on white (255); `cell` pixels per matrix entry.
std::string render_pgm(const Topology& topo, PgmFormat format, int cell = 1);

}  // namespace logdense

#endif  // LOGDENSE_TOPOLOGY_IO_HPP_
