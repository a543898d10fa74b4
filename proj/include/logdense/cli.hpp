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

#ifndef LOGDENSE_CLI_HPP_
#define LOGDENSE_CLI_HPP_

#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <vector>

namespace logdense {

inline constexpr const char* kToolVersion = "0.1.0";

enum ExitCode : int {
  kExitOk = 0,
  kExitVerificationFailed = 1,
  kExitUsage = 2,
};

// Runs one command line (without the program name). Primary output goes to
// `out`, diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Lowercase hex SHA-256.
std::string sha256_hex(const std::string& bytes);

struct RunManifest {
  std::string command;
  std::vector<std::string> arguments;
  std::string tool_version = kToolVersion;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> output_digests;  // path -> sha256
};

std::string manifest_json(const RunManifest& manifest);

}  // namespace logdense

#endif  // LOGDENSE_CLI_HPP_
