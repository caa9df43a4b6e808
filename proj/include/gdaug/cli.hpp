// Copyright 2026 The gdaug Authors.
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


// Command-line front end: subcommands, config loading with dotted overrides,
// seeding, and run manifests.

#pragma once

#include "gdaug/pipeline.hpp"

#include <json.hpp>

#include <filesystem>
#include <map>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace gdaug::cli {

enum ExitCode : int { kOk = 0, kAcceptanceFailure = 1, kConfigError = 2, kDataError = 3 };

// Sets the dotted path of "a.b.c=value" in j, creating objects on the way.
// The value is parsed as JSON when it parses and kept as a string otherwise.
void apply_override(nlohmann::json& j, const std::string& assignment);

// SHA-1 of "blob <size>\0" followed by the content, as git computes it.
std::string git_blob_hash(std::string_view content);
std::string file_hash(const std::filesystem::path& path);

struct RunManifest {
  std::string command;
  std::vector<std::string> argv;
  nlohmann::json config;
  std::map<std::string, std::string> input_hashes;  // path -> git blob hash
  SeedConfig seeds;
  std::map<std::string, std::string> artifacts;  // name -> path
  std::map<std::string, double> timings;         // phase -> seconds
  std::string status = "running";
  std::string started_at;
  std::string finished_at;

  nlohmann::json to_json() const;
  void write(const std::filesystem::path& path) const;
};

// Runs one command line (args[0] is the program name) and returns its exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gdaug::cli
