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


// Runs the acceptance suite and prints one PASS/FAIL line per check.

#include "gdaug/acceptance.hpp"
#include "gdaug/errors.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"gdaug acceptance suite"};
  std::string config_path;
  std::string summary_path;
  std::vector<int> only;
  app.add_option("--config", config_path, "bench config JSON");
  app.add_option("--only", only, "check ids to run")->delimiter(',');
  app.add_option("--summary", summary_path, "write the JSON summary here");
  CLI11_PARSE(app, argc, argv);

  try {
    nlohmann::json j = nlohmann::json::object();
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw gdaug::ConfigError("cannot open " + config_path);
      j = nlohmann::json::parse(in);
    }
    if (!only.empty()) j["only"] = only;
    const gdaug::BenchConfig cfg = gdaug::bench_config_from_json(j);
    bool all_passed = true;
    nlohmann::json checks = nlohmann::json::array();
    gdaug::run_acceptance(cfg, [&](const gdaug::CheckResult& r) {
      std::cout << gdaug::summary_line(r) << std::endl;
      all_passed = all_passed && r.passed;
      checks.push_back(gdaug::to_json(r));
    });
    if (!summary_path.empty()) {
      std::ofstream(summary_path) << nlohmann::json{{"passed", all_passed}, {"checks", checks}}.dump(2) << '\n';
    }
    return all_passed ? 0 : 1;
  } catch (const gdaug::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  }
}
