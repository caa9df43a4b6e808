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


#include "gdaug/cli.hpp"
#include "gdaug/errors.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

namespace gdaug::cli {
namespace {

namespace fs = std::filesystem;

struct Sandbox {
  fs::path dir;

  Sandbox() {
    dir = fs::temp_directory_path() / ("gdaug_cli_" + std::to_string(std::rand()) + "_" + std::to_string(counter()++));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Sandbox() { fs::remove_all(dir); }

  static int& counter() {
    static int c = 0;
    return c;
  }

  std::string path(const std::string& name) const { return (dir / name).string(); }

  void write(const std::string& name, const std::string& text) const { std::ofstream(dir / name) << text; }

  std::string read(const std::string& name) const {
    std::ifstream in(dir / name, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  }

  int call(std::vector<std::string> args, std::string* captured = nullptr) const {
    std::ostringstream out;
    std::ostringstream err;
    args.insert(args.begin(), "gdaug");
    const int code = run(args, out, err);
    if (captured) *captured = out.str() + err.str();
    return code;
  }

  void gen(const std::string& name, int n, int seed) const {
    REQUIRE(call({"gen-synthetic", "--set", "n_graphs=" + std::to_string(n), "--set", "seed=" + std::to_string(seed),
                  "--set", "n_lo=4", "--set", "n_hi=7", "--out", path(name)}) == kOk);
  }

  // Tiny networks and few epochs.
  void config() const {
    write("cfg.json",
          R"({"sde": {"sigma_min": 0.3, "snr": 0.6},
              "score_net_hyper": {"epochs": 2, "hidden": 8, "pair_hidden": 8},
              "predictor_hyper": {"epochs": 4, "hidden": 8, "layers": 2},
              "checkpoint_every": 2, "n_iterations": 2})");
  }
};

TEST_CASE("dotted overrides") {
  nlohmann::json j = {{"aug", {{"d_steps", 5}}}};
  apply_override(j, "aug.d_steps=3");
  apply_override(j, "seeds.model=7");
  apply_override(j, "sde.snr=0.5");
  apply_override(j, "name=plain text");
  CHECK(j["aug"]["d_steps"] == 3);
  CHECK(j["seeds"]["model"] == 7);
  CHECK(j["sde"]["snr"] == 0.5);
  CHECK(j["name"] == "plain text");
  CHECK_THROWS_AS(apply_override(j, "novalue"), ConfigError);
  CHECK_THROWS_AS(apply_override(j, "aug.d_steps.x=1"), ConfigError);
  CHECK_THROWS_AS(apply_override(j, "a..b=1"), ConfigError);
}

TEST_CASE("git blob hash") {
  CHECK(git_blob_hash("") == "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
  CHECK(git_blob_hash("hello\n") == "ce013625030ba8dba906f756967f9e9ca394464a");
}

TEST_CASE("train-diffusion writes a checkpoint and a reproducible loss curve") {
  Sandbox s;
  s.config();
  s.gen("unl.jsonl", 40, 1);
  CHECK(s.call({"train-diffusion", "--config", s.path("cfg.json"), "--unlabeled", s.path("unl.jsonl"), "--out",
                s.path("nets.json")}) == kOk);
  CHECK(fs::exists(s.path("nets.json")));
  const std::string first = s.read("nets.json.loss.csv");
  CHECK(first.rfind("epoch,loss\n", 0) == 0);
  CHECK(s.call({"train-diffusion", "--config", s.path("cfg.json"), "--unlabeled", s.path("unl.jsonl"), "--out",
                s.path("nets2.json")}) == kOk);
  CHECK(s.read("nets2.json.loss.csv") == first);

  const nlohmann::json m = nlohmann::json::parse(s.read("nets.json.manifest.json"));
  CHECK(m.at("status") == "ok");
  CHECK(m.at("input_hashes").at(s.path("unl.jsonl")) == file_hash(s.path("unl.jsonl")));
  CHECK(m.at("config").at("aug").at("d_steps") == 5);
  CHECK(m.at("config").at("aug").at("m_negatives") == 5);
  CHECK(m.at("config").at("top_n_percent") == 10.0);
  CHECK(m.at("timings").contains("train"));

  CHECK(s.call({"train-diffusion", "--unlabeled", s.path("missing.jsonl"), "--out", s.path("x.json")}) == kDataError);
  CHECK(nlohmann::json::parse(s.read("x.json.manifest.json")).at("status") == "failed");
  CHECK(s.call({"train-diffusion", "--config", s.path("nope.json"), "--unlabeled", s.path("unl.jsonl"), "--out",
                s.path("x.json")}) == kConfigError);
}

TEST_CASE("config errors and data errors map to their exit codes") {
  Sandbox s;
  s.gen("unl.jsonl", 10, 1);
  s.write("bad.json", "{not json");
  s.write("bad.jsonl", "{\"nodes\": [0], \"edges\": [[0, 3]]}\n");
  std::string msg;
  CHECK(s.call({"train-diffusion", "--config", s.path("bad.json"), "--unlabeled", s.path("unl.jsonl"), "--out",
                s.path("n.json")}, &msg) == kConfigError);
  CHECK(s.call({"train-diffusion", "--set", "sde.sigma_min=-1", "--unlabeled", s.path("unl.jsonl"), "--out",
                s.path("n.json")}) == kConfigError);
  CHECK(s.call({"train-diffusion", "--set", "typo=1", "--unlabeled", s.path("unl.jsonl"), "--out", s.path("n.json")},
               &msg) == kConfigError);
  CHECK(msg.find("typo") != std::string::npos);
  CHECK(s.call({"train-diffusion", "--unlabeled", s.path("bad.jsonl"), "--out", s.path("n.json")}) == kDataError);
  CHECK(s.call({"train-diffusion"}) == kConfigError);
  CHECK(s.call({}) == kConfigError);
  CHECK(s.call({"--help"}) == kOk);
}

TEST_CASE("predictor, augment and eval round trip") {
  Sandbox s;
  s.config();
  s.gen("unl.jsonl", 40, 1);
  s.gen("train.jsonl", 30, 2);
  s.gen("valid.jsonl", 20, 3);
  const std::string cfg = s.path("cfg.json");
  REQUIRE(s.call({"train-diffusion", "--config", cfg, "--unlabeled", s.path("unl.jsonl"), "--out",
                  s.path("nets.json")}) == kOk);
  REQUIRE(s.call({"train-predictor", "--config", cfg, "--train", s.path("train.jsonl"), "--valid",
                  s.path("valid.jsonl"), "--out", s.path("pred.json")}) == kOk);
  CHECK(s.read("pred.json.loss.csv").rfind("epoch,train_loss,valid_loss\n", 0) == 0);

  REQUIRE(s.call({"augment", "--config", cfg, "--data", s.path("train.jsonl"), "--predictor", s.path("pred.json"),
                  "--nets", s.path("nets.json"), "--out", s.path("aug.jsonl")}) == kOk);
  std::ifstream in(s.path("aug.jsonl"));
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    const nlohmann::json j = nlohmann::json::parse(line);
    CHECK(j.contains("source_id"));
    CHECK(j.contains("diagnostics"));
    ++n;
  }
  CHECK(n == 3);
  REQUIRE(s.call({"augment", "--config", cfg, "--all", "--workers", "2", "--data", s.path("train.jsonl"),
                  "--predictor", s.path("pred.json"), "--nets", s.path("nets.json"), "--out",
                  s.path("aug_all.jsonl")}) == kOk);
  CHECK(s.call({"augment", "--config", cfg, "--set", "sde.sigma_min=0.1", "--data", s.path("train.jsonl"),
                "--predictor", s.path("pred.json"), "--nets", s.path("nets.json"), "--out", s.path("a.jsonl")}) ==
        kConfigError);

  std::string out;
  REQUIRE(s.call({"eval", "--predictor", s.path("pred.json"), "--data", s.path("valid.jsonl"), "--out",
                  s.path("m.json")}, &out) == kOk);
  const nlohmann::json m = nlohmann::json::parse(s.read("m.json"));
  CHECK(m.at("auc").get<double>() >= 0.0);
  CHECK(m.at("n") == 20);
}

TEST_CASE("run-dct artifacts, the zero-iteration baseline and seed overrides") {
  Sandbox s;
  s.config();
  s.gen("unl.jsonl", 40, 1);
  s.gen("train.jsonl", 30, 2);
  s.gen("valid.jsonl", 20, 3);
  s.gen("test.jsonl", 20, 4);
  const std::string cfg = s.path("cfg.json");
  REQUIRE(s.call({"train-diffusion", "--config", cfg, "--unlabeled", s.path("unl.jsonl"), "--out",
                  s.path("nets.json")}) == kOk);
  auto dct = [&](const std::string& dir, std::vector<std::string> extra) {
    std::vector<std::string> args{"run-dct", "--config", cfg, "--train", s.path("train.jsonl"), "--valid",
                                  s.path("valid.jsonl"), "--test", s.path("test.jsonl"), "--nets", s.path("nets.json"),
                                  "--out-dir", s.path(dir)};
    args.insert(args.end(), extra.begin(), extra.end());
    return s.call(args);
  };
  REQUIRE(dct("a", {}) == kOk);
  for (const char* f : {"reports.jsonl", "metrics.json", "predictor.json", "manifest.json", "augmented_iter1.jsonl",
                        "augmented_iter2.jsonl"})
    CHECK(fs::exists(s.dir / "a" / f));
  std::istringstream reports(s.read("a/reports.jsonl"));
  std::string line;
  int iterations = 0;
  while (std::getline(reports, line)) {
    const nlohmann::json r = nlohmann::json::parse(line);
    CHECK(r.at("iteration") == iterations);
    if (iterations > 0) CHECK(r.at("n_augmented") == 3);
    ++iterations;
  }
  CHECK(iterations == 3);
  const nlohmann::json manifest = nlohmann::json::parse(s.read("a/manifest.json"));
  CHECK(manifest.at("status") == "ok");
  CHECK(manifest.at("artifacts").size() == 5);

  REQUIRE(dct("b", {"--workers", "3"}) == kOk);
  CHECK(s.read("b/metrics.json") == s.read("a/metrics.json"));
  CHECK(s.read("b/augmented_iter2.jsonl") == s.read("a/augmented_iter2.jsonl"));

  REQUIRE(dct("zero", {"--set", "n_iterations=0"}) == kOk);
  REQUIRE(s.call({"train-predictor", "--config", cfg, "--train", s.path("train.jsonl"), "--valid",
                  s.path("valid.jsonl"), "--out", s.path("plain.json")}) == kOk);
  REQUIRE(s.call({"eval", "--predictor", s.path("plain.json"), "--data", s.path("test.jsonl"), "--out",
                  s.path("plain_metrics.json")}) == kOk);
  CHECK(nlohmann::json::parse(s.read("zero/metrics.json")).at("auc") ==
        nlohmann::json::parse(s.read("plain_metrics.json")).at("auc"));

  setenv("DCT_SEED", "42", 1);
  const int code = dct("seeded", {});
  unsetenv("DCT_SEED");
  REQUIRE(code == kOk);
  const nlohmann::json seeded = nlohmann::json::parse(s.read("seeded/manifest.json"));
  CHECK(seeded.at("seeds").at("data") == 42);
  CHECK(seeded.at("seeds").at("model") == 42);
  CHECK(seeded.at("seeds").at("sampler") == 42);
}

TEST_CASE("bench writes a summary and honours the forced-failure flag") {
  Sandbox s;
  const std::vector<std::string> quick{"--set", "kernel_draws=2000", "--set", "mi_instances=10",
                                       "--set", "gradient_instances=5"};
  std::vector<std::string> args{"bench", "--only", "3,4,5", "--out-dir", s.path("bench")};
  args.insert(args.end(), quick.begin(), quick.end());
  std::string out;
  CHECK(s.call(args, &out) == kOk);
  CHECK(out.find("PASS  3") != std::string::npos);
  const nlohmann::json summary = nlohmann::json::parse(s.read("bench/bench_summary.json"));
  CHECK(summary.at("passed") == true);
  REQUIRE(summary.at("checks").size() == 3);
  for (const auto& c : summary.at("checks")) {
    CHECK(c.contains("value"));
    CHECK(c.contains("threshold"));
  }
  args.push_back("--force-failure");
  CHECK(s.call(args) == kAcceptanceFailure);
  CHECK(nlohmann::json::parse(s.read("bench/bench_summary.json")).at("passed") == false);
  CHECK(nlohmann::json::parse(s.read("bench/manifest.json")).at("status") == "acceptance_failed");
  CHECK(s.call({"bench", "--only", "11", "--out-dir", s.path("bench")}) == kConfigError);
}

}  // namespace
}  // namespace gdaug::cli
