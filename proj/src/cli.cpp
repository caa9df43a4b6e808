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

#include "gdaug/acceptance.hpp"
#include "gdaug/augmentor.hpp"
#include "gdaug/diffusion.hpp"
#include "gdaug/errors.hpp"
#include "gdaug/predictor.hpp"
#include "gdaug/synth.hpp"

#include <CLI11.hpp>
#include <openssl/evp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iterator>
#include <memory>
#include <sstream>

namespace gdaug::cli {

void apply_override(nlohmann::json& j, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + assignment + "' is not key=value");
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  nlohmann::json value = nlohmann::json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;

  nlohmann::json* node = &j;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) throw ConfigError("override '" + assignment + "' has an empty key segment");
    if (!node->is_object()) throw ConfigError("override '" + assignment + "' descends into a non-object");
    if (dot == std::string::npos) {
      (*node)[key] = std::move(value);
      return;
    }
    if (!node->contains(key)) (*node)[key] = nlohmann::json::object();
    node = &(*node)[key];
    start = dot + 1;
  }
}

std::string git_blob_hash(std::string_view content) {
  const std::string header = "blob " + std::to_string(content.size()) + '\0';
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha1(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), header.data(), header.size()) != 1 ||
      EVP_DigestUpdate(ctx.get(), content.data(), content.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1) {
    throw Error("SHA-1 computation failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xf];
  }
  return out;
}

std::string file_hash(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  const std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return git_blob_hash(content);
}

nlohmann::json RunManifest::to_json() const {
  return {{"command", command},
          {"argv", argv},
          {"config", config},
          {"input_hashes", input_hashes},
          {"seeds", {{"data", seeds.data}, {"model", seeds.model}, {"sampler", seeds.sampler}}},
          {"artifacts", artifacts},
          {"timings", timings},
          {"status", status},
          {"started_at", started_at},
          {"finished_at", finished_at}};
}

void RunManifest::write(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write " + path.string());
  out << to_json().dump(2) << '\n';
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) throw ConfigError("config " + path + " is not valid JSON");
  return j;
}

nlohmann::json read_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open checkpoint " + path);
  nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) throw ParseError("checkpoint " + path + " is not valid JSON");
  return j;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write " + path.string());
  out << text;
}

// Options shared by every subcommand.
struct Common {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string node_types_path;
  std::string task = "classification";
  Index workers = 0;  // 0 keeps the config value

  void attach(CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config file");
    sub->add_option("--set", overrides, "override a config key: dotted.path=value");
    sub->add_option("--node-types", node_types_path, "node-type table JSON (default: C, N, O)");
    sub->add_option("--task", task, "classification or regression")
        ->check(CLI::IsMember({"classification", "regression"}));
    sub->add_option("--workers", workers, "parallel augmentation workers")->check(CLI::PositiveNumber);
  }

  nlohmann::json raw_config() const {
    nlohmann::json j = config_path.empty() ? nlohmann::json::object() : read_json_file(config_path);
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    for (const auto& o : overrides) apply_override(j, o);
    return j;
  }

  // DctConfig with overrides, the DCT_SEED override and --workers applied.
  DctConfig dct_config() const {
    nlohmann::json j = raw_config();
    if (const char* env = std::getenv("DCT_SEED")) {
      char* end = nullptr;
      const unsigned long long s = std::strtoull(env, &end, 10);
      if (end == env || *end != '\0') throw ConfigError(std::string("DCT_SEED is not an integer: ") + env);
      j["seeds"] = {{"data", s}, {"model", s}, {"sampler", s}};
    }
    if (workers > 0) j["workers"] = workers;
    return dct_config_from_json(j);
  }

  NodeTypeTable table() const {
    return node_types_path.empty() ? NodeTypeTable::organic() : read_node_type_table(node_types_path);
  }

  TaskSpec task_spec(const std::vector<Graph>& train) const {
    if (train.empty()) throw DegenerateInputError("no training graphs");
    const Index k = train.front().label.size();
    if (k == 0) throw ValidationError("training graphs carry no labels");
    for (const auto& g : train)
      if (g.label.size() != k) throw ValidationError("graph " + g.id + " has a different number of tasks");
    if (task == "classification") return TaskSpec::classification(k);
    // Pooled standard deviation of the valid labels.
    double sum = 0.0;
    double sq = 0.0;
    double n = 0.0;
    for (const auto& g : train)
      for (Index t = 0; t < k; ++t)
        if (g.label.valid(t)) {
          sum += g.label.values(t);
          sq += g.label.values(t) * g.label.values(t);
          n += 1.0;
        }
    if (n < 2.0) throw DegenerateInputError("too few regression labels to estimate their scale");
    const double var = (sq - sum * sum / n) / (n - 1.0);
    return TaskSpec::regression(k, var > 0.0 ? std::sqrt(var) : 1.0);
  }
};

SeedConfig seeds_of(const DctConfig& c) { return c.seeds; }

// Writes the manifest before the run and finalizes it afterwards, also on failure.
class ManifestScope {
 public:
  ManifestScope(std::filesystem::path path, RunManifest m) : path_(std::move(path)), m_(std::move(m)) {
    m_.started_at = utc_now();
    if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
    m_.write(path_);
  }
  RunManifest& manifest() { return m_; }
  void finish(const std::string& status) {
    m_.status = status;
    m_.finished_at = utc_now();
    m_.timings["total"] = seconds_since(t0_);
    m_.write(path_);
    done_ = true;
  }
  ~ManifestScope() {
    if (!done_) {
      try {
        finish("failed");
      } catch (...) {
      }
    }
  }

 private:
  std::filesystem::path path_;
  RunManifest m_;
  Clock::time_point t0_ = Clock::now();
  bool done_ = false;
};

RunManifest base_manifest(const std::string& command, const std::vector<std::string>& args, nlohmann::json config,
                          const SeedConfig& seeds) {
  RunManifest m;
  m.command = command;
  m.argv = args;
  m.config = std::move(config);
  m.seeds = seeds;
  return m;
}

void hash_inputs(RunManifest& m, const std::vector<std::string>& paths) {
  for (const auto& p : paths)
    if (!p.empty()) m.input_hashes[p] = file_hash(p);
}

ScoreNetworks load_nets(const std::string& path, const DctConfig& cfg) {
  ScoreNetworks nets = ScoreNetworks::from_json(read_checkpoint(path));
  if (nets.sde().sigma_min != cfg.sde.sigma_min || nets.sde().sigma_max != cfg.sde.sigma_max) {
    throw ConfigError("noise schedule in the config does not match the score checkpoint");
  }
  return nets;
}

int cmd_train_diffusion(const Common& c, const std::string& unlabeled, const std::string& out_path,
                        std::string loss_csv, const std::vector<std::string>& args, std::ostream& out) {
  const DctConfig cfg = c.dct_config();
  const NodeTypeTable table = c.table();
  if (loss_csv.empty()) loss_csv = out_path + ".loss.csv";
  ManifestScope scope(out_path + ".manifest.json", base_manifest("train-diffusion", args, to_json(cfg), seeds_of(cfg)));
  RunManifest& m = scope.manifest();
  hash_inputs(m, {unlabeled, c.config_path, c.node_types_path});
  m.write(out_path + ".manifest.json");

  auto t0 = Clock::now();
  const std::vector<Graph> graphs = read_graphs_jsonl(unlabeled, table);
  m.timings["load"] = seconds_since(t0);
  t0 = Clock::now();
  const DiffusionTrainResult r = train_diffusion(graphs, cfg.sde, cfg.score_net_hyper, table.size(), cfg.seeds.model);
  m.timings["train"] = seconds_since(t0);

  write_text(out_path, r.nets.to_json().dump() + "\n");
  std::string csv = "epoch,loss\n";
  for (std::size_t e = 0; e < r.loss_curve.size(); ++e) csv += std::to_string(e + 1) + "," + format_double(r.loss_curve[e]) + "\n";
  write_text(loss_csv, csv);
  m.artifacts["checkpoint"] = out_path;
  m.artifacts["loss_csv"] = loss_csv;
  scope.finish("ok");
  out << "trained score networks on " << graphs.size() << " graphs; final loss "
      << (r.loss_curve.empty() ? 0.0 : r.loss_curve.back()) << "\n";
  return kOk;
}

int cmd_train_predictor(const Common& c, const std::string& train_path, const std::string& valid_path,
                        const std::string& out_path, std::string loss_csv, const std::vector<std::string>& args,
                        std::ostream& out) {
  const DctConfig cfg = c.dct_config();
  const NodeTypeTable table = c.table();
  if (loss_csv.empty()) loss_csv = out_path + ".loss.csv";
  ManifestScope scope(out_path + ".manifest.json", base_manifest("train-predictor", args, to_json(cfg), seeds_of(cfg)));
  RunManifest& m = scope.manifest();
  hash_inputs(m, {train_path, valid_path, c.config_path, c.node_types_path});
  m.write(out_path + ".manifest.json");

  const std::vector<Graph> train = read_graphs_jsonl(train_path, table);
  const std::vector<Graph> valid = valid_path.empty() ? std::vector<Graph>{} : read_graphs_jsonl(valid_path, table);
  const TaskSpec spec = c.task_spec(train);
  const auto t0 = Clock::now();
  Rng init_rng = make_rng(cfg.seeds.model, 10);
  PredictorTrainer trainer(PredictorParams::init(table.size(), spec.n_tasks, cfg.predictor_hyper, init_rng), spec,
                           cfg.predictor_hyper, cfg.seeds.model);
  trainer.run(to_examples(train, table.size()), to_examples(valid, table.size()), cfg.predictor_hyper.epochs);
  m.timings["train"] = seconds_since(t0);

  nlohmann::json ckpt = to_json(trainer.best_params());
  ckpt["task"] = to_json(spec);
  write_text(out_path, ckpt.dump() + "\n");
  const TrainHistory& h = trainer.history();
  std::string csv = "epoch,train_loss,valid_loss\n";
  for (std::size_t e = 0; e < h.train_loss.size(); ++e) {
    csv += std::to_string(e + 1) + "," + format_double(h.train_loss[e]) + "," +
           (e < h.valid_loss.size() ? format_double(h.valid_loss[e]) : std::string()) + "\n";
  }
  write_text(loss_csv, csv);
  m.artifacts["checkpoint"] = out_path;
  m.artifacts["loss_csv"] = loss_csv;
  scope.finish("ok");
  out << "trained predictor on " << train.size() << " graphs; best epoch " << h.best_epoch << "\n";
  return kOk;
}

PredictorParams load_predictor(const std::string& path, std::optional<TaskSpec>* spec = nullptr) {
  const nlohmann::json j = read_checkpoint(path);
  if (spec && j.contains("task")) *spec = task_spec_from_json(j.at("task"));
  return predictor_params_from_json(j);
}

int cmd_augment(const Common& c, const std::string& data_path, const std::string& predictor_path,
                const std::string& nets_path, const std::string& out_path, bool all,
                const std::vector<std::string>& args, std::ostream& out) {
  const DctConfig cfg = c.dct_config();
  const NodeTypeTable table = c.table();
  ManifestScope scope(out_path + ".manifest.json", base_manifest("augment", args, to_json(cfg), seeds_of(cfg)));
  RunManifest& m = scope.manifest();
  hash_inputs(m, {data_path, predictor_path, nets_path, c.config_path, c.node_types_path});
  m.write(out_path + ".manifest.json");

  const std::vector<Graph> data = read_graphs_jsonl(data_path, table);
  std::optional<TaskSpec> stored;
  const PredictorParams predictor = load_predictor(predictor_path, &stored);
  const TaskSpec spec = stored ? *stored : c.task_spec(data);
  const ScoreNetworks nets = load_nets(nets_path, cfg);
  const std::vector<Graph> sources = all ? data : select_lowest_loss(data, predictor, spec, cfg.top_n_percent);
  const auto t0 = Clock::now();
  const std::vector<AugmentedExample> aug =
      augment_all(sources, predictor, nets, cfg.sde, cfg.aug, data, spec, table, cfg.seeds.sampler, cfg.workers);
  m.timings["augment"] = seconds_since(t0);
  if (std::filesystem::path(out_path).has_parent_path())
    std::filesystem::create_directories(std::filesystem::path(out_path).parent_path());
  write_augmented_jsonl(out_path, aug);
  m.artifacts["augmented"] = out_path;
  scope.finish("ok");
  out << "augmented " << aug.size() << " of " << data.size() << " graphs\n";
  return kOk;
}

int cmd_run_dct(const Common& c, const std::string& train_path, const std::string& valid_path,
                const std::string& test_path, const std::string& nets_path, const std::filesystem::path& out_dir,
                const std::vector<std::string>& args, std::ostream& out) {
  const DctConfig cfg = c.dct_config();
  const NodeTypeTable table = c.table();
  std::filesystem::create_directories(out_dir);
  ManifestScope scope(out_dir / "manifest.json", base_manifest("run-dct", args, to_json(cfg), seeds_of(cfg)));
  RunManifest& m = scope.manifest();
  hash_inputs(m, {train_path, valid_path, test_path, nets_path, c.config_path, c.node_types_path});
  m.write(out_dir / "manifest.json");

  auto t0 = Clock::now();
  const std::vector<Graph> train = read_graphs_jsonl(train_path, table);
  const std::vector<Graph> valid = read_graphs_jsonl(valid_path, table);
  const std::vector<Graph> test = read_graphs_jsonl(test_path, table);
  const TaskSpec spec = c.task_spec(train);
  const ScoreNetworks nets = load_nets(nets_path, cfg);
  m.timings["load"] = seconds_since(t0);

  const auto reports_path = out_dir / "reports.jsonl";
  write_text(reports_path, "");
  m.artifacts["reports"] = reports_path.string();
  t0 = Clock::now();
  const DctResult r = run_dct(train, valid, test, nets, spec, cfg, table,
                              [&](const IterationReport& rep, const std::vector<AugmentedExample>& aug) {
                                std::ofstream(reports_path, std::ios::app) << to_json(rep).dump() << '\n';
                                if (rep.iteration == 0) return;
                                const auto p = out_dir / ("augmented_iter" + std::to_string(rep.iteration) + ".jsonl");
                                write_augmented_jsonl(p, aug);
                                m.artifacts["augmented_iter" + std::to_string(rep.iteration)] = p.string();
                              });
  m.timings["run"] = seconds_since(t0);

  nlohmann::json metrics = to_json(r.test_metrics);
  metrics["n_test"] = test.size();
  write_text(out_dir / "metrics.json", metrics.dump(2) + "\n");
  nlohmann::json ckpt = to_json(r.params);
  ckpt["task"] = to_json(spec);
  write_text(out_dir / "predictor.json", ckpt.dump() + "\n");
  m.artifacts["metrics"] = (out_dir / "metrics.json").string();
  m.artifacts["predictor"] = (out_dir / "predictor.json").string();
  scope.finish("ok");
  out << metrics.dump() << "\n";
  return kOk;
}

int cmd_eval(const Common& c, const std::string& predictor_path, const std::string& data_path,
             const std::string& out_path, std::ostream& out) {
  const NodeTypeTable table = c.table();
  const std::vector<Graph> data = read_graphs_jsonl(data_path, table);
  std::optional<TaskSpec> stored;
  const PredictorParams predictor = load_predictor(predictor_path, &stored);
  const TaskSpec spec = stored ? *stored : c.task_spec(data);
  nlohmann::json metrics = to_json(evaluate(data, predictor, spec));
  metrics["n"] = data.size();
  if (!out_path.empty()) write_text(out_path, metrics.dump(2) + "\n");
  out << metrics.dump() << "\n";
  return kOk;
}

int cmd_bench(const Common& c, const std::filesystem::path& out_dir, bool force_failure, const std::vector<int>& only,
              const std::vector<std::string>& args, std::ostream& out) {
  nlohmann::json j = c.raw_config();
  if (const char* env = std::getenv("DCT_SEED")) apply_override(j, std::string("seed=") + env);
  if (force_failure) j["force_failure"] = true;
  if (!only.empty()) j["only"] = only;
  const BenchConfig cfg = bench_config_from_json(j);
  std::filesystem::create_directories(out_dir);
  const SeedConfig seeds{cfg.seed, cfg.seed, cfg.seed};
  ManifestScope scope(out_dir / "manifest.json", base_manifest("bench", args, to_json(cfg), seeds));
  hash_inputs(scope.manifest(), {c.config_path});
  scope.manifest().write(out_dir / "manifest.json");

  bool all_passed = true;
  nlohmann::json checks = nlohmann::json::array();
  const auto t0 = Clock::now();
  run_acceptance(cfg, [&](const CheckResult& r) {
    out << summary_line(r) << std::endl;
    all_passed = all_passed && r.passed;
    checks.push_back(to_json(r));
    scope.manifest().timings["check_" + std::to_string(r.id)] = r.seconds;
  });
  scope.manifest().timings["bench"] = seconds_since(t0);
  const auto summary = out_dir / "bench_summary.json";
  write_text(summary, nlohmann::json{{"passed", all_passed}, {"checks", checks}}.dump(2) + "\n");
  scope.manifest().artifacts["summary"] = summary.string();
  scope.finish(all_passed ? "ok" : "acceptance_failed");
  return all_passed ? kOk : kAcceptanceFailure;
}

int cmd_gen_synthetic(const Common& c, const std::string& out_path, std::ostream& out) {
  nlohmann::json j = c.raw_config();
  if (const char* env = std::getenv("DCT_SEED")) apply_override(j, std::string("seed=") + env);
  SyntheticTaskConfig cfg;
  try {
    cfg = synthetic_task_config_from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("synthetic config: ") + e.what());
  }
  const SyntheticTask task = gen_synthetic_task(cfg, c.table());
  if (std::filesystem::path(out_path).has_parent_path())
    std::filesystem::create_directories(std::filesystem::path(out_path).parent_path());
  write_graphs_jsonl(out_path, task.graphs);
  out << "wrote " << task.graphs.size() << " graphs to " << out_path << "\n";
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"gdaug: diffusion-based graph augmentation for property prediction"};
  app.require_subcommand(1);

  Common common;
  std::string unlabeled, train, valid, test, data, nets, predictor, out_path, out_dir, loss_csv;
  bool all = false;
  bool force_failure = false;
  std::vector<int> only;

  auto* td = app.add_subcommand("train-diffusion", "train score networks on unlabeled graphs");
  common.attach(td);
  td->add_option("--unlabeled", unlabeled, "unlabeled graphs (JSONL)")->required();
  td->add_option("--out", out_path, "score-network checkpoint to write")->required();
  td->add_option("--loss-csv", loss_csv, "loss curve CSV (default: <out>.loss.csv)");

  auto* tp = app.add_subcommand("train-predictor", "train the property predictor on labeled graphs");
  common.attach(tp);
  tp->add_option("--train", train, "training graphs (JSONL)")->required();
  tp->add_option("--valid", valid, "validation graphs (JSONL)");
  tp->add_option("--out", out_path, "predictor checkpoint to write")->required();
  tp->add_option("--loss-csv", loss_csv, "loss curve CSV (default: <out>.loss.csv)");

  auto* au = app.add_subcommand("augment", "augment labeled graphs once each");
  common.attach(au);
  au->add_option("--data", data, "labeled graphs (JSONL); also the negative pool")->required();
  au->add_option("--predictor", predictor, "predictor checkpoint")->required();
  au->add_option("--nets", nets, "score-network checkpoint")->required();
  au->add_option("--out", out_path, "augmented graphs (JSONL) to write")->required();
  au->add_flag("--all", all, "augment every graph instead of the lowest-loss top_n_percent");

  auto* rd = app.add_subcommand("run-dct", "run the iterative augment-and-train loop");
  common.attach(rd);
  rd->add_option("--train", train, "training graphs (JSONL)")->required();
  rd->add_option("--valid", valid, "validation graphs (JSONL)")->required();
  rd->add_option("--test", test, "test graphs (JSONL)")->required();
  rd->add_option("--nets", nets, "score-network checkpoint")->required();
  rd->add_option("--out-dir", out_dir, "output directory")->required();

  auto* ev = app.add_subcommand("eval", "evaluate a predictor checkpoint");
  common.attach(ev);
  ev->add_option("--predictor", predictor, "predictor checkpoint")->required();
  ev->add_option("--data", data, "labeled graphs (JSONL)")->required();
  ev->add_option("--out", out_path, "metrics JSON to write");

  auto* be = app.add_subcommand("bench", "run the acceptance suite");
  common.attach(be);
  be->add_option("--out-dir", out_dir, "output directory")->required();
  be->add_flag("--force-failure", force_failure, "append a failing check");
  be->add_option("--only", only, "check ids to run")->delimiter(',');

  auto* gs = app.add_subcommand("gen-synthetic", "write a synthetic motif task as graph JSONL");
  common.attach(gs);
  gs->add_option("--out", out_path, "graphs (JSONL) to write")->required();

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return kConfigError;
  }

  try {
    if (td->parsed()) return cmd_train_diffusion(common, unlabeled, out_path, loss_csv, args, out);
    if (tp->parsed()) return cmd_train_predictor(common, train, valid, out_path, loss_csv, args, out);
    if (au->parsed()) return cmd_augment(common, data, predictor, nets, out_path, all, args, out);
    if (rd->parsed()) return cmd_run_dct(common, train, valid, test, nets, out_dir, args, out);
    if (ev->parsed()) return cmd_eval(common, predictor, data, out_path, out);
    if (gs->parsed()) return cmd_gen_synthetic(common, out_path, out);
    return cmd_bench(common, out_dir, force_failure, only, args, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const DomainError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const Error& e) {
    err << "data error: " << e.what() << "\n";
    return kDataError;
  } catch (const nlohmann::json::exception& e) {
    err << "data error: " << e.what() << "\n";
    return kDataError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "data error: " << e.what() << "\n";
    return kDataError;
  }
}

}  // namespace gdaug::cli
