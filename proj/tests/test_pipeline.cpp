// Copyright 2026 The SenseLang Authors.
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

#include <cstdlib>
#include <filesystem>

#include <catch2/catch_amalgamated.hpp>

#include "senselang/pipeline.hpp"

using namespace senselang;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  REQUIRE(is);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

RunConfig small_config(const std::string& name, const std::string& out_dir) {
  RunConfig cfg;
  cfg.name = name;
  cfg.out_dir = out_dir;
  cfg.seed = 11;
  cfg.train.seed = 11;
  cfg.days_per_class = 3;
  cfg.eval_days_per_class = 2;
  cfg.caption_variant = "sem";
  cfg.train.steps = 2;
  cfg.train.batch_size = 4;
  cfg.fewshot_shots = {2};
  cfg.fewshot_seeds = 2;
  cfg.ablate_steps = 2;
  cfg.ablate_days_per_class = 2;
  return cfg;
}

}  // namespace

TEST_CASE("run config parses values, arrays, and rejects unknown keys") {
  const std::string text = R"(
# comment
[run]
name = "demo"
seed = 42

[data]
classes = ["Run", "Walk"]
days_per_class = 5

[captions]
variant = "stat+sem"
sweep = true

[train]
base_lr = 0.0005
denominator_mode = "exclude"
schedule = "linear-warmup-cosine-decay"

[eval]
recall_ks = [1, 10]
)";
  auto cfg = parse_run_config(text);
  CHECK(cfg.name == "demo");
  CHECK(cfg.seed == 42);
  CHECK(cfg.train.seed == 42);
  CHECK(cfg.classes == std::vector<std::string>{"Run", "Walk"});
  CHECK(cfg.days_per_class == 5);
  CHECK(cfg.caption_variant == "stat+sem");
  CHECK(cfg.caption_sweep);
  CHECK(cfg.train.base_lr == 0.0005);
  CHECK(cfg.train.loss.denominator_mode == DenominatorMode::ExcludePositive);
  CHECK(cfg.train.schedule == LrSchedule::LinearWarmupCosineDecay);
  CHECK(cfg.recall_ks == std::vector<int>{1, 10});
  // Untouched keys keep their defaults.
  CHECK(cfg.eval_days_per_class == 10);
  CHECK(cfg.train.loss.tau == 0.01);

  CHECK_THROWS_AS(parse_run_config("[bogus]\nx = 1\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_run_config("[run]\nbogus_key = 1\n"),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse_run_config("[train]\nsteps = banana\n"),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse_run_config("[run]\nname = \"unterminated\n"),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse_run_config("orphan = 1\n"), std::invalid_argument);
}

TEST_CASE("SLM_SEED is a fallback, not an override") {
  setenv("SLM_SEED", "1234", 1);
  auto from_env = parse_run_config("[run]\nname = \"x\"\n");
  CHECK(from_env.seed == 1234);
  CHECK(from_env.train.seed == 1234);
  auto from_file = parse_run_config("[run]\nseed = 9\n");
  CHECK(from_file.seed == 9);
  CHECK(from_file.train.seed == 9);
  unsetenv("SLM_SEED");
  auto plain = parse_run_config("[run]\nname = \"x\"\n");
  CHECK(plain.seed == 0);
}

TEST_CASE("serialized config reparses to the same values") {
  RunConfig cfg = small_config("roundtrip", "/tmp");
  cfg.caption_sweep = true;
  cfg.train.loss.denominator_mode = DenominatorMode::ExcludePositive;
  auto reparsed = parse_run_config(serialize_run_config(cfg));
  CHECK(serialize_run_config(reparsed) == serialize_run_config(cfg));
  CHECK(config_digest(reparsed) == config_digest(cfg));
  RunConfig other = cfg;
  other.seed += 1;
  CHECK(config_digest(other) != config_digest(cfg));
}

TEST_CASE("full pipeline round: data, captions, training, reports") {
  const fs::path root = fs::temp_directory_path() / "senselang_pipe";
  fs::remove_all(root);
  RunConfig cfg = small_config("round", root.string());
  const RunPaths p = RunPaths::for_run(cfg);

  std::ostringstream sink;
  cmd_gen_data(cfg, false, sink);
  CHECK(fs::exists(p.dataset_base("train").string() + ".slmd"));
  CHECK(fs::exists(p.dataset_base("eval").string() + ".jsonl"));
  CHECK(fs::exists(p.config()));

  // Refusal without --force, rerun allowed with it.
  CHECK_THROWS_AS(cmd_gen_data(cfg, false, sink), std::runtime_error);
  cmd_gen_data(cfg, true, sink);

  auto [days, logs] = read_dataset(p.dataset_base("train").string());
  CHECK(days.size() == cfg.classes.size() * cfg.days_per_class);
  std::map<std::string, int> counts;
  for (const auto& l : logs) ++counts[label_of(l)];
  for (const auto& c : cfg.classes) CHECK(counts[c] == cfg.days_per_class);

  cmd_gen_captions(cfg, false, sink);
  CHECK_THROWS_AS(cmd_gen_captions(cfg, false, sink), std::runtime_error);
  auto corpus =
      read_caption_corpus(p.caption_corpus("train", cfg.variant()).string());
  CHECK(corpus.size() == days.size());

  cmd_train(cfg, false, sink);
  CHECK(fs::exists(p.checkpoint()));
  CHECK(fs::exists(p.train_state()));
  CHECK(fs::exists(p.vocab()));
  CHECK(fs::exists(p.norm()));
  CHECK(fs::exists(p.train_log()));

  for (const char* task : {"zeroshot", "retrieval", "fewshot", "caption"}) {
    cmd_eval(cfg, task, sink);
    CHECK(fs::exists(p.reports() / (std::string(task) + ".json")));
    CHECK(fs::exists(p.reports() / (std::string(task) + ".txt")));
  }
  auto report = nlohmann::json::parse(slurp(p.reports() / "zeroshot.json"));
  CHECK(report.at("task") == "zeroshot");
  CHECK(report.at("metrics").contains("auroc_macro"));
  CHECK(report.at("config_digest") == config_digest(cfg));

  cmd_caption(cfg, "eval", sink);
  CHECK(fs::exists(p.reports() / "generated_eval.jsonl"));

  fs::remove_all(root);
}

TEST_CASE("caption sweep writes all seven corpora") {
  const fs::path root = fs::temp_directory_path() / "senselang_sweep";
  fs::remove_all(root);
  RunConfig cfg = small_config("sweep", root.string());
  cfg.caption_sweep = true;
  cfg.days_per_class = 1;
  cfg.eval_days_per_class = 1;
  std::ostringstream sink;
  cmd_gen_data(cfg, false, sink);
  cmd_gen_captions(cfg, false, sink);
  const RunPaths p = RunPaths::for_run(cfg);
  for (const auto& v : all_caption_variants()) {
    CHECK(fs::exists(p.caption_corpus("train", v)));
    CHECK(fs::exists(p.caption_corpus("eval", v)));
  }
  fs::remove_all(root);
}

TEST_CASE("generation is byte-identical across reruns") {
  const fs::path root = fs::temp_directory_path() / "senselang_det";
  fs::remove_all(root);
  std::ostringstream sink;
  RunConfig a = small_config("a", (root / "one").string());
  RunConfig b = small_config("b", (root / "two").string());
  // Only the run name and location differ; generated bytes must not.
  cmd_gen_data(a, false, sink);
  cmd_gen_data(b, false, sink);
  cmd_gen_captions(a, false, sink);
  cmd_gen_captions(b, false, sink);
  const RunPaths pa = RunPaths::for_run(a);
  const RunPaths pb = RunPaths::for_run(b);
  for (const char* split : {"train", "eval"}) {
    CHECK(slurp(pa.dataset_base(split).string() + ".slmd") ==
          slurp(pb.dataset_base(split).string() + ".slmd"));
    CHECK(slurp(pa.dataset_base(split).string() + ".jsonl") ==
          slurp(pb.dataset_base(split).string() + ".jsonl"));
    CHECK(slurp(pa.caption_corpus(split, a.variant())) ==
          slurp(pb.caption_corpus(split, b.variant())));
  }
  fs::remove_all(root);
}

TEST_CASE("norm stats persist through json") {
  NormStats stats;
  stats.mean.assign(kNumChannels, 1.5);
  stats.std.assign(kNumChannels, 2.5);
  stats.mean[3] = -0.25;
  const auto path = (fs::temp_directory_path() / "senselang_norm.json").string();
  save_norm_stats(stats, path);
  auto loaded = load_norm_stats(path);
  CHECK(loaded.mean == stats.mean);
  CHECK(loaded.std == stats.std);
  fs::remove(path);
}
