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

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "senselang/pipeline.hpp"

int main(int argc, char** argv) {
  CLI::App app{"senselang: sensor-language pretraining pipeline"};
  app.require_subcommand(1);

  std::string config_path;
  bool force = false;
  bool resume = false;
  std::string eval_task;
  std::string caption_split = "eval";

  auto add_config = [&config_path](CLI::App* cmd) {
    cmd->add_option("-c,--config", config_path, "run configuration file")
        ->required();
  };

  auto* gen_data = app.add_subcommand("gen-data", "generate a synthetic dataset");
  add_config(gen_data);
  gen_data->add_flag("--force", force, "overwrite existing outputs");

  auto* gen_captions =
      app.add_subcommand("gen-captions", "generate caption corpora");
  add_config(gen_captions);
  gen_captions->add_flag("--force", force, "overwrite existing outputs");

  auto* train = app.add_subcommand("train", "pretrain the dual encoder");
  add_config(train);
  train->add_flag("--resume", resume, "resume from the saved train state");

  auto* eval = app.add_subcommand("eval", "run an evaluation protocol");
  add_config(eval);
  eval->add_option("task", eval_task,
                   "one of: zeroshot, retrieval, fewshot, caption")
      ->required()
      ->check(CLI::IsMember({"zeroshot", "retrieval", "fewshot", "caption"}));

  auto* caption =
      app.add_subcommand("caption", "generate captions with a trained model");
  add_config(caption);
  caption->add_option("--split", caption_split, "dataset split (train|eval)")
      ->check(CLI::IsMember({"train", "eval"}));

  auto* ablate = app.add_subcommand("ablate", "run the ablation grid");
  add_config(ablate);

  CLI11_PARSE(app, argc, argv);

  try {
    const senselang::RunConfig cfg = senselang::load_run_config(config_path);
    if (gen_data->parsed()) {
      senselang::cmd_gen_data(cfg, force);
    } else if (gen_captions->parsed()) {
      senselang::cmd_gen_captions(cfg, force);
    } else if (train->parsed()) {
      senselang::cmd_train(cfg, resume);
    } else if (eval->parsed()) {
      senselang::cmd_eval(cfg, eval_task);
    } else if (caption->parsed()) {
      senselang::cmd_caption(cfg, caption_split);
    } else if (ablate->parsed()) {
      senselang::cmd_ablate(cfg);
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
