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

#pragma once

#include <filesystem>
#include <iostream>

#include "senselang/eval.hpp"
#include "senselang/run_config.hpp"
#include "senselang/trainer.hpp"

namespace senselang {

namespace fs = std::filesystem;

// runs/<name>/{config.toml, data/, captions/, checkpoints/, logs/, reports/}
struct RunPaths {
  fs::path root;

  fs::path config() const { return root / "config.toml"; }
  fs::path data() const { return root / "data"; }
  fs::path captions() const { return root / "captions"; }
  fs::path checkpoints() const { return root / "checkpoints"; }
  fs::path logs() const { return root / "logs"; }
  fs::path reports() const { return root / "reports"; }

  fs::path dataset_base(const std::string& split) const {
    return data() / split;
  }
  fs::path caption_corpus(const std::string& split,
                          const CaptionVariant& v) const {
    return captions() / (split + "_" + v.name() + ".jsonl");
  }
  fs::path checkpoint() const { return checkpoints() / "model.slmc"; }
  fs::path train_state() const { return checkpoints() / "train_state.slmt"; }
  fs::path vocab() const { return checkpoints() / "vocab.txt"; }
  fs::path norm() const { return checkpoints() / "norm.json"; }
  fs::path train_log() const { return logs() / "train.csv"; }

  static RunPaths for_run(const RunConfig& cfg) {
    return {fs::path(cfg.out_dir) / cfg.name};
  }
};

inline void ensure_run_layout(const RunPaths& p) {
  for (const auto& d :
       {p.root, p.data(), p.captions(), p.checkpoints(), p.logs(),
        p.reports()}) {
    fs::create_directories(d);
  }
}

inline void archive_config(const RunConfig& cfg, const RunPaths& p) {
  std::ofstream os(p.config(), std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + p.config().string());
  os << serialize_run_config(cfg);
}

inline std::string label_of(const EventLog& log) {
  return log.activities.empty() ? std::string("None")
                                : log.activities.front().label;
}

// ---- gen-data ----

struct GeneratedSplit {
  std::vector<SensorDay> days;
  std::vector<EventLog> logs;
};

inline GeneratedSplit generate_split(const RunConfig& cfg, int split_tag,
                                     int days_per_class,
                                     std::uint64_t* day_counter) {
  GeneratedSplit out;
  for (const auto& label : cfg.classes) {
    for (int i = 0; i < days_per_class; ++i) {
      // Retry with successive salts if a day falls below the validity floor.
      for (int attempt = 0;; ++attempt) {
        if (attempt >= 16) {
          throw std::runtime_error("could not generate a valid day for " +
                                   label);
        }
        const std::uint64_t id = (*day_counter);
        const std::uint64_t day_seed = mix_seed(
            cfg.seed, (static_cast<std::uint64_t>(split_tag) << 48) ^
                          (static_cast<std::uint64_t>(attempt) << 32) ^ id);
        Rng sched_rng(mix_seed(day_seed, 0x5c4edULL));
        auto schedule = make_class_schedule(label, sched_rng);
        auto [day, log] = synthesize_day(day_seed, schedule);
        if (validity_fraction(day) < kMinValidityFraction) continue;
        Rng mood_rng(mix_seed(day_seed, 0x300dULL));
        if (mood_rng.uniform() < cfg.mood_probability) {
          const auto& moods = mood_labels();
          log.moods.push_back(
              {moods[mood_rng.uniform_int(moods.size())],
               static_cast<int>(mood_rng.uniform_int(kMinutesPerDay))});
        }
        day.person_id = *day_counter;
        day.day_id = *day_counter;
        ++(*day_counter);
        out.days.push_back(std::move(day));
        out.logs.push_back(std::move(log));
        break;
      }
    }
  }
  return out;
}

inline void cmd_gen_data(const RunConfig& cfg, bool force,
                         std::ostream& out = std::cout) {
  const RunPaths p = RunPaths::for_run(cfg);
  ensure_run_layout(p);
  const fs::path train_file = p.dataset_base("train").string() + ".slmd";
  if (fs::exists(train_file) && !force) {
    throw std::runtime_error("dataset already exists at " +
                             train_file.string() + " (use --force)");
  }
  std::uint64_t counter = 0;
  auto train = generate_split(cfg, 0, cfg.days_per_class, &counter);
  auto eval = generate_split(cfg, 1, cfg.eval_days_per_class, &counter);
  write_dataset(train.days, train.logs, p.dataset_base("train").string());
  write_dataset(eval.days, eval.logs, p.dataset_base("eval").string());
  archive_config(cfg, p);
  out << "wrote " << train.days.size() << " train days, " << eval.days.size()
      << " eval days to " << p.data().string() << "\n";
  for (const auto& label : cfg.classes) {
    out << "  " << label << ": " << cfg.days_per_class << " train, "
        << cfg.eval_days_per_class << " eval\n";
  }
}

// ---- gen-captions ----

inline std::vector<CaptionRecord> caption_split(
    const GeneratedSplit& split, const CaptionVariant& variant,
    std::uint64_t seed, int budget) {
  std::vector<CaptionRecord> corpus;
  for (std::size_t i = 0; i < split.days.size(); ++i) {
    const auto& day = split.days[i];
    Rng rng(mix_seed(seed, 0xca9ULL ^ day.day_id));
    auto caption = compose_caption(day, split.logs[i], variant, rng, budget);
    corpus.push_back({day.person_id, day.day_id, caption.text, variant});
  }
  return corpus;
}

inline void cmd_gen_captions(const RunConfig& cfg, bool force,
                             std::ostream& out = std::cout) {
  const RunPaths p = RunPaths::for_run(cfg);
  ensure_run_layout(p);
  std::vector<CaptionVariant> variants =
      cfg.caption_sweep ? all_caption_variants()
                        : std::vector<CaptionVariant>{cfg.variant()};
  for (const std::string split : {"train", "eval"}) {
    auto [days, logs] = read_dataset(p.dataset_base(split).string());
    GeneratedSplit s{std::move(days), std::move(logs)};
    for (const auto& v : variants) {
      const fs::path path = p.caption_corpus(split, v);
      if (fs::exists(path) && !force) {
        throw std::runtime_error("caption corpus already exists at " +
                                 path.string() + " (use --force)");
      }
      auto corpus = caption_split(s, v, cfg.seed, cfg.caption_budget);
      write_caption_corpus(corpus, path.string());
      out << "wrote " << corpus.size() << " captions (" << v.name() << ", "
          << split << ") to " << path.string() << "\n";
    }
  }
}

// ---- norm stats persistence ----

inline void save_norm_stats(const NormStats& stats, const std::string& path) {
  nlohmann::json j{{"mean", stats.mean}, {"std", stats.std}};
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << j.dump(2) << "\n";
}

inline NormStats load_norm_stats(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  nlohmann::json j;
  is >> j;
  NormStats stats;
  stats.mean = j.at("mean").get<std::vector<double>>();
  stats.std = j.at("std").get<std::vector<double>>();
  if (stats.mean.size() != kNumChannels || stats.std.size() != kNumChannels) {
    throw std::runtime_error("norm stats have wrong channel count");
  }
  return stats;
}

// ---- train ----

inline ModelConfig model_from_preset(const std::string& preset, int vocab,
                                     int max_text_len) {
  ModelConfig cfg = preset == "tiny" ? ModelConfig::tiny(vocab)
                                     : ModelConfig::family(preset, vocab);
  cfg.max_text_len = max_text_len;
  return cfg;
}

// Caption texts plus zero-shot prompt words for the configured classes, so
// evaluation prompts never hit [UNK].
inline Vocabulary build_run_vocabulary(
    const std::vector<CaptionRecord>& corpus,
    const std::vector<std::string>& classes) {
  std::vector<std::string> texts;
  for (const auto& r : corpus) texts.push_back(r.text);
  for (const auto& label : classes) {
    for (const auto& prompt : make_prompt_set(label).prompts) {
      texts.push_back(prompt);
    }
  }
  return Vocabulary::build(texts);
}

inline void cmd_train(const RunConfig& cfg, bool resume,
                      std::ostream& out = std::cout) {
  const RunPaths p = RunPaths::for_run(cfg);
  ensure_run_layout(p);
  auto [days, logs] = read_dataset(p.dataset_base("train").string());
  auto corpus =
      read_caption_corpus(p.caption_corpus("train", cfg.variant()).string());
  if (corpus.size() != days.size()) {
    throw std::runtime_error("caption corpus does not match the dataset");
  }
  std::map<std::uint64_t, const CaptionRecord*> by_day;
  for (const auto& r : corpus) by_day[r.day_id] = &r;

  const NormStats stats = compute_norm_stats(days);
  std::vector<SensorDay> normalized;
  normalized.reserve(days.size());
  for (const auto& d : days) normalized.push_back(normalize(d, stats));

  const Vocabulary vocab = build_run_vocabulary(corpus, cfg.classes);
  const ModelConfig model_cfg =
      model_from_preset(cfg.model_preset, vocab.size(), cfg.max_text_len);
  model_cfg.validate();

  std::vector<TrainPair> pairs;
  for (const auto& d : normalized) {
    auto it = by_day.find(d.day_id);
    if (it == by_day.end()) {
      throw std::runtime_error("no caption for day " +
                               std::to_string(d.day_id));
    }
    pairs.push_back({&d, it->second->text});
  }

  ParamStore params;
  std::optional<AdamState> opt;
  int start_step = 0;
  if (resume) {
    auto [saved_params, saved_opt, steps_done] =
        load_train_state(p.train_state().string());
    params = std::move(saved_params);
    opt = std::move(saved_opt);
    start_step = steps_done;
    out << "resuming from step " << start_step << "\n";
  } else {
    params = init_parameters(model_cfg, cfg.seed);
  }

  std::ofstream csv(p.train_log(),
                    resume ? std::ios::app : std::ios::trunc);
  if (!csv) throw std::runtime_error("cannot write train log");
  auto result = train(model_cfg, std::move(params), pairs, vocab, cfg.train,
                      &csv, {}, std::move(opt), start_step);
  if (result.diverged) {
    throw std::runtime_error("training diverged at step " +
                             std::to_string(result.steps_done));
  }
  save_checkpoint(model_cfg, result.params, p.checkpoint().string());
  save_train_state(result.params, result.opt, result.steps_done,
                   p.train_state().string());
  vocab.save(p.vocab().string());
  save_norm_stats(stats, p.norm().string());
  archive_config(cfg, p);
  out << "trained " << result.steps_done << " steps";
  if (!result.log.empty()) {
    out << ", final loss " << result.log.back().loss_total;
  }
  out << "; checkpoint at " << p.checkpoint().string() << "\n";
}

// ---- evaluation commands ----

struct LoadedRun {
  ModelConfig model_cfg;
  ParamStore params;
  Vocabulary vocab;
  NormStats stats;
};

inline LoadedRun load_run(const RunPaths& p) {
  LoadedRun run;
  auto [model_cfg, params] = load_checkpoint(p.checkpoint().string());
  run.model_cfg = model_cfg;
  run.params = std::move(params);
  run.vocab = Vocabulary::load(p.vocab().string());
  if (run.vocab.size() != run.model_cfg.vocab_size) {
    throw std::runtime_error("vocabulary size does not match the checkpoint");
  }
  run.stats = load_norm_stats(p.norm().string());
  return run;
}

inline void write_report(const EvalReport& report, const RunPaths& p,
                         std::ostream& out) {
  const fs::path json_path = p.reports() / (report.task + ".json");
  const fs::path text_path = p.reports() / (report.task + ".txt");
  std::ofstream js(json_path, std::ios::binary);
  if (!js) throw std::runtime_error("cannot write " + json_path.string());
  js << report.to_json().dump(2) << "\n";
  std::ofstream ts(text_path, std::ios::binary);
  ts << report.to_text();
  out << report.to_text();
  out << "report written to " << json_path.string() << "\n";
}

inline EvalReport eval_zeroshot(const RunConfig& cfg, const RunPaths& p,
                                LoadedRun& run) {
  auto [days, logs] = read_dataset(p.dataset_base("eval").string());
  std::map<std::string, Eigen::RowVectorXd> class_embs;
  for (const auto& label : cfg.classes) {
    class_embs[label] = class_embedding(run.model_cfg, run.params, run.vocab,
                                        make_prompt_set(label));
  }
  std::map<std::string, int> class_index;
  for (std::size_t i = 0; i < cfg.classes.size(); ++i) {
    class_index[cfg.classes[i]] = static_cast<int>(i);
  }
  EvalReport report;
  report.task = "zeroshot";
  Mat scores(0, static_cast<Eigen::Index>(cfg.classes.size()));
  std::vector<int> labels;
  std::vector<int> preds;
  for (std::size_t i = 0; i < days.size(); ++i) {
    const std::string label = label_of(logs[i]);
    auto it = class_index.find(label);
    if (it == class_index.end()) {
      report.notes.push_back("day " + std::to_string(days[i].day_id) +
                             " has unlisted class " + label + ", skipped");
      continue;
    }
    const auto emb =
        embed_sensor(run.model_cfg, run.params, normalize(days[i], run.stats));
    auto [pred, score_map] = zero_shot_classify(emb, class_embs);
    scores.conservativeResize(scores.rows() + 1, scores.cols());
    for (const auto& [name, idx] : class_index) {
      scores(scores.rows() - 1, idx) = score_map.at(name);
    }
    labels.push_back(it->second);
    preds.push_back(class_index.at(pred));
  }
  report.metrics["auroc_macro"] =
      auroc_macro_ovr(scores, labels, &report.notes);
  report.metrics["macro_f1"] = macro_f1(preds, labels);
  report.metrics["balanced_accuracy"] = balanced_accuracy(preds, labels);
  report.metrics["n_days"] = static_cast<double>(labels.size());
  report.config_digest = config_digest(cfg);
  return report;
}

inline EvalReport eval_retrieval(const RunConfig& cfg, const RunPaths& p,
                                 LoadedRun& run) {
  auto [days, logs] = read_dataset(p.dataset_base("eval").string());
  auto corpus =
      read_caption_corpus(p.caption_corpus("eval", cfg.variant()).string());
  std::map<std::uint64_t, const CaptionRecord*> by_day;
  for (const auto& r : corpus) by_day[r.day_id] = &r;
  const Eigen::Index n = static_cast<Eigen::Index>(days.size());
  Mat sensor_embs(n, run.model_cfg.embed_dim);
  Mat text_embs(n, run.model_cfg.embed_dim);
  for (Eigen::Index i = 0; i < n; ++i) {
    auto it = by_day.find(days[i].day_id);
    if (it == by_day.end()) {
      throw std::runtime_error("no caption for eval day " +
                               std::to_string(days[i].day_id));
    }
    sensor_embs.row(i) =
        embed_sensor(run.model_cfg, run.params, normalize(days[i], run.stats));
    text_embs.row(i) =
        embed_text(run.model_cfg, run.params, run.vocab, it->second->text);
  }
  EvalReport report;
  report.task = "retrieval";
  for (int k : cfg.recall_ks) {
    if (k > n) {
      report.notes.push_back("recall@" + std::to_string(k) +
                             " skipped: K exceeds eval set size");
      continue;
    }
    auto [s2t, t2s] = retrieval_recall(sensor_embs, text_embs, k);
    report.metrics["recall@" + std::to_string(k) + "_s2t"] = s2t;
    report.metrics["recall@" + std::to_string(k) + "_t2s"] = t2s;
  }
  report.metrics["n_pairs"] = static_cast<double>(n);
  report.config_digest = config_digest(cfg);
  return report;
}

inline EvalReport eval_fewshot(const RunConfig& cfg, const RunPaths& p,
                               LoadedRun& run) {
  std::map<std::string, int> class_index;
  for (std::size_t i = 0; i < cfg.classes.size(); ++i) {
    class_index[cfg.classes[i]] = static_cast<int>(i);
  }
  auto embed_split = [&](const std::string& split, Mat* x,
                         std::vector<int>* y) {
    auto [days, logs] = read_dataset(p.dataset_base(split).string());
    std::vector<Eigen::RowVectorXd> rows;
    for (std::size_t i = 0; i < days.size(); ++i) {
      auto it = class_index.find(label_of(logs[i]));
      if (it == class_index.end()) continue;
      rows.push_back(embed_sensor(run.model_cfg, run.params,
                                  normalize(days[i], run.stats)));
      y->push_back(it->second);
    }
    x->resize(static_cast<Eigen::Index>(rows.size()), run.model_cfg.embed_dim);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      x->row(static_cast<Eigen::Index>(i)) = rows[i];
    }
  };
  Mat train_x, test_x;
  std::vector<int> train_y, test_y;
  embed_split("train", &train_x, &train_y);
  embed_split("eval", &test_x, &test_y);
  EvalReport report;
  report.task = "fewshot";
  auto curve = few_shot_eval(train_x, train_y, test_x, test_y,
                             static_cast<int>(cfg.classes.size()),
                             cfg.fewshot_shots, cfg.fewshot_seeds, cfg.seed,
                             &report.notes);
  for (const auto& point : curve) {
    const std::string key = "auroc@" + std::to_string(point.n_per_class);
    report.metrics[key + "_mean"] = point.mean_auroc;
    report.metrics[key + "_std"] = point.std_auroc;
  }
  report.config_digest = config_digest(cfg);
  return report;
}

inline EvalReport eval_caption(const RunConfig& cfg, const RunPaths& p,
                               LoadedRun& run) {
  auto [days, logs] = read_dataset(p.dataset_base("eval").string());
  auto corpus =
      read_caption_corpus(p.caption_corpus("eval", cfg.variant()).string());
  std::map<std::uint64_t, const CaptionRecord*> by_day;
  for (const auto& r : corpus) by_day[r.day_id] = &r;
  double f1_sum = 0.0, rouge_sum = 0.0, exact = 0.0;
  std::size_t n = 0;
  for (const auto& day : days) {
    auto it = by_day.find(day.day_id);
    if (it == by_day.end()) continue;
    const std::string hyp =
        generate_caption(run.model_cfg, run.params, normalize(day, run.stats),
                         run.vocab, cfg.max_caption_len);
    const auto metrics =
        caption_metrics(split_words(hyp), split_words(it->second->text));
    f1_sum += metrics.token_f1;
    rouge_sum += metrics.rouge_l;
    exact += normalize_text(hyp) == normalize_text(it->second->text);
    ++n;
  }
  if (n == 0) throw std::runtime_error("no eval days with captions");
  EvalReport report;
  report.task = "caption";
  report.metrics["token_f1"] = f1_sum / static_cast<double>(n);
  report.metrics["rouge_l"] = rouge_sum / static_cast<double>(n);
  report.metrics["exact_match"] = exact / static_cast<double>(n);
  report.metrics["n_days"] = static_cast<double>(n);
  report.config_digest = config_digest(cfg);
  return report;
}

inline void cmd_eval(const RunConfig& cfg, const std::string& task,
                     std::ostream& out = std::cout) {
  const RunPaths p = RunPaths::for_run(cfg);
  ensure_run_layout(p);
  LoadedRun run = load_run(p);
  EvalReport report;
  if (task == "zeroshot") report = eval_zeroshot(cfg, p, run);
  else if (task == "retrieval") report = eval_retrieval(cfg, p, run);
  else if (task == "fewshot") report = eval_fewshot(cfg, p, run);
  else if (task == "caption") report = eval_caption(cfg, p, run);
  else throw std::invalid_argument("unknown eval task: " + task);
  write_report(report, p, out);
}

// ---- caption generation command ----

inline void cmd_caption(const RunConfig& cfg, const std::string& split,
                        std::ostream& out = std::cout) {
  const RunPaths p = RunPaths::for_run(cfg);
  ensure_run_layout(p);
  LoadedRun run = load_run(p);
  auto [days, logs] = read_dataset(p.dataset_base(split).string());
  const fs::path path = p.reports() / ("generated_" + split + ".jsonl");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  for (const auto& day : days) {
    const std::string text =
        generate_caption(run.model_cfg, run.params, normalize(day, run.stats),
                         run.vocab, cfg.max_caption_len);
    nlohmann::json j{{"person_id", day.person_id},
                     {"day_id", day.day_id},
                     {"text", text}};
    os << j.dump() << "\n";
  }
  out << "wrote " << days.size() << " generated captions to " << path.string()
      << "\n";
}

// ---- ablation grid ----

struct AblationCell {
  std::string name;
  bool ok = false;
  std::map<std::string, double> metrics;
  std::string error;
};

// Runs a reduced end-to-end cycle (captions, training, retrieval R@1 and
// zero-shot AUROC) for each caption variant with the configured loss, then
// for each loss preset with the configured variant. Per-cell failures are
// captured, not fatal.
inline std::vector<AblationCell> run_ablation_grid(
    const RunConfig& base_cfg, std::ostream& out = std::cout) {
  const RunPaths base_paths = RunPaths::for_run(base_cfg);
  auto [all_days, all_logs] =
      read_dataset(base_paths.dataset_base("train").string());
  auto [eval_days, eval_logs] =
      read_dataset(base_paths.dataset_base("eval").string());

  // First ablate_days_per_class train days of each configured class.
  std::map<std::string, int> taken;
  GeneratedSplit train_split;
  for (std::size_t i = 0; i < all_days.size(); ++i) {
    const std::string label = label_of(all_logs[i]);
    if (taken[label] >= base_cfg.ablate_days_per_class) continue;
    ++taken[label];
    train_split.days.push_back(all_days[i]);
    train_split.logs.push_back(all_logs[i]);
  }
  if (train_split.days.empty()) throw std::runtime_error("ablation: no train days");
  GeneratedSplit eval_split{std::move(eval_days), std::move(eval_logs)};

  struct Cell {
    std::string name;
    CaptionVariant variant;
    LossConfig loss;
  };
  std::vector<Cell> cells;
  for (const auto& v : all_caption_variants()) {
    cells.push_back({"captions:" + v.name(), v, base_cfg.train.loss});
  }
  const std::vector<std::pair<std::string, LossConfig>> losses = {
      {"contrastive-only", LossConfig::clip()},
      {"captioning-only", LossConfig::cap()},
      {"combined", LossConfig::coca()},
  };
  for (const auto& [name, loss] : losses) {
    cells.push_back({"loss:" + name, base_cfg.variant(), loss});
  }

  std::vector<AblationCell> results;
  for (const auto& cell : cells) {
    AblationCell r;
    r.name = cell.name;
    out << "ablation cell " << cell.name << "..." << std::flush;
    try {
      auto corpus = caption_split(train_split, cell.variant, base_cfg.seed,
                                  base_cfg.caption_budget);
      auto eval_corpus = caption_split(eval_split, cell.variant, base_cfg.seed,
                                       base_cfg.caption_budget);
      const NormStats stats = compute_norm_stats(train_split.days);
      std::vector<SensorDay> normalized;
      for (const auto& d : train_split.days) normalized.push_back(normalize(d, stats));
      const Vocabulary vocab =
          build_run_vocabulary(corpus, base_cfg.classes);
      ModelConfig model_cfg = model_from_preset(
          base_cfg.model_preset, vocab.size(), base_cfg.max_text_len);
      std::vector<TrainPair> pairs;
      for (std::size_t i = 0; i < normalized.size(); ++i) {
        pairs.push_back({&normalized[i], corpus[i].text});
      }
      TrainConfig tc = base_cfg.train;
      tc.steps = base_cfg.ablate_steps;
      tc.loss = cell.loss;
      auto result = train(model_cfg, init_parameters(model_cfg, base_cfg.seed),
                          pairs, vocab, tc);
      if (result.diverged) throw std::runtime_error("training diverged");
      r.metrics["final_loss"] =
          result.log.empty() ? 0.0 : result.log.back().loss_total;
      if (cell.loss.lambda_con > 0.0) {
        const Eigen::Index n = static_cast<Eigen::Index>(eval_split.days.size());
        Mat se(n, model_cfg.embed_dim), te(n, model_cfg.embed_dim);
        for (Eigen::Index i = 0; i < n; ++i) {
          se.row(i) = embed_sensor(model_cfg, result.params,
                                   normalize(eval_split.days[i], stats));
          te.row(i) = embed_text(model_cfg, result.params, vocab,
                                 eval_corpus[i].text);
        }
        auto [s2t, t2s] = retrieval_recall(se, te, 1);
        r.metrics["recall@1_s2t"] = s2t;
        r.metrics["recall@1_t2s"] = t2s;
        std::map<std::string, Eigen::RowVectorXd> class_embs;
        for (const auto& label : base_cfg.classes) {
          class_embs[label] = class_embedding(model_cfg, result.params, vocab,
                                              make_prompt_set(label));
        }
        std::map<std::string, int> class_index;
        for (std::size_t i = 0; i < base_cfg.classes.size(); ++i) {
          class_index[base_cfg.classes[i]] = static_cast<int>(i);
        }
        Mat scores(0, static_cast<Eigen::Index>(base_cfg.classes.size()));
        std::vector<int> labels;
        for (std::size_t i = 0; i < eval_split.days.size(); ++i) {
          auto it = class_index.find(label_of(eval_split.logs[i]));
          if (it == class_index.end()) continue;
          auto [pred, score_map] = zero_shot_classify(
              embed_sensor(model_cfg, result.params,
                           normalize(eval_split.days[i], stats)),
              class_embs);
          scores.conservativeResize(scores.rows() + 1, scores.cols());
          for (const auto& [name, idx] : class_index) {
            scores(scores.rows() - 1, idx) = score_map.at(name);
          }
          labels.push_back(it->second);
        }
        r.metrics["zeroshot_auroc"] = auroc_macro_ovr(scores, labels);
      }
      r.ok = true;
      out << " done\n";
    } catch (const std::exception& e) {
      r.error = e.what();
      out << " failed: " << r.error << "\n";
    }
    results.push_back(std::move(r));
  }
  return results;
}

inline void cmd_ablate(const RunConfig& cfg, std::ostream& out = std::cout) {
  const RunPaths p = RunPaths::for_run(cfg);
  ensure_run_layout(p);
  auto cells = run_ablation_grid(cfg, out);
  nlohmann::json j = nlohmann::json::array();
  for (const auto& c : cells) {
    nlohmann::json cell{{"name", c.name}, {"ok", c.ok}};
    if (c.ok) cell["metrics"] = c.metrics;
    else cell["error"] = c.error;
    j.push_back(cell);
  }
  nlohmann::json doc{{"cells", j}, {"config_digest", config_digest(cfg)}};
  const fs::path json_path = p.reports() / "ablation.json";
  std::ofstream os(json_path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + json_path.string());
  os << doc.dump(2) << "\n";
  std::ostringstream text;
  text << "== ablation ==\n";
  for (const auto& c : cells) {
    text << "  " << c.name;
    for (std::size_t i = c.name.size(); i < 28; ++i) text << ' ';
    if (c.ok) {
      bool first = true;
      for (const auto& [k, v] : c.metrics) {
        if (!first) text << ", ";
        char buf[48];
        std::snprintf(buf, sizeof(buf), "%s=%.4f", k.c_str(), v);
        text << buf;
        first = false;
      }
      text << "\n";
    } else {
      text << "FAILED: " << c.error << "\n";
    }
  }
  std::ofstream ts(p.reports() / "ablation.txt", std::ios::binary);
  ts << text.str();
  out << text.str();
  out << "report written to " << json_path.string() << "\n";
}

}  // namespace senselang
