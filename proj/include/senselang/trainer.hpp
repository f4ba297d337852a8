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

#include <functional>
#include <numeric>
#include <optional>
#include <ostream>
#include <tuple>

#include "senselang/model.hpp"
#include "senselang/objectives.hpp"

namespace senselang {

enum class LrSchedule {
  // Literal published schedule: cosine-shaped warmup ramp, linear decay.
  CosineWarmupLinearDecay,
  // Conventional alternative behind a config switch.
  LinearWarmupCosineDecay,
};

struct TrainConfig {
  int steps = 2000;
  int batch_size = 16;
  double base_lr = 1e-3;
  double warmup_fraction = 0.1;
  double beta1 = 0.9;
  double beta2 = 0.95;
  double eps = 1e-8;
  double clip_norm = 1.0;
  std::uint64_t seed = 0;
  LossConfig loss;
  LrSchedule schedule = LrSchedule::CosineWarmupLinearDecay;

  void validate() const {
    if (steps < 0) throw std::invalid_argument("steps must be >= 0");
    if (batch_size < 2) throw std::invalid_argument("batch_size must be >= 2");
    if (warmup_fraction <= 0.0 || warmup_fraction >= 1.0) {
      throw std::invalid_argument("warmup_fraction must be in (0,1)");
    }
    loss.validate();
  }
};

// Warmup ramp from 0 to base_lr over the first warmup_fraction of training,
// then decay to 0 at the final step.
inline double lr_at(int step, const TrainConfig& cfg) {
  if (cfg.steps == 0) return 0.0;
  if (step < 0 || step > cfg.steps) {
    throw std::invalid_argument("lr_at: step out of range");
  }
  constexpr double kPi = 3.14159265358979323846;
  const double warmup = cfg.warmup_fraction * cfg.steps;
  const double s = static_cast<double>(step);
  if (cfg.schedule == LrSchedule::CosineWarmupLinearDecay) {
    if (s <= warmup) {
      return cfg.base_lr * 0.5 * (1.0 - std::cos(kPi * s / warmup));
    }
    return cfg.base_lr * (cfg.steps - s) / (cfg.steps - warmup);
  }
  if (s <= warmup) return cfg.base_lr * s / warmup;
  return cfg.base_lr * 0.5 *
         (1.0 + std::cos(kPi * (s - warmup) / (cfg.steps - warmup)));
}

struct AdamState {
  std::uint64_t step = 0;
  std::map<std::string, ad::Mat> m;
  std::map<std::string, ad::Mat> v;

  static AdamState init(const ParamStore& params) {
    AdamState s;
    for (const auto& [name, t] : params) {
      s.m[name] = ad::Mat::Zero(t.rows(), t.cols());
      s.v[name] = ad::Mat::Zero(t.rows(), t.cols());
    }
    return s;
  }
};

// Standard Adam with bias correction. Throws on non-finite gradients without
// touching the state.
inline void adam_step(AdamState& state, ParamStore& params,
                      const Gradients& grads, double lr,
                      const TrainConfig& cfg) {
  for (const auto& [name, g] : grads) {
    auto it = params.find(name);
    if (it == params.end() || it->second.rows() != g.rows() ||
        it->second.cols() != g.cols()) {
      throw std::invalid_argument("adam_step: gradient shape mismatch: " + name);
    }
    if (!g.allFinite()) {
      throw std::runtime_error("adam_step: non-finite gradient in " + name);
    }
  }
  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(cfg.beta1, t);
  const double bc2 = 1.0 - std::pow(cfg.beta2, t);
  for (auto& [name, param] : params) {
    const ad::Mat& g = grads.at(name);
    ad::Mat& m = state.m.at(name);
    ad::Mat& v = state.v.at(name);
    m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
    v = cfg.beta2 * v + (1.0 - cfg.beta2) * g.cwiseProduct(g);
    param.array() -=
        lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + cfg.eps);
  }
}

inline double global_grad_norm(const Gradients& grads) {
  double sq = 0.0;
  for (const auto& [name, g] : grads) sq += g.squaredNorm();
  return std::sqrt(sq);
}

inline void clip_gradients(Gradients& grads, double max_norm) {
  if (max_norm <= 0.0) return;
  const double norm = global_grad_norm(grads);
  if (norm > max_norm) {
    const double scale = max_norm / norm;
    for (auto& [name, g] : grads) g *= scale;
  }
}

// One aligned sensor-text training pair (day already normalized).
struct TrainPair {
  const SensorDay* day = nullptr;
  std::string text;
};

struct StepLog {
  int step = 0;
  double lr = 0.0;
  double loss_total = 0.0;
  double loss_con = 0.0;
  double loss_cap = 0.0;
};

struct TrainResult {
  ParamStore params;
  AdamState opt;
  int steps_done = 0;
  bool diverged = false;
  std::vector<StepLog> log;
};

// Invoked every `every` steps; returning true stops training early.
struct StopCheck {
  int every = 0;
  std::function<bool(int step, ParamStore& params)> fn;
};

// The batch served at `step` is a pure function of (seed, step): epoch
// orders are drawn from per-epoch seeded rngs, so resuming at step k
// continues bit-identically.
inline std::vector<std::size_t> batch_indices(std::size_t n_pairs,
                                              const TrainConfig& cfg,
                                              int step) {
  const std::size_t bs =
      std::min<std::size_t>(static_cast<std::size_t>(cfg.batch_size), n_pairs);
  const std::size_t batches_per_epoch = std::max<std::size_t>(n_pairs / bs, 1);
  const std::size_t epoch = static_cast<std::size_t>(step) / batches_per_epoch;
  const std::size_t slot = static_cast<std::size_t>(step) % batches_per_epoch;
  std::vector<std::size_t> order(n_pairs);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(mix_seed(cfg.seed, 0xba7c0000ULL + epoch));
  rng.shuffle(order);
  std::vector<std::size_t> batch(order.begin() + slot * bs,
                                 order.begin() + slot * bs + bs);
  return batch;
}

// Seeded shuffle -> batch -> forward -> combined loss -> backward -> clip ->
// Adam, with the warmup/decay schedule. Deterministic under (seed, config).
inline TrainResult train(const ModelConfig& model_cfg, ParamStore params,
                         const std::vector<TrainPair>& pairs,
                         const Vocabulary& vocab, const TrainConfig& cfg,
                         std::ostream* csv_log = nullptr,
                         const StopCheck& stop = {},
                         std::optional<AdamState> resume_opt = std::nullopt,
                         int start_step = 0) {
  cfg.validate();
  model_cfg.validate();
  if (pairs.empty()) throw std::invalid_argument("train: no pairs");
  const double lcon = cfg.loss.lambda_con, lcap = cfg.loss.lambda_cap;
  TrainResult result;
  result.opt = resume_opt ? std::move(*resume_opt) : AdamState::init(params);
  result.params = std::move(params);
  if (csv_log != nullptr && start_step == 0) {
    *csv_log << "step,lr,loss_total,loss_con,loss_cap\n";
  }
  for (int step = start_step; step < cfg.steps; ++step) {
    const auto batch = batch_indices(pairs.size(), cfg, step);
    Workspace ws(model_cfg, result.params);
    std::vector<ad::Tensor> sensor_embs, text_embs;
    std::vector<ad::Tensor> logit_blocks;
    std::vector<int> targets;
    std::vector<std::uint8_t> target_mask;
    for (std::size_t idx : batch) {
      const auto& pair = pairs[idx];
      auto enc = ws.encode_sensor(*pair.day, /*with_projection=*/lcon > 0.0);
      if (lcon > 0.0) {
        sensor_embs.push_back(enc.embedding);
        text_embs.push_back(ws.encode_text(
            vocab.frame_for_decoder(pair.text, model_cfg.max_text_len)));
      }
      if (lcap > 0.0) {
        auto framed =
            vocab.frame_for_decoder(pair.text, model_cfg.max_text_len);
        // Trim padding; feed [START..] and predict the shifted sequence.
        int len = static_cast<int>(framed.size());
        while (len > 0 && framed[len - 1] == kPadId) --len;
        std::vector<int> input(framed.begin(), framed.begin() + len - 1);
        logit_blocks.push_back(ws.decode_multimodal(enc.tokens, input));
        for (int t = 1; t < len; ++t) {
          targets.push_back(framed[t]);
          target_mask.push_back(1);
        }
      }
    }
    ad::Tensor loss_con, loss_cap, total;
    double con_val = 0.0, cap_val = 0.0;
    if (lcon > 0.0) {
      loss_con = contrastive_loss_graph(ad::concat_rows(sensor_embs),
                                        ad::concat_rows(text_embs),
                                        cfg.loss.tau,
                                        cfg.loss.denominator_mode);
      con_val = loss_con->val(0, 0);
      total = ad::scale(loss_con, lcon);
    }
    if (lcap > 0.0) {
      loss_cap = captioning_loss_graph(ad::concat_rows(logit_blocks), targets,
                                       target_mask);
      cap_val = loss_cap->val(0, 0);
      auto weighted = ad::scale(loss_cap, lcap);
      total = total ? ad::add(total, weighted) : weighted;
    }
    const double total_val = total->val(0, 0);
    if (!std::isfinite(total_val)) {
      result.diverged = true;
      result.steps_done = step;
      return result;
    }
    ad::backward(total);
    auto grads = ws.gradients();
    clip_gradients(grads, cfg.clip_norm);
    const double lr = lr_at(step, cfg);
    adam_step(result.opt, result.params, grads, lr, cfg);
    StepLog entry{step, lr, total_val, con_val, cap_val};
    result.log.push_back(entry);
    if (csv_log != nullptr) {
      *csv_log << entry.step << "," << entry.lr << "," << entry.loss_total
               << "," << entry.loss_con << "," << entry.loss_cap << "\n";
    }
    result.steps_done = step + 1;
    if (stop.fn && stop.every > 0 && (step + 1) % stop.every == 0 &&
        stop.fn(step + 1, result.params)) {
      break;
    }
  }
  return result;
}

// ---- train-state sidecar ("SLMT", f64 payloads for exact resume) ----

inline constexpr char kTrainStateMagic[4] = {'S', 'L', 'M', 'T'};

inline void save_train_state(const ParamStore& params, const AdamState& opt,
                             int steps_done, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for write: " + path);
  os.write(kTrainStateMagic, 4);
  write_le<std::uint64_t>(os, opt.step);
  write_le<std::uint32_t>(os, static_cast<std::uint32_t>(steps_done));
  auto dump = [&os](const std::map<std::string, ad::Mat>& tensors) {
    write_le<std::uint32_t>(os, static_cast<std::uint32_t>(tensors.size()));
    for (const auto& [name, m] : tensors) {
      write_string(os, name);
      write_le<std::uint32_t>(os, static_cast<std::uint32_t>(m.rows()));
      write_le<std::uint32_t>(os, static_cast<std::uint32_t>(m.cols()));
      for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
          write_le<double>(os, m(r, c));
        }
      }
    }
  };
  dump(params);
  dump(opt.m);
  dump(opt.v);
}

inline std::tuple<ParamStore, AdamState, int> load_train_state(
    const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open for read: " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kTrainStateMagic, 4) != 0) {
    throw std::runtime_error("bad magic in train state: " + path);
  }
  AdamState opt;
  opt.step = read_le<std::uint64_t>(is);
  const int steps_done = static_cast<int>(read_le<std::uint32_t>(is));
  auto slurp = [&is]() {
    std::map<std::string, ad::Mat> tensors;
    const auto count = read_le<std::uint32_t>(is);
    for (std::uint32_t i = 0; i < count; ++i) {
      const std::string name = read_string(is);
      const int rows = static_cast<int>(read_le<std::uint32_t>(is));
      const int cols = static_cast<int>(read_le<std::uint32_t>(is));
      ad::Mat m(rows, cols);
      for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) m(r, c) = read_le<double>(is);
      }
      tensors.emplace(name, std::move(m));
    }
    return tensors;
  };
  ParamStore params = slurp();
  opt.m = slurp();
  opt.v = slurp();
  return {std::move(params), std::move(opt), steps_done};
}

}  // namespace senselang
