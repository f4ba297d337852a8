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

#include <vector>

#include "senselang/autodiff.hpp"
#include "senselang/text.hpp"

namespace senselang {

// IncludePositive is standard InfoNCE (denominator over all j);
// ExcludePositive drops j == i from the denominator, which permits negative
// loss values and needs N >= 2.
enum class DenominatorMode { IncludePositive, ExcludePositive };

struct LossConfig {
  double lambda_con = 1.0;
  double lambda_cap = 1.0;
  double tau = 0.01;
  DenominatorMode denominator_mode = DenominatorMode::IncludePositive;

  void validate() const {
    if (lambda_con < 0.0 || lambda_cap < 0.0) {
      throw std::invalid_argument("loss weights must be nonnegative");
    }
    if (lambda_con + lambda_cap <= 0.0) {
      throw std::invalid_argument("at least one loss weight must be positive");
    }
    if (tau <= 0.0) throw std::invalid_argument("tau must be positive");
  }

  static LossConfig clip() { return {1.0, 0.0, 0.01, DenominatorMode::IncludePositive}; }
  static LossConfig cap() { return {0.0, 1.0, 0.01, DenominatorMode::IncludePositive}; }
  static LossConfig coca() { return {1.0, 1.0, 0.01, DenominatorMode::IncludePositive}; }
};

// Symmetric cross-modal InfoNCE over unit-norm embeddings (N x d each):
// mean over the batch of the sensor-to-text and text-to-sensor terms.
inline ad::Tensor contrastive_loss_graph(const ad::Tensor& sensor_embs,
                                         const ad::Tensor& text_embs,
                                         double tau, DenominatorMode mode) {
  const Eigen::Index n = sensor_embs->val.rows();
  if (n < 1 || text_embs->val.rows() != n) {
    throw std::invalid_argument("contrastive loss: batch shape mismatch");
  }
  if (mode == DenominatorMode::ExcludePositive && n < 2) {
    throw std::invalid_argument(
        "contrastive loss: ExcludePositive needs N >= 2");
  }
  const bool excl = mode == DenominatorMode::ExcludePositive;
  auto sim = ad::scale(ad::matmul_nt(sensor_embs, text_embs), 1.0 / tau);
  auto sim_t = ad::transpose(sim);
  auto s2t = ad::sub(ad::trace_sum(sim),
                     ad::sum_all(ad::logsumexp_rows(sim, excl)));
  auto t2s = ad::sub(ad::trace_sum(sim_t),
                     ad::sum_all(ad::logsumexp_rows(sim_t, excl)));
  return ad::scale(ad::add(s2t, t2s), -1.0 / static_cast<double>(n));
}

// Mean over non-PAD target positions of -log softmax(logits)[target].
inline ad::Tensor captioning_loss_graph(const ad::Tensor& logits,
                                        const std::vector<int>& targets,
                                        const std::vector<std::uint8_t>& pad_mask) {
  const Eigen::Index t_len = logits->val.rows();
  if (static_cast<Eigen::Index>(targets.size()) != t_len ||
      pad_mask.size() != targets.size()) {
    throw std::invalid_argument("captioning loss: shape mismatch");
  }
  std::size_t live = 0;
  for (auto m : pad_mask) live += m != 0;
  if (live == 0) {
    throw std::invalid_argument("captioning loss: all positions masked");
  }
  ad::Mat w = ad::Mat::Zero(t_len, logits->val.cols());
  for (Eigen::Index t = 0; t < t_len; ++t) {
    if (!pad_mask[t]) continue;
    if (targets[t] < 0 || targets[t] >= logits->val.cols()) {
      throw std::out_of_range("captioning loss: target id out of range");
    }
    w(t, targets[t]) = -1.0 / static_cast<double>(live);
  }
  return ad::weighted_sum(ad::log_softmax_rows(logits), std::move(w));
}

// ---- scalar conveniences for evaluation and tests ----

inline double contrastive_loss(const ad::Mat& sensor_embs,
                               const ad::Mat& text_embs,
                               const LossConfig& cfg) {
  auto l = contrastive_loss_graph(ad::constant(sensor_embs),
                                  ad::constant(text_embs), cfg.tau,
                                  cfg.denominator_mode);
  return l->val(0, 0);
}

inline double captioning_loss(const ad::Mat& logits,
                              const std::vector<int>& targets,
                              const std::vector<std::uint8_t>& pad_mask) {
  auto l = captioning_loss_graph(ad::constant(logits), targets, pad_mask);
  return l->val(0, 0);
}

}  // namespace senselang
