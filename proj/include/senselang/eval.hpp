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

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "senselang/model.hpp"
#include "senselang/text.hpp"

namespace senselang {

using ad::Mat;

// ---- embedding extraction ----

inline Eigen::RowVectorXd embed_text(const ModelConfig& cfg,
                                     ParamStore& params,
                                     const Vocabulary& vocab,
                                     const std::string& text) {
  Workspace ws(cfg, params);
  auto emb = ws.encode_text(vocab.frame_for_decoder(text, cfg.max_text_len));
  return emb->val.row(0);
}

inline Eigen::RowVectorXd embed_sensor(const ModelConfig& cfg,
                                       ParamStore& params,
                                       const SensorDay& normalized_day) {
  Workspace ws(cfg, params);
  auto enc = ws.encode_sensor(normalized_day);
  return enc.embedding->val.row(0);
}

// Mean of the 30 unit-norm prompt embeddings, renormalized to unit length.
inline Eigen::RowVectorXd class_embedding(const ModelConfig& cfg,
                                          ParamStore& params,
                                          const Vocabulary& vocab,
                                          const PromptSet& prompts) {
  if (prompts.prompts.empty()) {
    throw std::invalid_argument("class_embedding: empty prompt set");
  }
  Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(cfg.embed_dim);
  for (const auto& p : prompts.prompts) {
    mean += embed_text(cfg, params, vocab, p);
  }
  mean /= static_cast<double>(prompts.prompts.size());
  const double norm = mean.norm();
  if (norm < 1e-8) {
    throw std::runtime_error(
        "class_embedding: prompt embeddings cancel to the zero vector");
  }
  return mean / norm;
}

// Argmax of cosine scores over classes; ties break to the
// lexicographically-first class name (std::map iteration order).
inline std::pair<std::string, std::map<std::string, double>>
zero_shot_classify(const Eigen::RowVectorXd& sensor_emb,
                   const std::map<std::string, Eigen::RowVectorXd>& classes) {
  if (classes.empty()) throw std::invalid_argument("no classes");
  std::map<std::string, double> scores;
  std::string best;
  double best_score = -2.0;
  for (const auto& [label, emb] : classes) {
    const double s = sensor_emb.dot(emb);
    scores[label] = s;
    if (s > best_score) {
      best_score = s;
      best = label;
    }
  }
  return {best, scores};
}

// ---- classification metrics ----

// One-vs-rest AUROC per class via the rank statistic (ties counted half),
// macro-averaged over classes present in the labels. `scores` is n x C.
inline double auroc_macro_ovr(const Mat& scores, const std::vector<int>& labels,
                              std::vector<std::string>* warnings = nullptr) {
  const Eigen::Index n = scores.rows();
  if (static_cast<Eigen::Index>(labels.size()) != n) {
    throw std::invalid_argument("auroc: labels/scores mismatch");
  }
  std::set<int> present(labels.begin(), labels.end());
  if (present.size() < 2) {
    throw std::invalid_argument("auroc: needs at least 2 classes present");
  }
  double total = 0.0;
  int used = 0;
  for (Eigen::Index c = 0; c < scores.cols(); ++c) {
    std::size_t n_pos = 0;
    for (int l : labels) n_pos += l == c;
    if (n_pos == 0) {
      if (warnings != nullptr) {
        warnings->push_back("auroc: class " + std::to_string(c) +
                            " absent from labels, excluded");
      }
      continue;
    }
    const std::size_t n_neg = static_cast<std::size_t>(n) - n_pos;
    if (n_neg == 0) continue;
    // Average ranks with tie correction.
    std::vector<Eigen::Index> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
      return scores(a, c) < scores(b, c);
    });
    std::vector<double> rank(n);
    Eigen::Index i = 0;
    while (i < n) {
      Eigen::Index j = i;
      while (j + 1 < n &&
             scores(order[j + 1], c) == scores(order[i], c)) {
        ++j;
      }
      const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
      for (Eigen::Index k = i; k <= j; ++k) rank[order[k]] = avg;
      i = j + 1;
    }
    double rank_sum_pos = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) {
      if (labels[k] == c) rank_sum_pos += rank[k];
    }
    const double auc =
        (rank_sum_pos -
         0.5 * static_cast<double>(n_pos) * static_cast<double>(n_pos + 1)) /
        (static_cast<double>(n_pos) * static_cast<double>(n_neg));
    total += auc;
    ++used;
  }
  return total / static_cast<double>(used);
}

// Mean per-class F1 over classes that are present or predicted.
inline double macro_f1(const std::vector<int>& preds,
                       const std::vector<int>& labels) {
  if (preds.empty() || preds.size() != labels.size()) {
    throw std::invalid_argument("macro_f1: bad input");
  }
  std::set<int> classes(labels.begin(), labels.end());
  classes.insert(preds.begin(), preds.end());
  double total = 0.0;
  for (int c : classes) {
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
      if (preds[i] == c && labels[i] == c) ++tp;
      else if (preds[i] == c) ++fp;
      else if (labels[i] == c) ++fn;
    }
    const double denom = 2.0 * tp + fp + fn;
    total += denom > 0.0 ? 2.0 * tp / denom : 0.0;
  }
  return total / static_cast<double>(classes.size());
}

// Mean per-class recall over classes present in the labels.
inline double balanced_accuracy(const std::vector<int>& preds,
                                const std::vector<int>& labels) {
  if (preds.empty() || preds.size() != labels.size()) {
    throw std::invalid_argument("balanced_accuracy: bad input");
  }
  std::set<int> classes(labels.begin(), labels.end());
  double total = 0.0;
  for (int c : classes) {
    std::size_t tp = 0, n_c = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == c) {
        ++n_c;
        tp += preds[i] == c;
      }
    }
    total += static_cast<double>(tp) / static_cast<double>(n_c);
  }
  return total / static_cast<double>(classes.size());
}

// ---- cross-modal retrieval ----

// R@K in both directions over paired unit-norm embeddings; the true partner
// of query i is index i. Equal similarities rank by ascending index.
inline std::pair<double, double> retrieval_recall(const Mat& sensor_embs,
                                                  const Mat& text_embs,
                                                  int k) {
  const Eigen::Index n = sensor_embs.rows();
  if (text_embs.rows() != n || n == 0) {
    throw std::invalid_argument("retrieval: embedding count mismatch");
  }
  if (k < 1 || k > n) {
    throw std::invalid_argument("retrieval: K out of range");
  }
  const Mat sim = sensor_embs * text_embs.transpose();
  auto recall_rows = [&](bool transpose) {
    std::size_t hits = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double true_score = sim(i, i);
      Eigen::Index ahead = 0;
      for (Eigen::Index j = 0; j < n; ++j) {
        const double s = transpose ? sim(j, i) : sim(i, j);
        if (s > true_score || (s == true_score && j < i)) ++ahead;
      }
      if (ahead < k) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(n);
  };
  return {recall_rows(false), recall_rows(true)};
}

// ---- linear probe ----

struct ProbeConfig {
  int iterations = 2000;
  double learning_rate = 1.0;
  double l2 = 1e-6;
  bool class_weighted = true;
};

// Multinomial logistic regression on frozen embeddings, full-batch gradient
// descent, per-class weights proportional to inverse class frequency.
class LinearProbe {
 public:
  static LinearProbe fit(const Mat& x, const std::vector<int>& y,
                         int n_classes, const ProbeConfig& cfg = {}) {
    const Eigen::Index n = x.rows(), d = x.cols();
    if (static_cast<Eigen::Index>(y.size()) != n || n == 0) {
      throw std::invalid_argument("linear_probe: bad input shapes");
    }
    std::set<int> present(y.begin(), y.end());
    if (present.size() < 2) {
      throw std::invalid_argument("linear_probe: single-class input");
    }
    std::vector<double> class_weight(n_classes, 1.0);
    if (cfg.class_weighted) {
      std::vector<std::size_t> counts(n_classes, 0);
      for (int l : y) ++counts[l];
      for (int c = 0; c < n_classes; ++c) {
        class_weight[c] =
            counts[c] > 0
                ? static_cast<double>(n) /
                      (static_cast<double>(n_classes) * counts[c])
                : 0.0;
      }
    }
    double weight_total = 0.0;
    for (int l : y) weight_total += class_weight[l];
    LinearProbe probe;
    probe.w_ = Mat::Zero(d, n_classes);
    probe.b_ = Eigen::RowVectorXd::Zero(n_classes);
    for (int it = 0; it < cfg.iterations; ++it) {
      Mat logits = (x * probe.w_).rowwise() + probe.b_;
      Mat p(n, n_classes);
      for (Eigen::Index i = 0; i < n; ++i) {
        const double mx = logits.row(i).maxCoeff();
        Eigen::RowVectorXd e = (logits.row(i).array() - mx).exp();
        p.row(i) = e / e.sum();
      }
      for (Eigen::Index i = 0; i < n; ++i) {
        p(i, y[i]) -= 1.0;
        p.row(i) *= class_weight[y[i]] / weight_total;
      }
      const Mat gw = x.transpose() * p + cfg.l2 * probe.w_;
      const Eigen::RowVectorXd gb = p.colwise().sum();
      probe.w_ -= cfg.learning_rate * gw;
      probe.b_ -= cfg.learning_rate * gb;
    }
    return probe;
  }

  Mat scores(const Mat& x) const { return (x * w_).rowwise() + b_; }

  std::vector<int> predict(const Mat& x) const {
    const Mat s = scores(x);
    std::vector<int> out(s.rows());
    for (Eigen::Index i = 0; i < s.rows(); ++i) {
      Eigen::Index best;
      s.row(i).maxCoeff(&best);
      out[i] = static_cast<int>(best);
    }
    return out;
  }

  const Mat& weights() const { return w_; }
  const Eigen::RowVectorXd& bias() const { return b_; }

 private:
  Mat w_;
  Eigen::RowVectorXd b_;
};

// ---- few-shot curve ----

struct FewShotPoint {
  int n_per_class = 0;
  double mean_auroc = 0.0;
  double std_auroc = 0.0;
  std::vector<double> per_seed;
};

inline std::vector<FewShotPoint> few_shot_eval(
    const Mat& train_x, const std::vector<int>& train_y, const Mat& test_x,
    const std::vector<int>& test_y, int n_classes,
    const std::vector<int>& shots = {5, 10, 20, 50}, int n_seeds = 5,
    std::uint64_t seed = 0, std::vector<std::string>* warnings = nullptr) {
  std::vector<std::vector<Eigen::Index>> by_class(n_classes);
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(train_y.size()); ++i) {
    by_class[train_y[i]].push_back(i);
  }
  std::vector<FewShotPoint> curve;
  for (int n : shots) {
    FewShotPoint point;
    point.n_per_class = n;
    for (int s = 0; s < n_seeds; ++s) {
      Rng rng(mix_seed(seed, static_cast<std::uint64_t>(n) * 131 + s));
      std::vector<Eigen::Index> chosen;
      std::vector<int> labels;
      for (int c = 0; c < n_classes; ++c) {
        if (static_cast<int>(by_class[c].size()) < n) {
          if (warnings != nullptr && s == 0) {
            warnings->push_back("few_shot: class " + std::to_string(c) +
                                " has fewer than " + std::to_string(n) +
                                " samples, skipped");
          }
          continue;
        }
        auto pool = by_class[c];
        rng.shuffle(pool);
        for (int i = 0; i < n; ++i) {
          chosen.push_back(pool[i]);
          labels.push_back(c);
        }
      }
      // A probe needs at least two populated classes at this shot count.
      if (std::set<int>(labels.begin(), labels.end()).size() < 2) continue;
      Mat x(chosen.size(), train_x.cols());
      for (std::size_t i = 0; i < chosen.size(); ++i) {
        x.row(static_cast<Eigen::Index>(i)) = train_x.row(chosen[i]);
      }
      auto probe = LinearProbe::fit(x, labels, n_classes);
      point.per_seed.push_back(
          auroc_macro_ovr(probe.scores(test_x), test_y));
    }
    if (!point.per_seed.empty()) {
      const double mean =
          std::accumulate(point.per_seed.begin(), point.per_seed.end(), 0.0) /
          point.per_seed.size();
      double var = 0.0;
      for (double v : point.per_seed) var += (v - mean) * (v - mean);
      point.mean_auroc = mean;
      point.std_auroc = std::sqrt(var / point.per_seed.size());
    }
    curve.push_back(std::move(point));
  }
  return curve;
}

// ---- caption overlap metrics ----

struct CaptionMetrics {
  double token_f1 = 0.0;
  double rouge_l = 0.0;
};

// Token-level F1 on multisets plus ROUGE-L from the longest common
// subsequence, over pre-tokenized word lists.
inline CaptionMetrics caption_metrics(const std::vector<std::string>& hyp,
                                      const std::vector<std::string>& ref) {
  if (ref.empty()) {
    throw std::invalid_argument("caption_metrics: empty reference");
  }
  CaptionMetrics m;
  if (!hyp.empty()) {
    std::map<std::string, std::size_t> ref_counts;
    for (const auto& t : ref) ++ref_counts[t];
    std::size_t overlap = 0;
    for (const auto& t : hyp) {
      auto it = ref_counts.find(t);
      if (it != ref_counts.end() && it->second > 0) {
        --it->second;
        ++overlap;
      }
    }
    const double p = static_cast<double>(overlap) / hyp.size();
    const double r = static_cast<double>(overlap) / ref.size();
    m.token_f1 = p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
    // LCS length by dynamic programming.
    const std::size_t a = hyp.size(), b = ref.size();
    std::vector<std::size_t> prev(b + 1, 0), cur(b + 1, 0);
    for (std::size_t i = 1; i <= a; ++i) {
      for (std::size_t j = 1; j <= b; ++j) {
        cur[j] = hyp[i - 1] == ref[j - 1]
                     ? prev[j - 1] + 1
                     : std::max(prev[j], cur[j - 1]);
      }
      std::swap(prev, cur);
    }
    const double lcs = static_cast<double>(prev[b]);
    const double pl = lcs / hyp.size();
    const double rl = lcs / ref.size();
    m.rouge_l = pl + rl > 0.0 ? 2.0 * pl * rl / (pl + rl) : 0.0;
  }
  return m;
}

// ---- reports ----

struct EvalReport {
  std::string task;
  std::map<std::string, double> metrics;
  std::vector<std::map<std::string, std::string>> per_class;
  std::vector<std::string> notes;
  std::string config_digest;

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["task"] = task;
    j["metrics"] = metrics;
    j["per_class"] = per_class;
    j["notes"] = notes;
    j["config_digest"] = config_digest;
    return j;
  }

  std::string to_text() const {
    std::ostringstream os;
    os << "== " << task << " ==\n";
    for (const auto& [k, v] : metrics) {
      os << "  " << k;
      for (std::size_t i = k.size(); i < 24; ++i) os << ' ';
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.4f", v);
      os << buf << "\n";
    }
    for (const auto& n : notes) os << "  note: " << n << "\n";
    return os.str();
  }
};

}  // namespace senselang
