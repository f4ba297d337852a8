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

#include <map>
#include <string>
#include <vector>

#include "senselang/autodiff.hpp"
#include "senselang/common.hpp"
#include "senselang/sensor_data.hpp"
#include "senselang/text.hpp"

namespace senselang {

struct ModelConfig {
  int enc_layers = 2;   // sensor and text encoder depth
  int dec_layers = 2;
  int hidden_dim = 64;
  int heads = 4;
  int mlp_dim = 128;
  int patch_f = 2;
  int patch_t = 60;
  int embed_dim = 32;   // shared projection space
  int vocab_size = 0;   // set once the vocabulary is built
  int max_text_len = 64;
  double dropout = 0.0;

  int tokens_per_day() const {
    return (kNumChannels / patch_f) * (kMinutesPerDay / patch_t);
  }
  int patch_dim() const { return patch_f * patch_t; }
  int head_dim() const { return hidden_dim / heads; }

  void validate() const {
    if (patch_f <= 0 || patch_t <= 0 || kNumChannels % patch_f != 0 ||
        kMinutesPerDay % patch_t != 0) {
      throw std::invalid_argument("patch size must divide the 26x1440 grid");
    }
    if (hidden_dim <= 0 || heads <= 0 || hidden_dim % heads != 0) {
      throw std::invalid_argument("hidden_dim must be divisible by heads");
    }
    if (enc_layers < 1 || dec_layers < 1) {
      throw std::invalid_argument("encoder/decoder need at least one layer");
    }
    if (embed_dim <= 0 || mlp_dim <= 0 || max_text_len < 2) {
      throw std::invalid_argument("bad model dimensions");
    }
    if (vocab_size < kNumSpecialTokens) {
      throw std::invalid_argument("vocab_size must cover the special tokens");
    }
    if (dropout < 0.0 || dropout >= 1.0) {
      throw std::invalid_argument("dropout must be in [0, 1)");
    }
  }

  // Desk-scale default: full acceptance suite runs in minutes on one core.
  static ModelConfig tiny(int vocab) {
    ModelConfig c;
    c.vocab_size = vocab;
    return c;
  }

  // Published family rows, useful for config validation.
  static ModelConfig family(const std::string& name, int vocab = 4096) {
    ModelConfig c;
    c.patch_f = 2;
    c.patch_t = 10;
    c.dec_layers = 3;
    c.vocab_size = vocab;
    if (name == "S") { c.enc_layers = 12; c.mlp_dim = 512; c.hidden_dim = 128; c.heads = 16; }
    else if (name == "B") { c.enc_layers = 12; c.mlp_dim = 3072; c.hidden_dim = 768; c.heads = 12; }
    else if (name == "L") { c.enc_layers = 24; c.mlp_dim = 4096; c.hidden_dim = 1024; c.heads = 16; }
    else if (name == "XL") { c.enc_layers = 40; c.mlp_dim = 5632; c.hidden_dim = 1408; c.heads = 16; }
    else throw std::invalid_argument("unknown family variant: " + name);
    c.embed_dim = c.hidden_dim;
    return c;
  }
};

struct TensorSpec {
  std::string name;
  int rows;
  int cols;
};

// Every trainable tensor, fully determined by the config.
inline std::vector<TensorSpec> parameter_specs(const ModelConfig& cfg) {
  std::vector<TensorSpec> specs;
  const int h = cfg.hidden_dim, mlp = cfg.mlp_dim;
  auto block = [&](const std::string& prefix, bool cross) {
    specs.push_back({prefix + "ln1.g", 1, h});
    specs.push_back({prefix + "ln1.b", 1, h});
    for (const char* w : {"wq", "wk", "wv", "wo"}) {
      specs.push_back({prefix + "attn." + std::string(w), h, h});
    }
    for (const char* b : {"bq", "bk", "bv", "bo"}) {
      specs.push_back({prefix + "attn." + std::string(b), 1, h});
    }
    if (cross) {
      specs.push_back({prefix + "lnx.g", 1, h});
      specs.push_back({prefix + "lnx.b", 1, h});
      for (const char* w : {"wq", "wk", "wv", "wo"}) {
        specs.push_back({prefix + "xattn." + std::string(w), h, h});
      }
      for (const char* b : {"bq", "bk", "bv", "bo"}) {
        specs.push_back({prefix + "xattn." + std::string(b), 1, h});
      }
    }
    specs.push_back({prefix + "ln2.g", 1, h});
    specs.push_back({prefix + "ln2.b", 1, h});
    specs.push_back({prefix + "mlp.w1", h, mlp});
    specs.push_back({prefix + "mlp.b1", 1, mlp});
    specs.push_back({prefix + "mlp.w2", mlp, h});
    specs.push_back({prefix + "mlp.b2", 1, h});
  };
  specs.push_back({"senc.patch.w", cfg.patch_dim(), h});
  specs.push_back({"senc.patch.b", 1, h});
  specs.push_back({"senc.pos", cfg.tokens_per_day(), h});
  for (int l = 0; l < cfg.enc_layers; ++l) {
    block("senc.l" + std::to_string(l) + ".", false);
  }
  specs.push_back({"senc.lnf.g", 1, h});
  specs.push_back({"senc.lnf.b", 1, h});
  specs.push_back({"tenc.tok", cfg.vocab_size, h});
  specs.push_back({"tenc.pos", cfg.max_text_len, h});
  for (int l = 0; l < cfg.enc_layers; ++l) {
    block("tenc.l" + std::to_string(l) + ".", false);
  }
  specs.push_back({"tenc.lnf.g", 1, h});
  specs.push_back({"tenc.lnf.b", 1, h});
  specs.push_back({"proj.sensor.w", h, cfg.embed_dim});
  specs.push_back({"proj.text.w", h, cfg.embed_dim});
  specs.push_back({"dec.tok", cfg.vocab_size, h});
  specs.push_back({"dec.pos", cfg.max_text_len, h});
  for (int l = 0; l < cfg.dec_layers; ++l) {
    block("dec.l" + std::to_string(l) + ".", true);
  }
  specs.push_back({"dec.lnf.g", 1, h});
  specs.push_back({"dec.lnf.b", 1, h});
  specs.push_back({"dec.out.w", h, cfg.vocab_size});
  specs.push_back({"dec.out.b", 1, cfg.vocab_size});
  return specs;
}

using ParamStore = std::map<std::string, ad::Mat>;
using Gradients = std::map<std::string, ad::Mat>;

inline std::size_t parameter_count(const ParamStore& params) {
  std::size_t n = 0;
  for (const auto& [name, t] : params) n += static_cast<std::size_t>(t.size());
  return n;
}

// Truncated normal (std 0.02) weights, zero biases, unit layer-norm gains.
inline ParamStore init_parameters(const ModelConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Rng rng(mix_seed(seed, 0x9a7a));
  auto trunc_normal = [&rng]() {
    double z;
    do {
      z = rng.gaussian();
    } while (std::abs(z) > 2.0);
    return 0.02 * z;
  };
  ParamStore params;
  for (const auto& spec : parameter_specs(cfg)) {
    ad::Mat m(spec.rows, spec.cols);
    const bool is_bias = spec.name.find(".b") != std::string::npos &&
                         (spec.name.ends_with(".b") ||
                          spec.name.find(".b1") != std::string::npos ||
                          spec.name.find(".b2") != std::string::npos ||
                          spec.name.find(".bq") != std::string::npos ||
                          spec.name.find(".bk") != std::string::npos ||
                          spec.name.find(".bv") != std::string::npos ||
                          spec.name.find(".bo") != std::string::npos);
    const bool is_gain = spec.name.ends_with(".g");
    if (is_gain) {
      m.setOnes();
    } else if (is_bias) {
      m.setZero();
    } else {
      for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
          m(i, j) = trunc_normal();
        }
      }
    }
    params.emplace(spec.name, std::move(m));
  }
  return params;
}

// Slices a normalized day into (feature-block x time-block) patch tokens,
// row-major over blocks; each token flattens its patch row-major.
inline ad::Mat patchify(const SensorDay& day, const ModelConfig& cfg) {
  cfg.validate();
  const int nf = kNumChannels / cfg.patch_f;
  const int nt = kMinutesPerDay / cfg.patch_t;
  ad::Mat tokens(nf * nt, cfg.patch_dim());
  for (int fb = 0; fb < nf; ++fb) {
    for (int tb = 0; tb < nt; ++tb) {
      const int row = fb * nt + tb;
      for (int i = 0; i < cfg.patch_f; ++i) {
        for (int j = 0; j < cfg.patch_t; ++j) {
          tokens(row, i * cfg.patch_t + j) =
              day.at(fb * cfg.patch_f + i, tb * cfg.patch_t + j);
        }
      }
    }
  }
  return tokens;
}

// Builds forward graphs over a parameter store; leaves are created lazily so
// a variant that never touches a tensor reports an exactly-zero gradient
// for it.
class Workspace {
 public:
  Workspace(const ModelConfig& cfg, ParamStore& params)
      : cfg_(cfg), params_(params) {}

  const ModelConfig& config() const { return cfg_; }

  ad::Tensor p(const std::string& name) {
    auto it = leaves_.find(name);
    if (it != leaves_.end()) return it->second;
    auto pit = params_.find(name);
    if (pit == params_.end()) {
      throw std::out_of_range("unknown parameter: " + name);
    }
    auto leaf = ad::make_tensor(pit->second);
    leaves_.emplace(name, leaf);
    return leaf;
  }

  // Gradients for every parameter; tensors outside the active graph get
  // exact zeros.
  Gradients gradients() const {
    Gradients grads;
    for (const auto& [name, value] : params_) {
      auto it = leaves_.find(name);
      if (it != leaves_.end() && it->second->grad.size() > 0) {
        grads[name] = it->second->grad;
      } else {
        grads[name] = ad::Mat::Zero(value.rows(), value.cols());
      }
    }
    return grads;
  }

  // ---- transformer building blocks ----

  ad::Tensor attention(const std::string& prefix, const ad::Tensor& q_in,
                       const ad::Tensor& kv_in, const ad::Mat* add_mask) {
    const int dh = cfg_.head_dim();
    auto q = ad::add_rowvec(ad::matmul(q_in, p(prefix + "wq")),
                            p(prefix + "bq"));
    auto k = ad::add_rowvec(ad::matmul(kv_in, p(prefix + "wk")),
                            p(prefix + "bk"));
    auto v = ad::add_rowvec(ad::matmul(kv_in, p(prefix + "wv")),
                            p(prefix + "bv"));
    std::vector<ad::Tensor> head_outs;
    const double inv_sqrt_dh = 1.0 / std::sqrt(static_cast<double>(dh));
    for (int h = 0; h < cfg_.heads; ++h) {
      auto qh = ad::slice_cols(q, h * dh, dh);
      auto kh = ad::slice_cols(k, h * dh, dh);
      auto vh = ad::slice_cols(v, h * dh, dh);
      auto scores = ad::scale(ad::matmul_nt(qh, kh), inv_sqrt_dh);
      auto attn = ad::softmax_rows(scores, add_mask);
      head_outs.push_back(ad::matmul(attn, vh));
    }
    auto merged = ad::concat_cols(head_outs);
    return ad::add_rowvec(ad::matmul(merged, p(prefix + "wo")),
                          p(prefix + "bo"));
  }

  ad::Tensor encoder_block(const std::string& prefix, ad::Tensor x,
                           const ad::Mat* attn_mask) {
    auto normed = ad::layer_norm_rows(x, p(prefix + "ln1.g"),
                                      p(prefix + "ln1.b"));
    x = ad::add(x, attention(prefix + "attn.", normed, normed, attn_mask));
    auto normed2 = ad::layer_norm_rows(x, p(prefix + "ln2.g"),
                                       p(prefix + "ln2.b"));
    auto mlp = ad::add_rowvec(
        ad::matmul(ad::gelu(ad::add_rowvec(ad::matmul(normed2,
                                                      p(prefix + "mlp.w1")),
                                           p(prefix + "mlp.b1"))),
                   p(prefix + "mlp.w2")),
        p(prefix + "mlp.b2"));
    return ad::add(x, mlp);
  }

  ad::Tensor decoder_block(const std::string& prefix, ad::Tensor x,
                           const ad::Tensor& memory,
                           const ad::Mat* causal_mask) {
    auto normed = ad::layer_norm_rows(x, p(prefix + "ln1.g"),
                                      p(prefix + "ln1.b"));
    x = ad::add(x, attention(prefix + "attn.", normed, normed, causal_mask));
    auto normed_x = ad::layer_norm_rows(x, p(prefix + "lnx.g"),
                                        p(prefix + "lnx.b"));
    x = ad::add(x, attention(prefix + "xattn.", normed_x, memory, nullptr));
    auto normed2 = ad::layer_norm_rows(x, p(prefix + "ln2.g"),
                                       p(prefix + "ln2.b"));
    auto mlp = ad::add_rowvec(
        ad::matmul(ad::gelu(ad::add_rowvec(ad::matmul(normed2,
                                                      p(prefix + "mlp.w1")),
                                           p(prefix + "mlp.b1"))),
                   p(prefix + "mlp.w2")),
        p(prefix + "mlp.b2"));
    return ad::add(x, mlp);
  }

  struct SensorEncoding {
    ad::Tensor tokens;     // n_tokens x hidden
    ad::Tensor embedding;  // 1 x embed_dim, unit norm (projected)
  };

  // Transformer over patch tokens, mean pooled, projected, normalized.
  SensorEncoding encode_sensor(const SensorDay& normalized_day,
                               bool with_projection = true) {
    auto x = ad::add(
        ad::add_rowvec(ad::matmul(ad::constant(patchify(normalized_day, cfg_)),
                                  p("senc.patch.w")),
                       p("senc.patch.b")),
        p("senc.pos"));
    for (int l = 0; l < cfg_.enc_layers; ++l) {
      x = encoder_block("senc.l" + std::to_string(l) + ".", x, nullptr);
    }
    x = ad::layer_norm_rows(x, p("senc.lnf.g"), p("senc.lnf.b"));
    SensorEncoding out;
    out.tokens = x;
    if (with_projection) {
      auto pooled = ad::mean_rows_weighted(
          x, Eigen::VectorXd::Ones(cfg_.tokens_per_day()));
      out.embedding =
          ad::l2_normalize_rows(ad::matmul(pooled, p("proj.sensor.w")));
      check_finite(out.embedding, "sensor embedding");
    }
    return out;
  }

  // Text encoder with padding-masked attention and pooling.
  ad::Tensor encode_text(const std::vector<int>& ids) {
    const int n = static_cast<int>(ids.size());
    if (n < 1 || n > cfg_.max_text_len) {
      throw std::invalid_argument("text sequence length out of range");
    }
    Eigen::VectorXd pool_w(n);
    ad::Mat pad_mask = ad::Mat::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      pool_w(i) = ids[i] != kPadId ? 1.0 : 0.0;
      if (ids[i] == kPadId) pad_mask.col(i).array() = -1e30;
    }
    auto x = ad::add(ad::gather_rows(p("tenc.tok"), ids),
                     ad::slice_rows(p("tenc.pos"), 0, n));
    for (int l = 0; l < cfg_.enc_layers; ++l) {
      x = encoder_block("tenc.l" + std::to_string(l) + ".", x, &pad_mask);
    }
    x = ad::layer_norm_rows(x, p("tenc.lnf.g"), p("tenc.lnf.b"));
    auto pooled = ad::mean_rows_weighted(x, pool_w);
    auto emb = ad::l2_normalize_rows(ad::matmul(pooled, p("proj.text.w")));
    check_finite(emb, "text embedding");
    return emb;
  }

  // Causally masked decoder over a START-led prefix, cross-attending to the
  // sensor tokens. Returns next-token logits per position.
  ad::Tensor decode_multimodal(const ad::Tensor& sensor_tokens,
                               const std::vector<int>& prefix) {
    const int n = static_cast<int>(prefix.size());
    if (n < 1) throw std::invalid_argument("empty decoder prefix");
    if (n > cfg_.max_text_len) {
      throw std::invalid_argument("decoder prefix longer than max_text_len");
    }
    if (prefix[0] != kStartId) {
      throw std::invalid_argument("decoder prefix must begin with [START]");
    }
    ad::Mat causal = ad::Mat::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) causal(i, j) = -1e30;
    }
    auto x = ad::add(ad::gather_rows(p("dec.tok"), prefix),
                     ad::slice_rows(p("dec.pos"), 0, n));
    for (int l = 0; l < cfg_.dec_layers; ++l) {
      x = decoder_block("dec.l" + std::to_string(l) + ".", x, sensor_tokens,
                        &causal);
    }
    x = ad::layer_norm_rows(x, p("dec.lnf.g"), p("dec.lnf.b"));
    return ad::add_rowvec(ad::matmul(x, p("dec.out.w")), p("dec.out.b"));
  }

 private:
  void check_finite(const ad::Tensor& t, const char* what) const {
    if (!t->val.allFinite()) {
      double pnorm = 0.0;
      for (const auto& [name, m] : params_) pnorm += m.squaredNorm();
      throw std::runtime_error(std::string("non-finite ") + what +
                               " (parameter L2 norm " +
                               std::to_string(std::sqrt(pnorm)) + ")");
    }
  }

  const ModelConfig& cfg_;
  ParamStore& params_;
  std::map<std::string, ad::Tensor> leaves_;
};

// Greedy argmax decoding from [START] until [END] or max_len total tokens.
inline std::string generate_caption(const ModelConfig& cfg, ParamStore& params,
                                    const SensorDay& normalized_day,
                                    const Vocabulary& vocab, int max_len) {
  Workspace ws(cfg, params);
  auto enc = ws.encode_sensor(normalized_day, /*with_projection=*/false);
  std::vector<int> prefix = {kStartId};
  std::vector<int> emitted;
  while (static_cast<int>(prefix.size()) < max_len &&
         static_cast<int>(prefix.size()) < cfg.max_text_len) {
    auto logits = ws.decode_multimodal(enc.tokens, prefix);
    const auto row = logits->val.row(logits->val.rows() - 1);
    int best = 0;
    for (int j = 1; j < cfg.vocab_size; ++j) {
      if (row(j) > row(best)) best = j;
    }
    if (best == kEndId) break;
    prefix.push_back(best);
    emitted.push_back(best);
  }
  return vocab.detokenize(emitted);
}

// ---- checkpoint file ("SLMC") ----

inline constexpr char kCheckpointMagic[4] = {'S', 'L', 'M', 'C'};
inline constexpr std::uint16_t kCheckpointVersion = 1;

inline void write_model_config(std::ostream& os, const ModelConfig& cfg) {
  for (int v : {cfg.enc_layers, cfg.dec_layers, cfg.hidden_dim, cfg.heads,
                cfg.mlp_dim, cfg.patch_f, cfg.patch_t, cfg.embed_dim,
                cfg.vocab_size, cfg.max_text_len}) {
    write_le<std::uint32_t>(os, static_cast<std::uint32_t>(v));
  }
  write_le<double>(os, cfg.dropout);
}

inline ModelConfig read_model_config(std::istream& is) {
  ModelConfig cfg;
  cfg.enc_layers = static_cast<int>(read_le<std::uint32_t>(is));
  cfg.dec_layers = static_cast<int>(read_le<std::uint32_t>(is));
  cfg.hidden_dim = static_cast<int>(read_le<std::uint32_t>(is));
  cfg.heads = static_cast<int>(read_le<std::uint32_t>(is));
  cfg.mlp_dim = static_cast<int>(read_le<std::uint32_t>(is));
  cfg.patch_f = static_cast<int>(read_le<std::uint32_t>(is));
  cfg.patch_t = static_cast<int>(read_le<std::uint32_t>(is));
  cfg.embed_dim = static_cast<int>(read_le<std::uint32_t>(is));
  cfg.vocab_size = static_cast<int>(read_le<std::uint32_t>(is));
  cfg.max_text_len = static_cast<int>(read_le<std::uint32_t>(is));
  cfg.dropout = read_le<double>(is);
  return cfg;
}

inline void save_checkpoint(const ModelConfig& cfg, const ParamStore& params,
                            const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for write: " + path);
  os.write(kCheckpointMagic, 4);
  write_le<std::uint16_t>(os, kCheckpointVersion);
  write_model_config(os, cfg);
  write_le<std::uint32_t>(os, static_cast<std::uint32_t>(params.size()));
  for (const auto& [name, m] : params) {
    write_string(os, name);
    write_le<std::uint32_t>(os, static_cast<std::uint32_t>(m.rows()));
    write_le<std::uint32_t>(os, static_cast<std::uint32_t>(m.cols()));
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        write_le<float>(os, static_cast<float>(m(r, c)));
      }
    }
  }
  if (!os) throw std::runtime_error("checkpoint write failed: " + path);
}

inline std::pair<ModelConfig, ParamStore> load_checkpoint(
    const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open for read: " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kCheckpointMagic, 4) != 0) {
    throw std::runtime_error("bad magic in checkpoint: " + path);
  }
  if (read_le<std::uint16_t>(is) != kCheckpointVersion) {
    throw std::runtime_error("unsupported checkpoint version");
  }
  ModelConfig cfg = read_model_config(is);
  cfg.validate();
  std::map<std::string, std::pair<int, int>> expected;
  for (const auto& spec : parameter_specs(cfg)) {
    expected[spec.name] = {spec.rows, spec.cols};
  }
  const auto count = read_le<std::uint32_t>(is);
  if (count != expected.size()) {
    throw std::runtime_error("checkpoint tensor count mismatch");
  }
  ParamStore params;
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::string name = read_string(is);
    const int rows = static_cast<int>(read_le<std::uint32_t>(is));
    const int cols = static_cast<int>(read_le<std::uint32_t>(is));
    auto it = expected.find(name);
    if (it == expected.end() || it->second.first != rows ||
        it->second.second != cols) {
      throw std::runtime_error("checkpoint tensor mismatch: " + name);
    }
    ad::Mat m(rows, cols);
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) {
        m(r, c) = static_cast<double>(read_le<float>(is));
      }
    }
    params.emplace(name, std::move(m));
  }
  return {cfg, std::move(params)};
}

}  // namespace senselang
