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

#include <filesystem>

#include <catch2/catch_amalgamated.hpp>

#include "senselang/trainer.hpp"

using namespace senselang;
namespace fs = std::filesystem;

namespace {

ModelConfig micro(int vocab) {
  ModelConfig c;
  c.enc_layers = 1;
  c.dec_layers = 1;
  c.hidden_dim = 8;
  c.heads = 2;
  c.mlp_dim = 16;
  c.patch_f = 13;
  c.patch_t = 360;
  c.embed_dim = 8;
  c.vocab_size = vocab;
  c.max_text_len = 8;
  return c;
}

SensorDay random_day(std::uint64_t seed) {
  Rng rng(seed);
  SensorDay day;
  for (auto& v : day.values) v = static_cast<float>(rng.gaussian());
  return day;
}

bool params_equal(const ParamStore& a, const ParamStore& b) {
  if (a.size() != b.size()) return false;
  for (const auto& [name, m] : a) {
    auto it = b.find(name);
    if (it == b.end() || it->second.rows() != m.rows() ||
        it->second.cols() != m.cols()) {
      return false;
    }
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      if (m(i) != it->second(i)) return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("learning rate schedule hits its endpoints") {
  TrainConfig cfg;
  cfg.steps = 1000;
  cfg.base_lr = 3e-4;
  cfg.warmup_fraction = 0.1;

  SECTION("cosine warmup, linear decay") {
    cfg.schedule = LrSchedule::CosineWarmupLinearDecay;
    CHECK(lr_at(0, cfg) == 0.0);
    CHECK(lr_at(100, cfg) == Catch::Approx(cfg.base_lr).epsilon(1e-12));
    CHECK(lr_at(cfg.steps, cfg) == Catch::Approx(0.0).margin(1e-15));
    // Halfway through warmup the cosine ramp sits at base/2.
    CHECK(lr_at(50, cfg) == Catch::Approx(0.5 * cfg.base_lr).epsilon(1e-12));
    // Linear decay: halfway through decay sits at base/2.
    CHECK(lr_at(550, cfg) == Catch::Approx(0.5 * cfg.base_lr).epsilon(1e-12));
    for (int s = 1; s <= 100; ++s) CHECK(lr_at(s, cfg) >= lr_at(s - 1, cfg));
    for (int s = 101; s <= 1000; ++s) CHECK(lr_at(s, cfg) <= lr_at(s - 1, cfg));
  }

  SECTION("linear warmup, cosine decay") {
    cfg.schedule = LrSchedule::LinearWarmupCosineDecay;
    CHECK(lr_at(0, cfg) == 0.0);
    CHECK(lr_at(100, cfg) == Catch::Approx(cfg.base_lr).epsilon(1e-12));
    CHECK(lr_at(cfg.steps, cfg) == Catch::Approx(0.0).margin(1e-15));
    CHECK(lr_at(50, cfg) == Catch::Approx(0.5 * cfg.base_lr).epsilon(1e-12));
    CHECK(lr_at(550, cfg) == Catch::Approx(0.5 * cfg.base_lr).epsilon(1e-12));
  }

  CHECK_THROWS_AS(lr_at(-1, cfg), std::invalid_argument);
  CHECK_THROWS_AS(lr_at(1001, cfg), std::invalid_argument);
}

TEST_CASE("train config validation") {
  TrainConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.batch_size = 1;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = TrainConfig{};
  cfg.warmup_fraction = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = TrainConfig{};
  cfg.steps = -1;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("one Adam step matches the closed form") {
  TrainConfig cfg;
  cfg.base_lr = 0.1;
  ParamStore params;
  params["w"] = ad::Mat::Constant(1, 1, 2.0);
  Gradients grads;
  grads["w"] = ad::Mat::Constant(1, 1, 0.5);
  AdamState state = AdamState::init(params);
  adam_step(state, params, grads, 0.1, cfg);
  // After step 1 bias correction makes mhat = g and vhat = g^2, so the
  // update is lr * g / (|g| + eps).
  const double expect = 2.0 - 0.1 * 0.5 / (0.5 + cfg.eps);
  CHECK(params.at("w")(0, 0) == Catch::Approx(expect).epsilon(1e-12));
  CHECK(state.step == 1);
  CHECK(state.m.at("w")(0, 0) == Catch::Approx((1.0 - cfg.beta1) * 0.5));
  CHECK(state.v.at("w")(0, 0) == Catch::Approx((1.0 - cfg.beta2) * 0.25));
}

TEST_CASE("adam rejects bad gradients without touching state") {
  TrainConfig cfg;
  ParamStore params;
  params["w"] = ad::Mat::Ones(2, 2);
  AdamState state = AdamState::init(params);
  Gradients wrong_shape;
  wrong_shape["w"] = ad::Mat::Ones(1, 2);
  CHECK_THROWS_AS(adam_step(state, params, wrong_shape, 0.1, cfg),
                  std::invalid_argument);
  Gradients nan_grad;
  nan_grad["w"] = ad::Mat::Constant(2, 2, std::nan(""));
  CHECK_THROWS_AS(adam_step(state, params, nan_grad, 0.1, cfg),
                  std::runtime_error);
  CHECK(state.step == 0);
  CHECK(params.at("w").isOnes());
}

TEST_CASE("gradient clipping rescales only above the threshold") {
  Gradients grads;
  grads["a"] = ad::Mat::Constant(1, 1, 3.0);
  grads["b"] = ad::Mat::Constant(1, 1, 4.0);
  CHECK(global_grad_norm(grads) == Catch::Approx(5.0).epsilon(1e-12));
  Gradients copy = grads;
  clip_gradients(copy, 10.0);
  CHECK(copy.at("a")(0, 0) == 3.0);  // untouched below the limit
  clip_gradients(grads, 1.0);
  CHECK(global_grad_norm(grads) == Catch::Approx(1.0).epsilon(1e-12));
  CHECK(grads.at("a")(0, 0) == Catch::Approx(0.6).epsilon(1e-12));
}

TEST_CASE("batch selection is a pure function of seed and step") {
  TrainConfig cfg;
  cfg.batch_size = 4;
  cfg.seed = 9;
  auto b1 = batch_indices(10, cfg, 5);
  auto b2 = batch_indices(10, cfg, 5);
  CHECK(b1 == b2);
  CHECK(b1.size() == 4);
  // One epoch covers distinct indices across its batches.
  std::set<std::size_t> seen;
  for (int s = 0; s < 2; ++s) {  // 10/4 = 2 full batches per epoch
    for (auto i : batch_indices(10, cfg, s)) CHECK(seen.insert(i).second);
  }
  cfg.seed = 10;
  CHECK(batch_indices(10, cfg, 5) != b1);
  // Batch size larger than the dataset shrinks to the dataset.
  cfg.batch_size = 64;
  CHECK(batch_indices(10, cfg, 0).size() == 10);
}

TEST_CASE("training is deterministic and zero steps is a no-op") {
  Vocabulary vocab = Vocabulary::build({"run day", "walk day", "sleep day",
                                        "bike day"});
  ModelConfig mc = micro(vocab.size());
  std::vector<SensorDay> days = {random_day(1), random_day(2), random_day(3),
                                 random_day(4)};
  std::vector<TrainPair> pairs = {{&days[0], "run day"},
                                  {&days[1], "walk day"},
                                  {&days[2], "sleep day"},
                                  {&days[3], "bike day"}};
  TrainConfig tc;
  tc.steps = 3;
  tc.batch_size = 4;
  tc.seed = 1;

  auto r1 = train(mc, init_parameters(mc, 2), pairs, vocab, tc);
  auto r2 = train(mc, init_parameters(mc, 2), pairs, vocab, tc);
  CHECK(r1.steps_done == 3);
  CHECK_FALSE(r1.diverged);
  CHECK(params_equal(r1.params, r2.params));
  REQUIRE(r1.log.size() == 3);
  CHECK(r1.log[0].loss_total == r2.log[0].loss_total);

  TrainConfig zero = tc;
  zero.steps = 0;
  auto frozen = init_parameters(mc, 2);
  auto r0 = train(mc, frozen, pairs, vocab, zero);
  CHECK(params_equal(r0.params, init_parameters(mc, 2)));
  CHECK(r0.steps_done == 0);

  CHECK_THROWS_AS(train(mc, init_parameters(mc, 2), {}, vocab, tc),
                  std::invalid_argument);
}

TEST_CASE("loss components respect the lambda weights") {
  Vocabulary vocab = Vocabulary::build({"alpha beta", "gamma delta"});
  ModelConfig mc = micro(vocab.size());
  std::vector<SensorDay> days = {random_day(5), random_day(6)};
  std::vector<TrainPair> pairs = {{&days[0], "alpha beta"},
                                  {&days[1], "gamma delta"}};
  TrainConfig tc;
  tc.steps = 1;
  tc.batch_size = 2;

  tc.loss = LossConfig::clip();
  auto clip = train(mc, init_parameters(mc, 3), pairs, vocab, tc);
  CHECK(clip.log[0].loss_cap == 0.0);
  CHECK(clip.log[0].loss_total == Catch::Approx(clip.log[0].loss_con));

  tc.loss = LossConfig::cap();
  auto cap = train(mc, init_parameters(mc, 3), pairs, vocab, tc);
  CHECK(cap.log[0].loss_con == 0.0);
  CHECK(cap.log[0].loss_total == Catch::Approx(cap.log[0].loss_cap));

  tc.loss = LossConfig::coca();
  auto coca = train(mc, init_parameters(mc, 3), pairs, vocab, tc);
  CHECK(coca.log[0].loss_total ==
        Catch::Approx(coca.log[0].loss_con + coca.log[0].loss_cap)
            .epsilon(1e-9));
  // The contrastive term matches the CLIP run at the same init and batch.
  CHECK(coca.log[0].loss_con == Catch::Approx(clip.log[0].loss_con));
}

TEST_CASE("csv log has the documented header and one row per step") {
  Vocabulary vocab = Vocabulary::build({"one two", "three four"});
  ModelConfig mc = micro(vocab.size());
  std::vector<SensorDay> days = {random_day(7), random_day(8)};
  std::vector<TrainPair> pairs = {{&days[0], "one two"},
                                  {&days[1], "three four"}};
  TrainConfig tc;
  tc.steps = 2;
  tc.batch_size = 2;
  std::ostringstream csv;
  train(mc, init_parameters(mc, 4), pairs, vocab, tc, &csv);
  std::istringstream lines(csv.str());
  std::string line;
  REQUIRE(std::getline(lines, line));
  CHECK(line == "step,lr,loss_total,loss_con,loss_cap");
  int rows = 0;
  while (std::getline(lines, line)) {
    if (!line.empty()) ++rows;
  }
  CHECK(rows == 2);
}

TEST_CASE("resume from the train-state sidecar is bit-identical") {
  Vocabulary vocab = Vocabulary::build({"aa bb", "cc dd", "ee ff", "gg hh"});
  ModelConfig mc = micro(vocab.size());
  std::vector<SensorDay> days = {random_day(9), random_day(10), random_day(11),
                                 random_day(12)};
  std::vector<TrainPair> pairs = {{&days[0], "aa bb"},
                                  {&days[1], "cc dd"},
                                  {&days[2], "ee ff"},
                                  {&days[3], "gg hh"}};
  TrainConfig tc;
  tc.steps = 4;
  tc.batch_size = 2;
  tc.seed = 5;

  auto full = train(mc, init_parameters(mc, 6), pairs, vocab, tc);

  // Same total-step schedule, interrupted after two steps.
  StopCheck interrupt{2, [](int step, ParamStore&) { return step == 2; }};
  auto first = train(mc, init_parameters(mc, 6), pairs, vocab, tc, nullptr,
                     interrupt);
  REQUIRE(first.steps_done == 2);
  const auto path =
      (fs::temp_directory_path() / "senselang_state.slmt").string();
  save_train_state(first.params, first.opt, first.steps_done, path);
  auto [params, opt, steps_done] = load_train_state(path);
  CHECK(steps_done == 2);
  CHECK(params_equal(params, first.params));

  auto resumed = train(mc, std::move(params), pairs, vocab, tc, nullptr, {},
                       std::move(opt), steps_done);
  CHECK(resumed.steps_done == 4);
  CHECK(params_equal(resumed.params, full.params));
  fs::remove(path);
}

TEST_CASE("early stop fires on schedule") {
  Vocabulary vocab = Vocabulary::build({"pp qq", "rr ss"});
  ModelConfig mc = micro(vocab.size());
  std::vector<SensorDay> days = {random_day(13), random_day(14)};
  std::vector<TrainPair> pairs = {{&days[0], "pp qq"}, {&days[1], "rr ss"}};
  TrainConfig tc;
  tc.steps = 10;
  tc.batch_size = 2;
  int calls = 0;
  StopCheck stop{2, [&calls](int, ParamStore&) {
                   ++calls;
                   return calls == 2;  // stop after step 4
                 }};
  auto r = train(mc, init_parameters(mc, 7), pairs, vocab, tc, nullptr, stop);
  CHECK(calls == 2);
  CHECK(r.steps_done == 4);
}
