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

#include <cstdlib>
#include <map>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "senselang/captions.hpp"
#include "senselang/model.hpp"
#include "senselang/trainer.hpp"

namespace senselang {

// TOML-style run configuration: [section] headers and key = value lines.
// Unknown sections or keys are rejected.
struct RunConfig {
  // [run]
  std::string name = "run";
  std::uint64_t seed = 0;
  std::string out_dir = "runs";
  // [data]
  std::vector<std::string> classes = {"Run", "Walk", "Sleep", "Outdoor Bike"};
  int days_per_class = 50;
  int eval_days_per_class = 10;
  double mood_probability = 0.3;
  // [captions]
  std::string caption_variant = "struct+sem";
  int caption_budget = kDefaultSentenceBudget;
  bool caption_sweep = false;
  // [model]
  std::string model_preset = "tiny";
  int max_text_len = 64;
  // [train]
  TrainConfig train;
  // [eval]
  std::vector<int> recall_ks = {1, 5};
  std::vector<int> fewshot_shots = {5, 10, 20, 50};
  int fewshot_seeds = 5;
  int max_caption_len = 64;
  // [ablate]
  int ablate_steps = 150;
  int ablate_days_per_class = 16;

  CaptionVariant variant() const { return CaptionVariant::parse(caption_variant); }
};

namespace detail {

using ConfigValue =
    std::variant<std::string, double, bool, std::vector<std::string>,
                 std::vector<double>>;

inline std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

inline ConfigValue parse_value(const std::string& raw, int line_no) {
  const std::string v = trim(raw);
  if (v.empty()) {
    throw std::invalid_argument("config line " + std::to_string(line_no) +
                                ": empty value");
  }
  if (v == "true") return true;
  if (v == "false") return false;
  if (v.front() == '"') {
    if (v.size() < 2 || v.back() != '"') {
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": unterminated string");
    }
    return v.substr(1, v.size() - 2);
  }
  if (v.front() == '[') {
    if (v.back() != ']') {
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": unterminated array");
    }
    const std::string body = trim(v.substr(1, v.size() - 2));
    std::vector<std::string> strings;
    std::vector<double> numbers;
    bool is_string = false, first = true;
    std::size_t pos = 0;
    while (pos < body.size()) {
      std::size_t comma = body.find(',', pos);
      // Respect commas inside quoted strings.
      if (body[pos] == '"' || (pos < body.size() && trim(body.substr(pos)).front() == '"')) {
        const std::size_t open = body.find('"', pos);
        const std::size_t close = body.find('"', open + 1);
        if (close == std::string::npos) {
          throw std::invalid_argument("config line " +
                                      std::to_string(line_no) +
                                      ": unterminated string in array");
        }
        comma = body.find(',', close + 1);
      }
      const std::string item =
          trim(comma == std::string::npos ? body.substr(pos)
                                          : body.substr(pos, comma - pos));
      if (!item.empty()) {
        auto parsed = parse_value(item, line_no);
        if (std::holds_alternative<std::string>(parsed)) {
          if (!first && !is_string) {
            throw std::invalid_argument("config line " +
                                        std::to_string(line_no) +
                                        ": mixed array types");
          }
          is_string = true;
          strings.push_back(std::get<std::string>(parsed));
        } else if (std::holds_alternative<double>(parsed)) {
          if (!first && is_string) {
            throw std::invalid_argument("config line " +
                                        std::to_string(line_no) +
                                        ": mixed array types");
          }
          numbers.push_back(std::get<double>(parsed));
        } else {
          throw std::invalid_argument("config line " +
                                      std::to_string(line_no) +
                                      ": unsupported array element");
        }
        first = false;
      }
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (is_string) return strings;
    return numbers;
  }
  // Number.
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument("trailing junk");
    return d;
  } catch (const std::exception&) {
    throw std::invalid_argument("config line " + std::to_string(line_no) +
                                ": cannot parse value '" + v + "'");
  }
}

}  // namespace detail

inline RunConfig parse_run_config(const std::string& text) {
  RunConfig cfg;
  // Seed fallback from the environment when the file does not set one.
  if (const char* env = std::getenv("SLM_SEED")) {
    cfg.seed = std::strtoull(env, nullptr, 10);
    cfg.train.seed = cfg.seed;
  }
  std::istringstream is(text);
  std::string line, section;
  int line_no = 0;
  auto fail = [&line_no](const std::string& msg) {
    throw std::invalid_argument("config line " + std::to_string(line_no) +
                                ": " + msg);
  };
  bool seed_set = false;
  while (std::getline(is, line)) {
    ++line_no;
    const std::string t = detail::trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (t.front() == '[') {
      if (t.back() != ']') fail("bad section header");
      section = t.substr(1, t.size() - 2);
      static const std::set<std::string> kSections = {
          "run", "data", "captions", "model", "train", "eval", "ablate"};
      if (!kSections.contains(section)) fail("unknown section: " + section);
      continue;
    }
    const std::size_t eq = t.find('=');
    if (eq == std::string::npos) fail("expected key = value");
    const std::string key = detail::trim(t.substr(0, eq));
    const auto value = detail::parse_value(t.substr(eq + 1), line_no);
    auto as_string = [&]() -> std::string {
      if (!std::holds_alternative<std::string>(value)) fail(key + ": expected string");
      return std::get<std::string>(value);
    };
    auto as_double = [&]() -> double {
      if (!std::holds_alternative<double>(value)) fail(key + ": expected number");
      return std::get<double>(value);
    };
    auto as_int = [&]() -> int { return static_cast<int>(as_double()); };
    auto as_bool = [&]() -> bool {
      if (!std::holds_alternative<bool>(value)) fail(key + ": expected bool");
      return std::get<bool>(value);
    };
    auto as_strings = [&]() -> std::vector<std::string> {
      if (!std::holds_alternative<std::vector<std::string>>(value)) {
        fail(key + ": expected string array");
      }
      return std::get<std::vector<std::string>>(value);
    };
    auto as_ints = [&]() -> std::vector<int> {
      if (!std::holds_alternative<std::vector<double>>(value)) {
        fail(key + ": expected number array");
      }
      std::vector<int> out;
      for (double d : std::get<std::vector<double>>(value)) {
        out.push_back(static_cast<int>(d));
      }
      return out;
    };
    if (section == "run") {
      if (key == "name") cfg.name = as_string();
      else if (key == "seed") { cfg.seed = static_cast<std::uint64_t>(as_double()); seed_set = true; }
      else if (key == "out_dir") cfg.out_dir = as_string();
      else fail("unknown key in [run]: " + key);
    } else if (section == "data") {
      if (key == "classes") cfg.classes = as_strings();
      else if (key == "days_per_class") cfg.days_per_class = as_int();
      else if (key == "eval_days_per_class") cfg.eval_days_per_class = as_int();
      else if (key == "mood_probability") cfg.mood_probability = as_double();
      else fail("unknown key in [data]: " + key);
    } else if (section == "captions") {
      if (key == "variant") cfg.caption_variant = as_string();
      else if (key == "budget") cfg.caption_budget = as_int();
      else if (key == "sweep") cfg.caption_sweep = as_bool();
      else fail("unknown key in [captions]: " + key);
    } else if (section == "model") {
      if (key == "preset") cfg.model_preset = as_string();
      else if (key == "max_text_len") cfg.max_text_len = as_int();
      else fail("unknown key in [model]: " + key);
    } else if (section == "train") {
      if (key == "steps") cfg.train.steps = as_int();
      else if (key == "batch_size") cfg.train.batch_size = as_int();
      else if (key == "base_lr") cfg.train.base_lr = as_double();
      else if (key == "warmup_fraction") cfg.train.warmup_fraction = as_double();
      else if (key == "beta1") cfg.train.beta1 = as_double();
      else if (key == "beta2") cfg.train.beta2 = as_double();
      else if (key == "eps") cfg.train.eps = as_double();
      else if (key == "clip_norm") cfg.train.clip_norm = as_double();
      else if (key == "lambda_con") cfg.train.loss.lambda_con = as_double();
      else if (key == "lambda_cap") cfg.train.loss.lambda_cap = as_double();
      else if (key == "tau") cfg.train.loss.tau = as_double();
      else if (key == "denominator_mode") {
        const std::string m = as_string();
        if (m == "include") cfg.train.loss.denominator_mode = DenominatorMode::IncludePositive;
        else if (m == "exclude") cfg.train.loss.denominator_mode = DenominatorMode::ExcludePositive;
        else fail("denominator_mode must be include or exclude");
      } else if (key == "schedule") {
        const std::string m = as_string();
        if (m == "cosine-warmup-linear-decay") cfg.train.schedule = LrSchedule::CosineWarmupLinearDecay;
        else if (m == "linear-warmup-cosine-decay") cfg.train.schedule = LrSchedule::LinearWarmupCosineDecay;
        else fail("unknown schedule: " + m);
      } else fail("unknown key in [train]: " + key);
    } else if (section == "eval") {
      if (key == "recall_ks") cfg.recall_ks = as_ints();
      else if (key == "fewshot_shots") cfg.fewshot_shots = as_ints();
      else if (key == "fewshot_seeds") cfg.fewshot_seeds = as_int();
      else if (key == "max_caption_len") cfg.max_caption_len = as_int();
      else fail("unknown key in [eval]: " + key);
    } else if (section == "ablate") {
      if (key == "steps") cfg.ablate_steps = as_int();
      else if (key == "days_per_class") cfg.ablate_days_per_class = as_int();
      else fail("unknown key in [ablate]: " + key);
    } else {
      fail("key outside any section");
    }
  }
  if (seed_set) cfg.train.seed = cfg.seed;
  return cfg;
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config: " + path);
  std::ostringstream os;
  os << is.rdbuf();
  return parse_run_config(os.str());
}

// Fully resolved config text, archived next to every run's outputs.
inline std::string serialize_run_config(const RunConfig& c) {
  std::ostringstream os;
  os << "[run]\n";
  os << "name = \"" << c.name << "\"\n";
  os << "seed = " << c.seed << "\n";
  os << "out_dir = \"" << c.out_dir << "\"\n\n";
  os << "[data]\n";
  os << "classes = [";
  for (std::size_t i = 0; i < c.classes.size(); ++i) {
    if (i > 0) os << ", ";
    os << '"' << c.classes[i] << '"';
  }
  os << "]\n";
  os << "days_per_class = " << c.days_per_class << "\n";
  os << "eval_days_per_class = " << c.eval_days_per_class << "\n";
  os << "mood_probability = " << c.mood_probability << "\n\n";
  os << "[captions]\n";
  os << "variant = \"" << c.caption_variant << "\"\n";
  os << "budget = " << c.caption_budget << "\n";
  os << "sweep = " << (c.caption_sweep ? "true" : "false") << "\n\n";
  os << "[model]\n";
  os << "preset = \"" << c.model_preset << "\"\n";
  os << "max_text_len = " << c.max_text_len << "\n\n";
  os << "[train]\n";
  os << "steps = " << c.train.steps << "\n";
  os << "batch_size = " << c.train.batch_size << "\n";
  os << "base_lr = " << c.train.base_lr << "\n";
  os << "warmup_fraction = " << c.train.warmup_fraction << "\n";
  os << "beta1 = " << c.train.beta1 << "\n";
  os << "beta2 = " << c.train.beta2 << "\n";
  os << "eps = " << c.train.eps << "\n";
  os << "clip_norm = " << c.train.clip_norm << "\n";
  os << "lambda_con = " << c.train.loss.lambda_con << "\n";
  os << "lambda_cap = " << c.train.loss.lambda_cap << "\n";
  os << "tau = " << c.train.loss.tau << "\n";
  os << "denominator_mode = \""
     << (c.train.loss.denominator_mode == DenominatorMode::IncludePositive
             ? "include"
             : "exclude")
     << "\"\n";
  os << "schedule = \""
     << (c.train.schedule == LrSchedule::CosineWarmupLinearDecay
             ? "cosine-warmup-linear-decay"
             : "linear-warmup-cosine-decay")
     << "\"\n\n";
  os << "[eval]\n";
  os << "recall_ks = [";
  for (std::size_t i = 0; i < c.recall_ks.size(); ++i) {
    if (i > 0) os << ", ";
    os << c.recall_ks[i];
  }
  os << "]\n";
  os << "fewshot_shots = [";
  for (std::size_t i = 0; i < c.fewshot_shots.size(); ++i) {
    if (i > 0) os << ", ";
    os << c.fewshot_shots[i];
  }
  os << "]\n";
  os << "fewshot_seeds = " << c.fewshot_seeds << "\n";
  os << "max_caption_len = " << c.max_caption_len << "\n\n";
  os << "[ablate]\n";
  os << "steps = " << c.ablate_steps << "\n";
  os << "days_per_class = " << c.ablate_days_per_class << "\n";
  return os.str();
}

// FNV-1a digest of the resolved config, recorded in reports.
inline std::string config_digest(const RunConfig& c) {
  const std::string text = serialize_run_config(c);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace senselang
