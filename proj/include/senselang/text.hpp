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
#include <cctype>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "senselang/common.hpp"

namespace senselang {

constexpr int kPadId = 0;
constexpr int kStartId = 1;
constexpr int kEndId = 2;
constexpr int kUnkId = 3;
constexpr int kNumSpecialTokens = 4;

// Lowercases and splits on whitespace and punctuation; punctuation marks are
// kept as single-character tokens and numbers (including decimals) stay
// whole.
inline std::vector<std::string> split_words(const std::string& text) {
  std::vector<std::string> out;
  const std::size_t n = text.size();
  std::size_t i = 0;
  auto is_digit = [](char c) { return c >= '0' && c <= '9'; };
  auto is_alpha = [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
  };
  while (i < n) {
    const char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (is_digit(c)) {
      std::size_t j = i;
      while (j < n && is_digit(text[j])) ++j;
      if (j < n && text[j] == '.' && j + 1 < n && is_digit(text[j + 1])) {
        ++j;
        while (j < n && is_digit(text[j])) ++j;
      }
      out.push_back(text.substr(i, j - i));
      i = j;
      continue;
    }
    if (is_alpha(c)) {
      std::size_t j = i;
      std::string w;
      while (j < n && is_alpha(text[j])) {
        w += static_cast<char>(
            std::tolower(static_cast<unsigned char>(text[j])));
        ++j;
      }
      out.push_back(std::move(w));
      i = j;
      continue;
    }
    out.push_back(std::string(1, c));
    ++i;
  }
  return out;
}

// Canonical text form: tokens joined by single spaces.
inline std::string normalize_text(const std::string& text) {
  const auto words = split_words(text);
  std::string out;
  for (const auto& w : words) {
    if (!out.empty()) out += " ";
    out += w;
  }
  return out;
}

class Vocabulary {
 public:
  Vocabulary() {
    id_to_token_ = {"[PAD]", "[START]", "[END]", "[UNK]"};
  }

  // Adds all tokens with corpus frequency >= min_freq, ordered by
  // (-frequency, token) for stable ids across runs.
  static Vocabulary build(const std::vector<std::string>& corpus,
                          std::size_t min_freq = 1) {
    if (corpus.empty()) throw std::invalid_argument("build_vocab: empty corpus");
    std::map<std::string, std::size_t> freq;
    for (const auto& text : corpus) {
      for (const auto& w : split_words(text)) ++freq[w];
    }
    std::vector<std::pair<std::string, std::size_t>> items(freq.begin(),
                                                           freq.end());
    std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
      if (a.second != b.second) return a.second > b.second;
      return a.first < b.first;
    });
    Vocabulary v;
    for (const auto& [token, count] : items) {
      if (count >= min_freq) v.add_token(token);
    }
    return v;
  }

  void add_token(const std::string& token) {
    if (token_to_id_.contains(token)) return;
    token_to_id_[token] = static_cast<int>(id_to_token_.size());
    id_to_token_.push_back(token);
  }

  int size() const { return static_cast<int>(id_to_token_.size()); }

  int id_of(const std::string& token) const {
    auto it = token_to_id_.find(token);
    return it == token_to_id_.end() ? kUnkId : it->second;
  }

  const std::string& token_of(int id) const { return id_to_token_.at(id); }

  std::vector<int> tokenize(const std::string& text) const {
    std::vector<int> ids;
    for (const auto& w : split_words(text)) ids.push_back(id_of(w));
    return ids;
  }

  std::string detokenize(const std::vector<int>& ids) const {
    std::string out;
    for (int id : ids) {
      if (id == kPadId || id == kStartId || id == kEndId) continue;
      if (!out.empty()) out += " ";
      out += token_of(id);
    }
    return out;
  }

  // Decoder framing: [START] tokens... [END], padded to max_len. Token
  // bodies longer than max_len - 2 are truncated so END always fits.
  std::vector<int> frame_for_decoder(const std::string& text,
                                     int max_len) const {
    if (max_len < 2) throw std::invalid_argument("max_len must be >= 2");
    auto ids = tokenize(text);
    if (static_cast<int>(ids.size()) > max_len - 2) ids.resize(max_len - 2);
    std::vector<int> out;
    out.push_back(kStartId);
    out.insert(out.end(), ids.begin(), ids.end());
    out.push_back(kEndId);
    out.resize(max_len, kPadId);
    return out;
  }

  // Plain text asset: one token per line, line number = id - 4.
  void save(const std::string& path) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open for write: " + path);
    for (std::size_t i = kNumSpecialTokens; i < id_to_token_.size(); ++i) {
      os << id_to_token_[i] << "\n";
    }
  }

  static Vocabulary load(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open for read: " + path);
    Vocabulary v;
    std::string line;
    while (std::getline(is, line)) {
      if (!line.empty()) v.add_token(line);
    }
    return v;
  }

 private:
  std::unordered_map<std::string, int> token_to_id_;
  std::vector<std::string> id_to_token_;
};

// ---- zero-shot prompt ensembling ----

inline const std::vector<std::string>& zero_shot_templates() {
  static const std::vector<std::string> kTemplates = {
      "A period of {label} was observed during the session.",
      "Detected a phase of {label}.",
      "Data shows {label} took place",
      "The main action was {label}",
      "{label} was detected during the observed period.",
      "The user engaged in {label} today.",
      "Sensor data consistent with {label}.",
      "An episode of {label} occurred.",
      "This day contains a bout of {label}.",
      "{label} activity was recorded.",
      "The recording shows a session of {label}.",
      "Signals indicate {label} during the day.",
      "A stretch of {label} appears in the data.",
      "The dominant activity was {label}.",
      "Evidence of {label} in the sensor trace.",
      "The user performed {label} at some point.",
      "Observed {label} activity in the recording.",
      "A {label} session took place.",
      "The day's log includes {label}.",
      "Readings reflect a period of {label}.",
      "{label} was the primary logged activity.",
      "One or more intervals of {label} were logged.",
      "The wearable captured {label} activity.",
      "Measurements correspond to {label}.",
      "The person spent time doing {label}.",
      "{label} is present in the activity log.",
      "Patterns typical of {label} were seen.",
      "A recorded episode of {label}.",
      "The data contains {label} behavior.",
      "During the day, {label} was carried out.",
  };
  return kTemplates;
}

struct PromptSet {
  std::string class_label;
  std::vector<std::string> prompts;  // exactly 30
};

inline PromptSet make_prompt_set(const std::string& class_label) {
  PromptSet set;
  set.class_label = class_label;
  for (const auto& tmpl : zero_shot_templates()) {
    std::string p = tmpl;
    std::size_t pos;
    while ((pos = p.find("{label}")) != std::string::npos) {
      p.replace(pos, 7, class_label);
    }
    set.prompts.push_back(std::move(p));
  }
  return set;
}

}  // namespace senselang
