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
#include <cmath>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "senselang/common.hpp"
#include "senselang/features.hpp"
#include "senselang/sensor_data.hpp"

namespace senselang {

enum class CaptionLevel { Statistical, Structural, Semantic };

inline const char* to_string(CaptionLevel l) {
  switch (l) {
    case CaptionLevel::Statistical: return "statistical";
    case CaptionLevel::Structural: return "structural";
    case CaptionLevel::Semantic: return "semantic";
  }
  return "?";
}

// Which caption levels a corpus mixes in.
struct CaptionVariant {
  bool statistical = false;
  bool structural = false;
  bool semantic = false;

  bool any() const { return statistical || structural || semantic; }

  std::string name() const {
    std::string s;
    auto add = [&s](const char* part) {
      if (!s.empty()) s += "+";
      s += part;
    };
    if (statistical) add("stat");
    if (structural) add("struct");
    if (semantic) add("sem");
    return s.empty() ? "none" : s;
  }

  static CaptionVariant parse(const std::string& name) {
    CaptionVariant v;
    std::string part;
    std::istringstream is(name);
    while (std::getline(is, part, '+')) {
      if (part == "stat") v.statistical = true;
      else if (part == "struct") v.structural = true;
      else if (part == "sem") v.semantic = true;
      else throw std::invalid_argument("unknown caption level: " + part);
    }
    if (!v.any()) throw std::invalid_argument("empty caption variant");
    return v;
  }
};

// All 7 nonempty level combinations, statistical-first order.
inline std::vector<CaptionVariant> all_caption_variants() {
  std::vector<CaptionVariant> out;
  for (int m = 1; m < 8; ++m) {
    CaptionVariant v;
    v.statistical = (m & 1) != 0;
    v.structural = (m & 2) != 0;
    v.semantic = (m & 4) != 0;
    out.push_back(v);
  }
  return out;
}

struct StatSummary {
  int channel = 0;
  double mean = 0.0;
  double std = 0.0;
  double min = 0.0;
  double max = 0.0;
};

enum class TrendKind { Increasing, Decreasing, Stable, Spike, Drop };

inline const char* to_string(TrendKind k) {
  switch (k) {
    case TrendKind::Increasing: return "increasing";
    case TrendKind::Decreasing: return "decreasing";
    case TrendKind::Stable: return "stable";
    case TrendKind::Spike: return "spike";
    case TrendKind::Drop: return "drop";
  }
  return "?";
}

// A trend spans [start_min, end_min); a spike/drop is the single minute
// start_min == end_min.
struct TrendEvent {
  int channel = 0;
  TrendKind kind = TrendKind::Stable;
  int start_min = 0;
  int end_min = 0;

  int minute() const { return start_min; }
};

struct SourceSpan {
  TrendKind kind;
  int start_min;
  int end_min;
};

struct Caption {
  std::string text;
  CaptionVariant levels;
  std::vector<SourceSpan> source_spans;
};

// ---- template pools (20 statistical / 15 structural / 20 semantic) ----

struct TemplatePool {
  std::vector<std::string> statistical;        // 20
  std::vector<std::string> structural_trend;   // 8
  std::vector<std::string> structural_spike;   // 7
  std::vector<std::string> semantic_activity;  // 14
  std::vector<std::string> semantic_mood;      // 6

  std::size_t structural_size() const {
    return structural_trend.size() + structural_spike.size();
  }
  std::size_t semantic_size() const {
    return semantic_activity.size() + semantic_mood.size();
  }
};

inline const TemplatePool& default_template_pool() {
  static const TemplatePool kPool = {
      // statistical
      {
          "The average {feature} value is {mean}, with extremes at {max} "
          "(max) and {min} (min), and a std of {std}.",
          "The {feature} data exhibits a mean of {mean}, a standard deviation "
          "of {std}, and its extreme values are {min} and {max}.",
          "{feature} average {mean}, reaching a maximum of {max} and a "
          "minimum of {min}, with a standard deviation of {std}.",
          "{feature} exhibits a mean of {mean}, with peak and minimal values "
          "reaching {max} and {min}, and a standard deviation of {std}.",
          "For the {feature} measurements, the mean is {mean}, the standard "
          "deviation is {std}, and the data lies between {min} and {max}.",
          "{feature} readings center on {mean} with a spread of {std}, "
          "ranging from {min} to {max}.",
          "Over the day, {feature} averaged {mean} (std {std}), with a low of "
          "{min} and a high of {max}.",
          "Mean {feature} is {mean}; values span {min} to {max} with "
          "standard deviation {std}.",
          "The {feature} signal has mean {mean}, minimum {min}, maximum "
          "{max}, and standard deviation {std}.",
          "Daily {feature} statistics: mean {mean}, std {std}, min {min}, "
          "max {max}.",
          "{feature} fluctuated around {mean}, never dropping below {min} or "
          "exceeding {max}, with std {std}.",
          "A mean of {mean} was observed for {feature}, bounded by {min} and "
          "{max} and varying by {std}.",
          "The recorded {feature} values average {mean} and deviate by {std}, "
          "between {min} and {max}.",
          "Summary for {feature}: average {mean}, variability {std}, extremes "
          "{min} and {max}.",
          "{feature} held a typical level of {mean}, with extremes {min} and "
          "{max} and a std of {std}.",
          "Across all minutes, {feature} shows mean {mean} and std {std}, "
          "with range {min} to {max}.",
          "The day's {feature} profile has an average of {mean}, spanning "
          "{min} through {max} (std {std}).",
          "With a mean of {mean} and std of {std}, {feature} stayed within "
          "{min} and {max}.",
          "{feature}: mean {mean}, standard deviation {std}, minimum {min}, "
          "maximum {max}.",
          "Recorded {feature} data averages {mean}, varies by {std}, and "
          "ranges between {min} and {max}.",
      },
      // structural: trends
      {
          "An {kind} trend in {feature} data recorded between minute {start} "
          "and {end}.",
          "{feature} exhibits {kind} trend during minute {start}-{end} "
          "interval.",
          "The {feature} trend from minute {start} to {end} is {kind}.",
          "From minute {start} to {end}, {feature} exhibits an {kind} trend.",
          "Between minute {start} and {end}, the {feature} signal is {kind}.",
          "A sustained {kind} pattern in {feature} spans minutes {start} to "
          "{end}.",
          "{feature} shows an {kind} movement over the {start}-{end} minute "
          "window.",
          "During minutes {start} through {end}, {feature} follows an {kind} "
          "course.",
      },
      // structural: spikes/drops
      {
          "{kind} event recorded for {feature} at minute {minute}.",
          "Minute {minute} shows a {kindlc} for the {feature}.",
          "A {kindlc} is detected for {feature} at minute {minute}.",
          "The {feature} experienced a {kindlc} at minute {minute}.",
          "Data indicates a {kindlc} for {feature} at the {minute}-minute "
          "mark.",
          "A sharp {kindlc} in {feature} occurs at minute {minute}.",
          "{feature} registers a {kindlc} at minute {minute}.",
      },
      // semantic: activities
      {
          "From minute {start} to {end}, the user had a period of {label}.",
          "{label} recorded within the {start}-{end} minute range.",
          "{label} episode occurred between minute {start} and {end}.",
          "{label} was recorded between minute {start} and {end}.",
          "Identified {label} across the timeframe of minute {start} to "
          "{end}.",
          "Observed {label} activity from minute {start} to {end}.",
          "The user engaged in {label} between minute {start} and {end}.",
          "A session of {label} took place during minutes {start} to {end}.",
          "{label} occurred from minute {start} until minute {end}.",
          "Between minutes {start} and {end}, {label} was logged.",
          "An episode of {label} spans the {start}-{end} minute interval.",
          "User performed {label} starting at minute {start} and ending at "
          "minute {end}.",
          "Activity log shows {label} in the window from minute {start} to "
          "{end}.",
          "A bout of {label} was detected between minute {start} and {end}.",
      },
      // semantic: moods
      {
          "The user logged their mood as {label} at minute {minute}.",
          "Mood entry {label} recorded at minute {minute}.",
          "At minute {minute}, the user reported feeling {label}.",
          "A {label} mood was noted at the {minute}-minute mark.",
          "User mood at minute {minute}: {label}.",
          "Feeling {label} was reported at minute {minute}.",
      },
  };
  return kPool;
}

inline std::string replace_all(std::string s, const std::string& from,
                               const std::string& to) {
  std::size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
  return s;
}

// ---- template pool asset (plain text, one template per line) ----

inline void write_template_pool(const TemplatePool& pool,
                                const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for write: " + path);
  os << "# senselang caption templates v1\n";
  auto section = [&os](const char* name, const std::vector<std::string>& v) {
    os << "[" << name << "]\n";
    for (const auto& t : v) os << t << "\n";
  };
  section("statistical", pool.statistical);
  section("structural.trend", pool.structural_trend);
  section("structural.spike", pool.structural_spike);
  section("semantic.activity", pool.semantic_activity);
  section("semantic.mood", pool.semantic_mood);
}

inline TemplatePool read_template_pool(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open for read: " + path);
  TemplatePool pool;
  std::vector<std::string>* current = nullptr;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (line.front() == '[' && line.back() == ']') {
      const std::string name = line.substr(1, line.size() - 2);
      if (name == "statistical") current = &pool.statistical;
      else if (name == "structural.trend") current = &pool.structural_trend;
      else if (name == "structural.spike") current = &pool.structural_spike;
      else if (name == "semantic.activity") current = &pool.semantic_activity;
      else if (name == "semantic.mood") current = &pool.semantic_mood;
      else throw std::runtime_error("unknown template section: " + name);
      continue;
    }
    if (current == nullptr) {
      throw std::runtime_error("template line outside a section");
    }
    current->push_back(line);
  }
  return pool;
}

// ---- channel summaries, trends, spikes ----

inline StatSummary summarize_channel(const float* series,
                                     const std::uint8_t* valid, int channel) {
  double sum = 0.0;
  double lo = 0.0, hi = 0.0;
  std::size_t n = 0;
  for (int t = 0; t < kMinutesPerDay; ++t) {
    if (!valid[t]) continue;
    const double v = series[t];
    if (n == 0) {
      lo = hi = v;
    } else {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    sum += v;
    ++n;
  }
  if (n == 0) throw std::invalid_argument("summarize_channel: no valid entries");
  const double mean = sum / static_cast<double>(n);
  double ss = 0.0;
  for (int t = 0; t < kMinutesPerDay; ++t) {
    if (!valid[t]) continue;
    const double d = series[t] - mean;
    ss += d * d;
  }
  StatSummary s;
  s.channel = channel;
  s.mean = mean;
  s.std = std::sqrt(ss / static_cast<double>(n));
  s.min = lo;
  s.max = hi;
  return s;
}

inline StatSummary summarize_channel(const SensorDay& day, int channel) {
  return summarize_channel(
      day.values.data() + static_cast<std::size_t>(channel) * kMinutesPerDay,
      day.valid.data() + static_cast<std::size_t>(channel) * kMinutesPerDay,
      channel);
}

inline constexpr int kTrendWindowLen = 60;
inline constexpr int kTrendStride = 20;
// 0.5 channel-std per 60 minutes, expressed in std-units per minute.
inline constexpr double kTrendSlopeThreshold = 0.5 / 60.0;

// Sliding-window least-squares slope classification in channel-std units
// per minute. Adjacent same-kind windows (consecutive window positions)
// merge into one event spanning their union; a window with fewer than two
// valid points is skipped and breaks adjacency.
inline std::vector<TrendEvent> detect_trends(
    const float* series, const std::uint8_t* valid, int channel,
    int window_len = kTrendWindowLen, int stride = kTrendStride,
    double slope_threshold = kTrendSlopeThreshold) {
  if (window_len < 2) throw std::invalid_argument("window_len must be >= 2");
  if (stride < 1) throw std::invalid_argument("stride must be >= 1");
  // Channel std over all valid entries, floored.
  double sum = 0.0;
  std::size_t n = 0;
  for (int t = 0; t < kMinutesPerDay; ++t) {
    if (valid[t]) {
      sum += series[t];
      ++n;
    }
  }
  double sd = 1e-6;
  if (n > 0) {
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (int t = 0; t < kMinutesPerDay; ++t) {
      if (valid[t]) {
        const double d = series[t] - mean;
        ss += d * d;
      }
    }
    sd = std::max(std::sqrt(ss / static_cast<double>(n)), 1e-6);
  }
  std::vector<TrendEvent> events;
  int last_window = -2;  // window index of the event currently being merged
  for (int w = 0, start = 0; start + window_len <= kMinutesPerDay;
       ++w, start += stride) {
    // Least-squares slope over valid points in [start, start+window_len).
    double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
    int m = 0;
    for (int t = start; t < start + window_len; ++t) {
      if (!valid[t]) continue;
      st += t;
      sy += series[t];
      stt += static_cast<double>(t) * t;
      sty += static_cast<double>(t) * series[t];
      ++m;
    }
    if (m < 2) continue;
    const double denom = m * stt - st * st;
    if (denom <= 0.0) continue;
    const double slope = (m * sty - st * sy) / denom / sd;
    TrendKind kind = TrendKind::Stable;
    if (slope > slope_threshold) kind = TrendKind::Increasing;
    else if (slope < -slope_threshold) kind = TrendKind::Decreasing;
    if (!events.empty() && last_window == w - 1 && events.back().kind == kind) {
      events.back().end_min = start + window_len;
    } else {
      events.push_back({channel, kind, start, start + window_len});
    }
    last_window = w;
  }
  return events;
}

inline std::vector<TrendEvent> detect_trends(
    const SensorDay& day, int channel, int window_len = kTrendWindowLen,
    int stride = kTrendStride, double slope_threshold = kTrendSlopeThreshold) {
  return detect_trends(
      day.values.data() + static_cast<std::size_t>(channel) * kMinutesPerDay,
      day.valid.data() + static_cast<std::size_t>(channel) * kMinutesPerDay,
      channel, window_len, stride, slope_threshold);
}

inline constexpr double kSpikeSigma = 3.0;

// Minutes beyond mean +- k*std (over valid entries) are flagged; runs of
// consecutive same-kind flagged minutes collapse to the extremal minute.
inline std::vector<TrendEvent> detect_spikes(const float* series,
                                             const std::uint8_t* valid,
                                             int channel,
                                             double k_sigma = kSpikeSigma) {
  if (k_sigma <= 0.0) throw std::invalid_argument("k_sigma must be > 0");
  double sum = 0.0;
  std::size_t n = 0;
  for (int t = 0; t < kMinutesPerDay; ++t) {
    if (valid[t]) {
      sum += series[t];
      ++n;
    }
  }
  if (n == 0) return {};
  const double mean = sum / static_cast<double>(n);
  double ss = 0.0;
  for (int t = 0; t < kMinutesPerDay; ++t) {
    if (valid[t]) {
      const double d = series[t] - mean;
      ss += d * d;
    }
  }
  const double sd = std::sqrt(ss / static_cast<double>(n));
  const double hi = mean + k_sigma * sd;
  const double lo = mean - k_sigma * sd;
  std::vector<TrendEvent> events;
  int run_start = -1;
  TrendKind run_kind = TrendKind::Stable;
  auto flush = [&](int run_end) {
    if (run_start < 0) return;
    int best = run_start;
    for (int t = run_start + 1; t <= run_end; ++t) {
      if (!valid[t]) continue;
      if (run_kind == TrendKind::Spike ? series[t] > series[best]
                                       : series[t] < series[best]) {
        best = t;
      }
    }
    events.push_back({channel, run_kind, best, best});
    run_start = -1;
  };
  for (int t = 0; t < kMinutesPerDay; ++t) {
    TrendKind kind = TrendKind::Stable;
    if (valid[t]) {
      if (series[t] > hi) kind = TrendKind::Spike;
      else if (series[t] < lo) kind = TrendKind::Drop;
    }
    if (kind == TrendKind::Spike || kind == TrendKind::Drop) {
      if (run_start >= 0 && kind != run_kind) flush(t - 1);
      if (run_start < 0) {
        run_start = t;
        run_kind = kind;
      }
    } else {
      flush(t - 1);
    }
  }
  flush(kMinutesPerDay - 1);
  return events;
}

inline std::vector<TrendEvent> detect_spikes(const SensorDay& day, int channel,
                                             double k_sigma = kSpikeSigma) {
  return detect_spikes(
      day.values.data() + static_cast<std::size_t>(channel) * kMinutesPerDay,
      day.valid.data() + static_cast<std::size_t>(channel) * kMinutesPerDay,
      channel, k_sigma);
}

// ---- sentence rendering ----

inline std::string render_statistical(const StatSummary& s,
                                      const std::string& tmpl) {
  const auto& feat = feature_registry()[s.channel];
  std::string out = tmpl;
  out = replace_all(out, "{feature}", feat.caption_name);
  out = replace_all(out, "{mean}", format_1dp(s.mean));
  out = replace_all(out, "{std}", format_1dp(s.std));
  out = replace_all(out, "{min}", format_1dp(s.min));
  out = replace_all(out, "{max}", format_1dp(s.max));
  return out;
}

inline std::string render_trend(const TrendEvent& e, const std::string& tmpl) {
  const auto& feat = feature_registry()[e.channel];
  std::string out = tmpl;
  out = replace_all(out, "{feature}", feat.caption_name);
  out = replace_all(out, "{kind}", to_string(e.kind));
  out = replace_all(out, "{start}", std::to_string(e.start_min));
  out = replace_all(out, "{end}", std::to_string(e.end_min));
  return out;
}

inline std::string render_spike(const TrendEvent& e, const std::string& tmpl) {
  const auto& feat = feature_registry()[e.channel];
  const bool spike = e.kind == TrendKind::Spike;
  std::string out = tmpl;
  out = replace_all(out, "{feature}", feat.caption_name);
  out = replace_all(out, "{kind}", spike ? "Spike" : "Drop");
  out = replace_all(out, "{kindlc}", spike ? "spike" : "drop");
  out = replace_all(out, "{minute}", std::to_string(e.minute()));
  return out;
}

inline std::string render_activity(const ActivitySegment& a,
                                   const std::string& tmpl) {
  std::string out = tmpl;
  out = replace_all(out, "{label}", a.label);
  out = replace_all(out, "{start}", std::to_string(a.start_min));
  out = replace_all(out, "{end}", std::to_string(a.end_min));
  return out;
}

inline std::string render_mood(const MoodEntry& m, const std::string& tmpl) {
  std::string out = tmpl;
  out = replace_all(out, "{label}", m.label);
  out = replace_all(out, "{minute}", std::to_string(m.minute));
  return out;
}

// One sentence per activity and per mood entry, template chosen by rng.
inline std::vector<std::string> render_semantic(const EventLog& log,
                                                const TemplatePool& pool,
                                                Rng& rng) {
  std::vector<std::string> out;
  for (const auto& a : log.activities) {
    const auto& tmpl =
        pool.semantic_activity[rng.uniform_int(pool.semantic_activity.size())];
    out.push_back(render_activity(a, tmpl));
  }
  for (const auto& m : log.moods) {
    const auto& tmpl =
        pool.semantic_mood[rng.uniform_int(pool.semantic_mood.size())];
    out.push_back(render_mood(m, tmpl));
  }
  return out;
}

inline constexpr int kDefaultSentenceBudget = 8;

// Composes one caption for a day: collects candidate sentences for every
// enabled level, samples up to `budget` of them uniformly without
// replacement, and emits them in statistical -> structural -> semantic
// order. Deterministic under the rng seed.
inline Caption compose_caption(const SensorDay& day, const EventLog& log,
                               const CaptionVariant& variant, Rng& rng,
                               int budget = kDefaultSentenceBudget) {
  if (!variant.any()) throw std::invalid_argument("empty caption variant");
  const TemplatePool& pool = default_template_pool();
  struct Candidate {
    std::string text;
    std::optional<SourceSpan> span;
    CaptionLevel level = CaptionLevel::Statistical;
  };
  std::vector<Candidate> candidates;
  if (variant.statistical) {
    for (int c = 0; c < kNumChannels; ++c) {
      bool any_valid = false;
      for (int t = 0; t < kMinutesPerDay && !any_valid; ++t) {
        any_valid = day.valid_at(c, t) != 0;
      }
      if (!any_valid) continue;
      const auto s = summarize_channel(day, c);
      const auto& tmpl =
          pool.statistical[rng.uniform_int(pool.statistical.size())];
      candidates.push_back({render_statistical(s, tmpl), std::nullopt,
                            CaptionLevel::Statistical});
    }
  }
  if (variant.structural) {
    for (int c = 0; c < kNumChannels; ++c) {
      for (const auto& e : detect_trends(day, c)) {
        if (e.kind == TrendKind::Stable) continue;
        const auto& tmpl = pool.structural_trend[rng.uniform_int(
            pool.structural_trend.size())];
        candidates.push_back({render_trend(e, tmpl),
                              SourceSpan{e.kind, e.start_min, e.end_min},
                              CaptionLevel::Structural});
      }
      for (const auto& e : detect_spikes(day, c)) {
        const auto& tmpl = pool.structural_spike[rng.uniform_int(
            pool.structural_spike.size())];
        candidates.push_back({render_spike(e, tmpl),
                              SourceSpan{e.kind, e.minute(), e.minute()},
                              CaptionLevel::Structural});
      }
    }
  }
  if (variant.semantic) {
    for (const auto& a : log.activities) {
      const auto& tmpl = pool.semantic_activity[rng.uniform_int(
          pool.semantic_activity.size())];
      candidates.push_back({render_activity(a, tmpl),
                            SourceSpan{TrendKind::Stable, a.start_min,
                                       a.end_min},
                            CaptionLevel::Semantic});
    }
    for (const auto& m : log.moods) {
      const auto& tmpl =
          pool.semantic_mood[rng.uniform_int(pool.semantic_mood.size())];
      candidates.push_back({render_mood(m, tmpl),
                            SourceSpan{TrendKind::Stable, m.minute, m.minute},
                            CaptionLevel::Semantic});
    }
  }
  Caption caption;
  caption.levels = variant;
  if (candidates.empty()) {
    caption.text = "No recorded activities.";
    return caption;
  }
  // Stratified pick: every included level that produced candidates gets at
  // least one sentence (budget permitting), then the rest of the budget is
  // filled uniformly from the remaining candidates.
  std::vector<std::size_t> order;
  std::vector<std::uint8_t> used(candidates.size(), 0);
  for (CaptionLevel level : {CaptionLevel::Statistical,
                             CaptionLevel::Structural, CaptionLevel::Semantic}) {
    std::vector<std::size_t> level_ids;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      if (candidates[i].level == level) level_ids.push_back(i);
    }
    if (level_ids.empty()) continue;
    const std::size_t pick = level_ids[rng.uniform_int(level_ids.size())];
    order.push_back(pick);
    used[pick] = 1;
  }
  std::vector<std::size_t> rest;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (!used[i]) rest.push_back(i);
  }
  rng.shuffle(rest);
  const std::size_t take =
      std::min<std::size_t>(static_cast<std::size_t>(budget),
                            candidates.size());
  if (order.size() > take) order.resize(take);
  for (std::size_t i = 0; order.size() < take && i < rest.size(); ++i) {
    order.push_back(rest[i]);
  }
  std::sort(order.begin(), order.end());
  for (std::size_t idx : order) {
    if (!caption.text.empty()) caption.text += " ";
    caption.text += candidates[idx].text;
    if (candidates[idx].span) caption.source_spans.push_back(*candidates[idx].span);
  }
  return caption;
}

// ---- caption corpus persistence (JSONL) ----

struct CaptionRecord {
  std::uint64_t person_id = 0;
  std::uint64_t day_id = 0;
  std::string text;
  CaptionVariant variant;
};

inline void write_caption_corpus(const std::vector<CaptionRecord>& corpus,
                                 const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for write: " + path);
  for (const auto& r : corpus) {
    nlohmann::json levels = nlohmann::json::array();
    if (r.variant.statistical) levels.push_back("statistical");
    if (r.variant.structural) levels.push_back("structural");
    if (r.variant.semantic) levels.push_back("semantic");
    nlohmann::json j{{"person_id", r.person_id},
                     {"day_id", r.day_id},
                     {"text", r.text},
                     {"levels", levels},
                     {"variant", r.variant.name()}};
    os << j.dump() << "\n";
  }
}

inline std::vector<CaptionRecord> read_caption_corpus(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open for read: " + path);
  std::vector<CaptionRecord> out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line);
    CaptionRecord r;
    r.person_id = j.at("person_id").get<std::uint64_t>();
    r.day_id = j.at("day_id").get<std::uint64_t>();
    r.text = j.at("text").get<std::string>();
    r.variant = CaptionVariant::parse(j.at("variant").get<std::string>());
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace senselang
