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
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "senselang/common.hpp"
#include "senselang/features.hpp"

namespace senselang {

// One person-day of minutely wearable features plus a validity mask.
struct SensorDay {
  std::uint64_t person_id = 0;
  std::uint64_t day_id = 0;
  std::vector<float> values;   // kNumChannels * kMinutesPerDay, row-major
  std::vector<std::uint8_t> valid;  // same layout, 0/1

  SensorDay()
      : values(kNumChannels * kMinutesPerDay, 0.0f),
        valid(kNumChannels * kMinutesPerDay, 1) {}

  float& at(int c, int t) { return values[static_cast<std::size_t>(c) * kMinutesPerDay + t]; }
  float at(int c, int t) const { return values[static_cast<std::size_t>(c) * kMinutesPerDay + t]; }
  std::uint8_t& valid_at(int c, int t) { return valid[static_cast<std::size_t>(c) * kMinutesPerDay + t]; }
  std::uint8_t valid_at(int c, int t) const { return valid[static_cast<std::size_t>(c) * kMinutesPerDay + t]; }
};

struct ActivitySegment {
  std::string label;
  int start_min = 0;
  int end_min = 0;
};

struct MoodEntry {
  std::string label;
  int minute = 0;
};

struct EventLog {
  std::vector<ActivitySegment> activities;
  std::vector<MoodEntry> moods;
};

struct NormStats {
  std::vector<double> mean;  // size 26
  std::vector<double> std;   // size 26, floored at 1e-6
};

struct ChannelEffect {
  int channel = 0;
  double offset = 0.0;
  double scale = 1.0;
};

// Per-segment channel modulation applied over the diurnal baseline.
struct ActivityProfile {
  std::string label;
  std::vector<ChannelEffect> effects;
};

struct ScheduledSegment {
  ActivityProfile profile;
  int start_min = 0;
  int end_min = 0;  // inclusive
};

struct ChannelBaseline {
  double base;
  double amp;
  double sigma;
};

// Resting-state levels, diurnal swing, and per-minute noise for each channel.
inline const std::array<ChannelBaseline, kNumChannels>& channel_baselines() {
  static const std::array<ChannelBaseline, kNumChannels> kBaselines = {{
      {70.0, 8.0, 2.0},    // Heart Rate
      {3.2, 0.3, 0.1},     // Shannon Ent. RR
      {2.8, 0.3, 0.1},     // Shannon Ent. RR Diffs
      {35.0, 8.0, 3.0},    // RMSSD
      {50.0, 10.0, 4.0},   // SDNN
      {85.0, 10.0, 3.0},   // RR Percent Valid
      {950.0, 60.0, 15.0}, // RR 80th Percentile
      {750.0, 50.0, 15.0}, // RR 20th Percentile
      {850.0, 55.0, 15.0}, // RR Median
      {62.0, 4.0, 1.5},    // Heart Rate at Rest
      {5.0, 5.0, 2.0},     // Step Count
      {0.4, 0.1, 0.05},    // Jerk Autocorrelation Ratio
      {2.0, 0.5, 0.2},     // Log Energy
      {8.0, 2.0, 1.0},     // Covariance Condition
      {0.6, 0.2, 0.1},     // Log Energy Ratio
      {0.5, 0.1, 0.05},    // Zero Crossing St.Dev.
      {0.8, 0.2, 0.05},    // Zero Crossing Average
      {0.1, 0.05, 0.02},   // Axis Mean
      {3.0, 0.5, 0.3},     // Kurtosis
      {4.0, 2.0, 0.8},     // Sleep Coefficient
      {6.0, 1.5, 0.5},     // Skin Conductance Value
      {0.02, 0.01, 0.01},  // Skin Conductance Slope
      {1.0, 0.5, 0.3},     // Lead Contact Counts
      {33.0, 1.0, 0.2},    // Skin Temperature Value
      {0.01, 0.02, 0.01},  // Skin Temperature Slope
      {1.5, 0.3, 0.1},     // Altitude St.Dev. Norm
  }};
  return kBaselines;
}

// Deterministically synthesizes one labeled day: per-channel sinusoidal
// diurnal baseline plus seeded Gaussian noise, with scheduled activity
// segments shifting/scaling their channels. The event log mirrors the
// schedule exactly.
inline std::pair<SensorDay, EventLog> synthesize_day(
    std::uint64_t seed, const std::vector<ScheduledSegment>& schedule) {
  for (const auto& seg : schedule) {
    if (seg.start_min < 0 || seg.end_min >= kMinutesPerDay ||
        seg.start_min > seg.end_min) {
      throw std::invalid_argument("schedule segment out of [0,1440) range");
    }
    for (const auto& e : seg.profile.effects) {
      if (e.channel < 0 || e.channel >= kNumChannels) {
        throw std::invalid_argument("profile references channel >= 26");
      }
    }
  }
  Rng rng(mix_seed(seed, 0x5eed));
  SensorDay day;
  const auto& baselines = channel_baselines();
  // Active effect per (channel, minute): last scheduled segment wins.
  std::vector<const ChannelEffect*> effect(kNumChannels * kMinutesPerDay,
                                           nullptr);
  for (const auto& seg : schedule) {
    for (const auto& e : seg.profile.effects) {
      for (int t = seg.start_min; t <= seg.end_min; ++t) {
        effect[static_cast<std::size_t>(e.channel) * kMinutesPerDay + t] = &e;
      }
    }
  }
  for (int c = 0; c < kNumChannels; ++c) {
    const auto& b = baselines[c];
    const double phase = 2.0 * 3.14159265358979323846 * c / kNumChannels;
    for (int t = 0; t < kMinutesPerDay; ++t) {
      double v = b.base +
                 b.amp * std::sin(2.0 * 3.14159265358979323846 * t /
                                      kMinutesPerDay -
                                  phase);
      const ChannelEffect* e =
          effect[static_cast<std::size_t>(c) * kMinutesPerDay + t];
      if (e != nullptr) {
        v = v * e->scale + e->offset;
      }
      v += b.sigma * rng.gaussian();
      day.at(c, t) = static_cast<float>(v);
    }
  }
  // A few short dropout gaps per channel keep the mask realistic while
  // staying far above the 20% inclusion threshold.
  for (int c = 0; c < kNumChannels; ++c) {
    const int gaps = static_cast<int>(rng.uniform_int(3));
    for (int g = 0; g < gaps; ++g) {
      const int start = static_cast<int>(rng.uniform_int(kMinutesPerDay));
      const int len = 5 + static_cast<int>(rng.uniform_int(25));
      for (int t = start; t < std::min(start + len, kMinutesPerDay); ++t) {
        day.valid_at(c, t) = 0;
        day.at(c, t) = 0.0f;
      }
    }
  }
  EventLog log;
  for (const auto& seg : schedule) {
    log.activities.push_back({seg.profile.label, seg.start_min, seg.end_min});
  }
  return {day, log};
}

inline double validity_fraction(const SensorDay& day) {
  std::size_t n = 0;
  for (auto v : day.valid) n += v != 0;
  return static_cast<double>(n) / static_cast<double>(day.valid.size());
}

// Minimum validity fraction for a day to enter a dataset.
inline constexpr double kMinValidityFraction = 0.2;

// Per-channel mean and population std over valid entries only.
inline NormStats compute_norm_stats(const std::vector<SensorDay>& days) {
  if (days.empty()) throw std::invalid_argument("compute_norm_stats: empty");
  NormStats stats;
  stats.mean.assign(kNumChannels, 0.0);
  stats.std.assign(kNumChannels, 1e-6);
  for (int c = 0; c < kNumChannels; ++c) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& d : days) {
      for (int t = 0; t < kMinutesPerDay; ++t) {
        if (d.valid_at(c, t)) {
          sum += d.at(c, t);
          ++n;
        }
      }
    }
    const double mean = n > 0 ? sum / static_cast<double>(n) : 0.0;
    double ss = 0.0;
    for (const auto& d : days) {
      for (int t = 0; t < kMinutesPerDay; ++t) {
        if (d.valid_at(c, t)) {
          const double dv = d.at(c, t) - mean;
          ss += dv * dv;
        }
      }
    }
    stats.mean[c] = mean;
    stats.std[c] =
        std::max(n > 0 ? std::sqrt(ss / static_cast<double>(n)) : 0.0, 1e-6);
  }
  return stats;
}

// Z-scores valid entries; invalid entries become exactly 0 (zero imputation
// after normalization, so imputed values sit at the channel mean in raw
// units). The mask is preserved.
inline SensorDay normalize(const SensorDay& day, const NormStats& stats) {
  SensorDay out = day;
  for (int c = 0; c < kNumChannels; ++c) {
    for (int t = 0; t < kMinutesPerDay; ++t) {
      if (out.valid_at(c, t)) {
        out.at(c, t) = static_cast<float>(
            (static_cast<double>(out.at(c, t)) - stats.mean[c]) /
            stats.std[c]);
      } else {
        out.at(c, t) = 0.0f;
      }
    }
  }
  return out;
}

// ---- dataset persistence ----
//
// Sensor tensor file: magic "SLMD", version u16, count u32, then per day:
// ids (u64,u64), 26x1440 f32 LE row-major, packed row-major bitmask.
// Event logs: JSONL, one object per day.

inline constexpr char kDatasetMagic[4] = {'S', 'L', 'M', 'D'};
inline constexpr std::uint16_t kDatasetVersion = 1;

inline void write_sensor_file(const std::vector<SensorDay>& days,
                              const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for write: " + path);
  os.write(kDatasetMagic, 4);
  write_le<std::uint16_t>(os, kDatasetVersion);
  write_le<std::uint32_t>(os, static_cast<std::uint32_t>(days.size()));
  for (const auto& d : days) {
    write_le<std::uint64_t>(os, d.person_id);
    write_le<std::uint64_t>(os, d.day_id);
    for (float v : d.values) write_le<float>(os, v);
    const std::size_t nbits = d.valid.size();
    std::vector<std::uint8_t> packed((nbits + 7) / 8, 0);
    for (std::size_t i = 0; i < nbits; ++i) {
      if (d.valid[i]) packed[i / 8] |= static_cast<std::uint8_t>(1u << (i % 8));
    }
    os.write(reinterpret_cast<const char*>(packed.data()),
             static_cast<std::streamsize>(packed.size()));
  }
  if (!os) throw std::runtime_error("write failed: " + path);
}

inline std::vector<SensorDay> read_sensor_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open for read: " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kDatasetMagic, 4) != 0) {
    throw std::runtime_error("bad magic in sensor file: " + path);
  }
  const auto version = read_le<std::uint16_t>(is);
  if (version != kDatasetVersion) {
    throw std::runtime_error("unsupported sensor file version");
  }
  const auto count = read_le<std::uint32_t>(is);
  std::vector<SensorDay> days(count);
  for (auto& d : days) {
    d.person_id = read_le<std::uint64_t>(is);
    d.day_id = read_le<std::uint64_t>(is);
    for (float& v : d.values) v = read_le<float>(is);
    const std::size_t nbits = d.valid.size();
    std::vector<std::uint8_t> packed((nbits + 7) / 8);
    is.read(reinterpret_cast<char*>(packed.data()),
            static_cast<std::streamsize>(packed.size()));
    if (!is) throw std::runtime_error("truncated sensor file: " + path);
    for (std::size_t i = 0; i < nbits; ++i) {
      d.valid[i] = (packed[i / 8] >> (i % 8)) & 1u;
    }
  }
  return days;
}

inline nlohmann::json event_log_to_json(std::uint64_t person_id,
                                        std::uint64_t day_id,
                                        const EventLog& log) {
  nlohmann::json acts = nlohmann::json::array();
  for (const auto& a : log.activities) {
    acts.push_back({{"label", a.label}, {"start", a.start_min}, {"end", a.end_min}});
  }
  nlohmann::json moods = nlohmann::json::array();
  for (const auto& m : log.moods) {
    moods.push_back({{"label", m.label}, {"minute", m.minute}});
  }
  return nlohmann::json{{"person_id", person_id},
                        {"day_id", day_id},
                        {"activities", acts},
                        {"moods", moods}};
}

inline EventLog event_log_from_json(const nlohmann::json& j) {
  EventLog log;
  for (const auto& a : j.at("activities")) {
    log.activities.push_back({a.at("label").get<std::string>(),
                              a.at("start").get<int>(), a.at("end").get<int>()});
  }
  for (const auto& m : j.at("moods")) {
    log.moods.push_back({m.at("label").get<std::string>(), m.at("minute").get<int>()});
  }
  return log;
}

// Writes <base>.slmd and <base>.jsonl.
inline void write_dataset(const std::vector<SensorDay>& days,
                          const std::vector<EventLog>& logs,
                          const std::string& base) {
  if (days.size() != logs.size()) {
    throw std::invalid_argument("write_dataset: days/logs length mismatch");
  }
  write_sensor_file(days, base + ".slmd");
  std::ofstream os(base + ".jsonl", std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for write: " + base + ".jsonl");
  for (std::size_t i = 0; i < days.size(); ++i) {
    os << event_log_to_json(days[i].person_id, days[i].day_id, logs[i]).dump()
       << "\n";
  }
}

inline std::pair<std::vector<SensorDay>, std::vector<EventLog>> read_dataset(
    const std::string& base) {
  auto days = read_sensor_file(base + ".slmd");
  std::ifstream is(base + ".jsonl");
  if (!is) throw std::runtime_error("cannot open for read: " + base + ".jsonl");
  std::vector<EventLog> logs;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    logs.push_back(event_log_from_json(nlohmann::json::parse(line)));
  }
  if (logs.size() != days.size()) {
    throw std::runtime_error("dataset mismatch: sensor days vs event logs");
  }
  return {days, std::move(logs)};
}

// ---- built-in activity profiles ----

inline const std::map<std::string, ActivityProfile>& builtin_profiles() {
  static const std::map<std::string, ActivityProfile> kProfiles = {
      {"Run",
       {"Run",
        {{kHeartRateChannel, 70.0, 1.0},
         {kStepsChannel, 140.0, 1.0},
         {12, 3.0, 1.0},    // log energy
         {3, -20.0, 0.5},   // RMSSD down
         {19, 8.0, 1.0}}}}, // sleep coefficient up (movement range)
      {"Walk",
       {"Walk",
        {{kHeartRateChannel, 20.0, 1.0},
         {kStepsChannel, 70.0, 1.0},
         {12, 1.0, 1.0},
         {16, 0.4, 1.0}}}},
      {"Sleep",
       {"Sleep",
        {{kHeartRateChannel, -15.0, 1.0},
         {kStepsChannel, 0.0, 0.05},
         {3, 15.0, 1.0},
         {12, -1.5, 0.5},
         {23, -1.0, 1.0}}}},
      {"Outdoor Bike",
       {"Outdoor Bike",
        {{kHeartRateChannel, 45.0, 1.0},
         {kStepsChannel, 0.0, 0.3},
         {12, 2.5, 1.0},
         {25, 2.5, 1.0},    // altitude variation
         {13, 6.0, 1.0}}}},
      {"Swim",
       {"Swim",
        {{kHeartRateChannel, 40.0, 1.0},
         {kStepsChannel, 0.0, 0.1},
         {12, 2.0, 1.0},
         {23, -2.5, 1.0},   // skin temperature drop
         {20, -2.0, 1.0}}}},
      {"Yoga",
       {"Yoga",
        {{kHeartRateChannel, 8.0, 1.0},
         {kStepsChannel, 0.0, 0.2},
         {1, 0.4, 1.0},
         {3, 10.0, 1.0}}}},
  };
  return kProfiles;
}

inline const ActivityProfile& profile_for(const std::string& label) {
  const auto& profiles = builtin_profiles();
  auto it = profiles.find(label);
  if (it == profiles.end()) {
    throw std::invalid_argument("unknown activity class: " + label);
  }
  return it->second;
}

inline const std::vector<std::string>& mood_labels() {
  static const std::vector<std::string> kMoods = {"Happy", "Tired",
                                                  "Frustrated", "Calm",
                                                  "Stressed"};
  return kMoods;
}

// One main segment plus an optional short second bout of the same class,
// with an optional mood entry. Used by the data generator.
inline std::vector<ScheduledSegment> make_class_schedule(
    const std::string& label, Rng& rng) {
  const auto& profile = profile_for(label);
  std::vector<ScheduledSegment> schedule;
  const int start = 360 + static_cast<int>(rng.uniform_int(600));
  const int len = 45 + static_cast<int>(rng.uniform_int(75));
  schedule.push_back({profile, start, std::min(start + len, kMinutesPerDay - 1)});
  if (rng.uniform() < 0.3) {
    const int s2 = 1050 + static_cast<int>(rng.uniform_int(200));
    const int l2 = 20 + static_cast<int>(rng.uniform_int(30));
    schedule.push_back({profile, s2, std::min(s2 + l2, kMinutesPerDay - 1)});
  }
  return schedule;
}

}  // namespace senselang
