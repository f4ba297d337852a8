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

#include "senselang/captions.hpp"

using namespace senselang;
namespace fs = std::filesystem;

TEST_CASE("format_1dp rounds half away from zero") {
  CHECK(format_1dp(88.65) == "88.7");
  CHECK(format_1dp(88.64) == "88.6");
  CHECK(format_1dp(-2.35) == "-2.4");
  CHECK(format_1dp(-0.04) == "0.0");
  CHECK(format_1dp(0.0) == "0.0");
  CHECK(format_1dp(134.9) == "134.9");
}

TEST_CASE("caption variants parse and enumerate") {
  CHECK(CaptionVariant::parse("stat").name() == "stat");
  CHECK(CaptionVariant::parse("struct+sem").name() == "struct+sem");
  CHECK(CaptionVariant::parse("sem+stat").name() == "stat+sem");  // canonical
  CHECK_THROWS_AS(CaptionVariant::parse("bogus"), std::invalid_argument);
  CHECK_THROWS_AS(CaptionVariant::parse(""), std::invalid_argument);
  auto all = all_caption_variants();
  REQUIRE(all.size() == 7);
  std::set<std::string> names;
  for (const auto& v : all) names.insert(v.name());
  CHECK(names.size() == 7);
  CHECK(names.contains("stat+struct+sem"));
}

TEST_CASE("template pool sizes are 20 statistical, 15 structural, 20 semantic") {
  const auto& pool = default_template_pool();
  CHECK(pool.statistical.size() == 20);
  CHECK(pool.structural_size() == 15);
  CHECK(pool.structural_trend.size() == 8);
  CHECK(pool.structural_spike.size() == 7);
  CHECK(pool.semantic_size() == 20);
  CHECK(pool.semantic_activity.size() == 14);
  CHECK(pool.semantic_mood.size() == 6);
}

TEST_CASE("template pool asset roundtrips") {
  const auto path =
      (fs::temp_directory_path() / "senselang_templates.txt").string();
  write_template_pool(default_template_pool(), path);
  auto pool = read_template_pool(path);
  CHECK(pool.statistical == default_template_pool().statistical);
  CHECK(pool.structural_trend == default_template_pool().structural_trend);
  CHECK(pool.structural_spike == default_template_pool().structural_spike);
  CHECK(pool.semantic_activity == default_template_pool().semantic_activity);
  CHECK(pool.semantic_mood == default_template_pool().semantic_mood);
  fs::remove(path);
}

TEST_CASE("summarize_channel matches a hand computation") {
  SensorDay day;
  std::fill(day.values.begin(), day.values.end(), 0.0f);
  std::fill(day.valid.begin(), day.valid.end(), 0);
  // Valid entries: 2, 4, 6, 12; masked 100 must not count.
  const float vals[] = {2.0f, 4.0f, 6.0f, 12.0f};
  for (int i = 0; i < 4; ++i) {
    day.at(3, i) = vals[i];
    day.valid_at(3, i) = 1;
  }
  day.at(3, 10) = 100.0f;
  auto s = summarize_channel(day, 3);
  CHECK(s.mean == Catch::Approx(6.0).epsilon(1e-12));
  CHECK(s.min == 2.0);
  CHECK(s.max == 12.0);
  // Population std of {2,4,6,12}: sqrt(mean of squared deviations).
  CHECK(s.std == Catch::Approx(std::sqrt((16.0 + 4.0 + 0.0 + 36.0) / 4.0))
                     .epsilon(1e-12));
  SensorDay none;
  std::fill(none.valid.begin(), none.valid.end(), 0);
  CHECK_THROWS_AS(summarize_channel(none, 0), std::invalid_argument);
}

TEST_CASE("trend detection classifies local ramps and merges windows") {
  // Slopes are measured in whole-channel std units, so only changes that are
  // steep relative to the day's variability register as trends: a flat day
  // with a sharp climb in the middle yields exactly one increasing event.
  SensorDay day;
  for (int t = 600; t < 720; ++t) day.at(0, t) = 1.0f * (t - 600);
  for (int t = 720; t < kMinutesPerDay; ++t) day.at(0, t) = 120.0f;
  auto events = detect_trends(day, 0);
  int increasing = 0;
  for (const auto& e : events) {
    if (e.kind == TrendKind::Increasing) {
      ++increasing;
      CHECK(e.start_min <= 600);
      CHECK(e.end_min >= 720);
    } else {
      CHECK(e.kind == TrendKind::Stable);
    }
  }
  CHECK(increasing == 1);

  // Constant series: no slope anywhere.
  SensorDay flat;
  std::fill(flat.values.begin(), flat.values.end(), 5.0f);
  auto stable = detect_trends(flat, 0);
  REQUIRE(stable.size() == 1);
  CHECK(stable[0].kind == TrendKind::Stable);
  CHECK(stable[0].start_min == 0);
  CHECK(stable[0].end_min == kMinutesPerDay);

  // Mirror image: the drop registers as one decreasing event.
  SensorDay down;
  for (int t = 0; t < 600; ++t) down.at(0, t) = 120.0f;
  for (int t = 600; t < 720; ++t) down.at(0, t) = 120.0f - 1.0f * (t - 600);
  auto dec = detect_trends(down, 0);
  int decreasing = 0;
  for (const auto& e : dec) decreasing += e.kind == TrendKind::Decreasing;
  CHECK(decreasing == 1);

  CHECK_THROWS_AS(detect_trends(day, 0, 1), std::invalid_argument);
  CHECK_THROWS_AS(detect_trends(day, 0, 60, 0), std::invalid_argument);
}

TEST_CASE("windows without enough valid points break adjacency") {
  SensorDay day;
  std::fill(day.values.begin(), day.values.end(), 5.0f);
  // Invalidate one full window-aligned span in the middle: windows inside
  // the gap are skipped, splitting the single merged stable event.
  for (int t = 700; t < 820; ++t) day.valid_at(0, t) = 0;
  auto events = detect_trends(day, 0);
  REQUIRE(events.size() == 2);
  for (const auto& e : events) CHECK(e.kind == TrendKind::Stable);
  CHECK(events[0].end_min <= 820);
  CHECK(events[1].start_min >= 700);
}

TEST_CASE("spike detection collapses runs to the extremal minute") {
  SensorDay day;
  std::fill(day.values.begin(), day.values.end(), 10.0f);
  day.at(5, 719) = 200.0f;
  day.at(5, 720) = 300.0f;
  day.at(5, 721) = 250.0f;
  auto events = detect_spikes(day, 5);
  REQUIRE(events.size() == 1);
  CHECK(events[0].kind == TrendKind::Spike);
  CHECK(events[0].minute() == 720);

  SensorDay dip;
  std::fill(dip.values.begin(), dip.values.end(), 10.0f);
  dip.at(5, 100) = -300.0f;
  auto drops = detect_spikes(dip, 5);
  REQUIRE(drops.size() == 1);
  CHECK(drops[0].kind == TrendKind::Drop);
  CHECK(drops[0].minute() == 100);

  SensorDay flat;
  std::fill(flat.values.begin(), flat.values.end(), 1.0f);
  CHECK(detect_spikes(flat, 0).empty());
  CHECK_THROWS_AS(detect_spikes(day, 5, 0.0), std::invalid_argument);
}

TEST_CASE("rendered sentences match the canonical phrasings exactly") {
  const auto& pool = default_template_pool();
  StatSummary s{0, 88.7, 9.3, 70.8, 134.9};
  CHECK(render_statistical(s, pool.statistical[0]) ==
        "The average Heart rate value is 88.7, with extremes at 134.9 (max) "
        "and 70.8 (min), and a std of 9.3.");

  TrendEvent trend{0, TrendKind::Decreasing, 680, 960};
  CHECK(render_trend(trend, pool.structural_trend[0]) ==
        "An decreasing trend in Heart rate data recorded between minute 680 "
        "and 960.");

  TrendEvent spike{10, TrendKind::Spike, 720, 720};
  CHECK(render_spike(spike, pool.structural_spike[0]) ==
        "Spike event recorded for steps at minute 720.");

  ActivitySegment bike{"Outdoor Bike", 1121, 1133};
  CHECK(render_activity(bike, pool.semantic_activity[1]) ==
        "Outdoor Bike recorded within the 1121-1133 minute range.");

  MoodEntry mood{"Tired", 300};
  CHECK(render_mood(mood, pool.semantic_mood[0]) ==
        "The user logged their mood as Tired at minute 300.");
}

TEST_CASE("compose_caption respects the sentence budget and is deterministic") {
  auto [day, log] = synthesize_day(21, {{profile_for("Walk"), 500, 580}});
  CaptionVariant stat = CaptionVariant::parse("stat");
  Rng r1(5), r2(5);
  auto c1 = compose_caption(day, log, stat, r1);
  auto c2 = compose_caption(day, log, stat, r2);
  CHECK(c1.text == c2.text);
  // 26 statistical candidates trimmed to the default budget of 8 sentences.
  std::size_t sentences = 1, pos = 0;
  while ((pos = c1.text.find(". ", pos)) != std::string::npos) {
    ++sentences;
    pos += 2;
  }
  CHECK(sentences == 8);
  CHECK(c1.source_spans.empty());  // statistics carry no span

  Rng r3(5);
  auto sem = compose_caption(day, log, CaptionVariant::parse("sem"), r3);
  CHECK(sem.text.find("Walk") != std::string::npos);
  CHECK(sem.source_spans.size() == 1);
  CHECK(sem.source_spans[0].start_min == 500);
  CHECK(sem.source_spans[0].end_min == 580);
}

TEST_CASE("caption falls back when nothing is detectable") {
  SensorDay quiet;
  std::fill(quiet.values.begin(), quiet.values.end(), 1.0f);
  EventLog empty;
  Rng rng(1);
  auto c = compose_caption(quiet, empty, CaptionVariant::parse("sem"), rng);
  CHECK(c.text == "No recorded activities.");
}

TEST_CASE("caption corpus JSONL roundtrips") {
  std::vector<CaptionRecord> corpus = {
      {1, 2, "A bout of Run was detected between minute 50 and 90.",
       CaptionVariant::parse("sem")},
      {3, 4, "Daily Heart rate statistics: mean 70.0, std 2.0, min 60.0, "
             "max 90.0.",
       CaptionVariant::parse("stat+struct")},
  };
  const auto path =
      (fs::temp_directory_path() / "senselang_captions.jsonl").string();
  write_caption_corpus(corpus, path);
  auto loaded = read_caption_corpus(path);
  REQUIRE(loaded.size() == 2);
  CHECK(loaded[0].person_id == 1);
  CHECK(loaded[0].day_id == 2);
  CHECK(loaded[0].text == corpus[0].text);
  CHECK(loaded[0].variant.name() == "sem");
  CHECK(loaded[1].variant.name() == "stat+struct");
  fs::remove(path);
}
