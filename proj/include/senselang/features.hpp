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

#include <array>
#include <string>
#include <vector>

#include "senselang/common.hpp"

namespace senselang {

enum class SensorGroup { PPG, ACC, EDA, TEMP, ALT };

inline const char* to_string(SensorGroup g) {
  switch (g) {
    case SensorGroup::PPG: return "PPG";
    case SensorGroup::ACC: return "ACC";
    case SensorGroup::EDA: return "EDA";
    case SensorGroup::TEMP: return "TEMP";
    case SensorGroup::ALT: return "ALT";
  }
  return "?";
}

struct FeatureSpec {
  int index;
  std::string name;          // registry name
  std::string caption_name;  // name as it appears in rendered sentences
  std::string unit;
  SensorGroup group;
  std::string definition;
};

// The 26 minutely-aggregated wearable channels, fixed order.
inline const std::vector<FeatureSpec>& feature_registry() {
  static const std::vector<FeatureSpec> kRegistry = {
      // PPG-derived (10)
      {0, "Heart Rate", "Heart rate", "Beats/Min", SensorGroup::PPG,
       "Mean of instantaneous heart rate."},
      {1, "Shannon Ent. RR", "Shannon entropy RR", "Nats", SensorGroup::PPG,
       "Shannon entropy of the RR intervals."},
      {2, "Shannon Ent. RR Diffs", "Shannon entropy RR diffs", "Nats",
       SensorGroup::PPG, "Shannon entropy of the RR interval differences."},
      {3, "RMSSD", "RMSSD", "Msec", SensorGroup::PPG,
       "Root mean squared st. dev. of RR intervals."},
      {4, "SDNN", "SDNN", "Msec", SensorGroup::PPG,
       "Standard deviation of RR intervals."},
      {5, "RR Percent Valid", "RR percent valid", "%", SensorGroup::PPG,
       "% of 5-minute window with valid RR intervals."},
      {6, "RR 80th Percentile", "RR 80th percentile", "Msec", SensorGroup::PPG,
       "80th percentile of 5-minute window of RR intervals."},
      {7, "RR 20th Percentile", "RR 20th percentile", "Msec", SensorGroup::PPG,
       "20th percentile of RR intervals."},
      {8, "RR Median", "RR median", "Msec", SensorGroup::PPG,
       "Median RR interval."},
      {9, "Heart Rate at Rest", "Heart rate at rest", "Beats/Min",
       SensorGroup::PPG, "Mean of heart rate at rest."},
      // Accelerometer-derived (10)
      {10, "Step Count", "steps", "Steps", SensorGroup::ACC,
       "Number of steps."},
      {11, "Jerk Autocorrelation Ratio", "jerk ratio", "a.u.",
       SensorGroup::ACC,
       "Ratio of lag=1 autocorrelation to energy in 1st 3-axis principal "
       "component."},
      {12, "Log Energy", "log energy", "a.u.", SensorGroup::ACC,
       "Log of sum of 3-axis root mean squared magnitude."},
      {13, "Covariance Condition", "covariance condition", "a.u.",
       SensorGroup::ACC,
       "Estimate of condition number for 3-axis covariance matrix."},
      {14, "Log Energy Ratio", "log energy ratio", "a.u.", SensorGroup::ACC,
       "Log of ratio of sum of energy in 1st 3-axis principal component over "
       "energy of 3-axis root mean squared magnitude."},
      {15, "Zero Crossing St.Dev.", "zero crossing std", "Seconds",
       SensorGroup::ACC,
       "Standard deviation of time between zero crossing of 1st 3-axis "
       "principal component."},
      {16, "Zero Crossing Average", "zero crossing average", "Seconds",
       SensorGroup::ACC,
       "Mean of time between zero crossing of 1st 3-axis principal "
       "component."},
      {17, "Axis Mean", "axis mean", "a.u.", SensorGroup::ACC,
       "Mean of 3-axis."},
      {18, "Kurtosis", "kurtosis", "a.u.", SensorGroup::ACC,
       "Kurtosis of 3-axis root mean squared magnitude."},
      {19, "Sleep Coefficient", "sleep coefficient", "a.u.", SensorGroup::ACC,
       "Sum of 3-axis max-min range, binned into 16 log-scaled bins."},
      // Skin conductance (3)
      {20, "Skin Conductance Value", "skin conductance", "uSiemens",
       SensorGroup::EDA, "Center of linear tonic SCL value fit."},
      {21, "Skin Conductance Slope", "skin conductance slope", "uS/Min",
       SensorGroup::EDA, "Intraminute slope of SCL values."},
      {22, "Lead Contact Counts", "lead contact counts", "Counts",
       SensorGroup::EDA,
       "Number of times leads of the sensor contacting wrist in a minute."},
      // Skin temperature (2)
      {23, "Skin Temperature Value", "skin temperature", "degC",
       SensorGroup::TEMP, "Value of skin temperature."},
      {24, "Skin Temperature Slope", "skin temperature slope", "degC/Min",
       SensorGroup::TEMP, "Slope of skin temperature."},
      // Altimeter (1)
      {25, "Altitude St.Dev. Norm", "altitude std", "Hectopascals",
       SensorGroup::ALT, "Standard deviation of altimeter readings."},
  };
  return kRegistry;
}

inline constexpr int kStepsChannel = 10;
inline constexpr int kHeartRateChannel = 0;

}  // namespace senselang
