/* Copyright 2026 The bcvad Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "bcvad/labels.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

#include "bcvad/error.hpp"
#include "bcvad/text.hpp"

namespace bcvad {

double LabelTrack::SpeechFraction() const {
  if (values.empty()) return 0.0;
  const auto n = std::count_if(values.begin(), values.end(),
                               [](double v) { return v >= 0.5; });
  return static_cast<double>(n) / static_cast<double>(values.size());
}

LabelTrack GenerateLabels(const MagSpectrogram& clean_air, double alpha) {
  const std::size_t n = clean_air.num_frames();
  Require(n > 0, ErrorCode::kEmptyInput, "empty spectrogram");
  std::vector<double> norms(n);
  for (std::size_t t = 0; t < n; ++t) {
    double acc = 0.0;
    for (double m : clean_air.frames.row(t)) acc += m * m;
    norms[t] = std::sqrt(acc);
  }
  double mean = 0.0;
  for (double v : norms) mean += v;
  mean /= static_cast<double>(n);
  const double threshold = *std::min_element(norms.begin(), norms.end()) + alpha * mean;

  LabelTrack out;
  out.frame_hop_ms = 1000.0 * clean_air.config.hop_samples() / clean_air.config.sample_rate;
  out.values.resize(n);
  for (std::size_t t = 0; t < n; ++t) out.values[t] = norms[t] > threshold ? 1.0 : 0.0;
  return out;
}

LabelTrack SmoothLabels(const LabelTrack& labels, double window_s) {
  Require(window_s > 0.0, ErrorCode::kConfig, "smoothing window must be positive");
  Require(labels.frame_hop_ms > 0.0, ErrorCode::kConfig, "frame hop must be positive");
  const auto len = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::lround(window_s * 1000.0 / labels.frame_hop_ms)));
  LabelTrack out;
  out.frame_hop_ms = labels.frame_hop_ms;
  out.values.resize(labels.size());
  for (std::size_t t = 0; t < labels.size(); ++t) {
    const std::size_t first = t + 1 >= len ? t + 1 - len : 0;
    double acc = 0.0;
    for (std::size_t i = first; i <= t; ++i) acc += labels.values[i];
    out.values[t] = std::clamp(acc / static_cast<double>(t + 1 - first), 0.0, 1.0);
  }
  return out;
}

LabelTrack BinarizeLabels(const LabelTrack& labels, double threshold) {
  LabelTrack out;
  out.frame_hop_ms = labels.frame_hop_ms;
  out.values.resize(labels.size());
  for (std::size_t t = 0; t < labels.size(); ++t) {
    out.values[t] = labels.values[t] >= threshold ? 1.0 : 0.0;
  }
  return out;
}

void WriteLabelText(std::ostream& os, const LabelTrack& labels) {
  for (double v : labels.values) os << FormatDouble(v) << '\n';
}

LabelTrack ReadLabelText(std::istream& is, double frame_hop_ms) {
  LabelTrack out;
  out.frame_hop_ms = frame_hop_ms;
  std::string line;
  while (std::getline(is, line)) {
    const auto trimmed = Trim(line);
    if (trimmed.empty()) continue;
    const double v = ParseDouble(trimmed);
    Require(v >= 0.0 && v <= 1.0, ErrorCode::kInvalidData, "label outside [0, 1]");
    out.values.push_back(v);
  }
  return out;
}

}  // namespace bcvad
