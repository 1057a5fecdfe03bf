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

// Per-frame VAD targets from clean air-conduction speech.

#ifndef BCVAD_LABELS_HPP_
#define BCVAD_LABELS_HPP_

#include <iosfwd>
#include <string>
#include <vector>

#include "bcvad/signal.hpp"

namespace bcvad {

struct LabelTrack {
  std::vector<double> values;
  double frame_hop_ms = 10.0;

  std::size_t size() const { return values.size(); }
  double SpeechFraction() const;  // fraction of values >= 0.5
};

inline constexpr double kDefaultLabelAlpha = 0.3;
inline constexpr double kDefaultSmoothingS = 0.2;

// Frame n is speech iff ||S(n)|| > min_n ||S(n)|| + alpha * mean_n ||S(n)||.
LabelTrack GenerateLabels(const MagSpectrogram& clean_air,
                          double alpha = kDefaultLabelAlpha);

// Causal moving average over L = round(window_s / hop) frames. Frames before
// L - 1 average the history that exists.
LabelTrack SmoothLabels(const LabelTrack& labels, double window_s = kDefaultSmoothingS);

// 1 where value >= threshold.
LabelTrack BinarizeLabels(const LabelTrack& labels, double threshold = 0.5);

// One value per line, locale-independent.
void WriteLabelText(std::ostream& os, const LabelTrack& labels);
LabelTrack ReadLabelText(std::istream& is, double frame_hop_ms = 10.0);

}  // namespace bcvad

#endif  // BCVAD_LABELS_HPP_
