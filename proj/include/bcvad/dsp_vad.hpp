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

// Statistical frame VAD: Gaussian likelihood-ratio test over STFT bins with a
// decision-directed a-priori SNR. The noise variance is tracked only on frames
// judged non-speech.

#ifndef BCVAD_DSP_VAD_HPP_
#define BCVAD_DSP_VAD_HPP_

#include <cmath>
#include <span>
#include <vector>

#include "bcvad/signal.hpp"

namespace bcvad {

struct DspVadParams {
  double alpha0 = 0.95;             // noise smoothing
  double beta = 0.98;               // decision-directed weight
  double eta = std::exp(0.15);      // threshold on the mean log-likelihood is ln(eta)
  int init_frames = 10;
  double eps_floor = 1e-12;
  // false reproduces the original rule that updates the noise on speech frames.
  bool update_on_silence = true;

  void Validate() const;
};

struct NoiseEstimate {
  std::vector<double> gamma_n;  // per-bin noise variance
  double alpha0 = 0.95;
  double eps_floor = 1e-12;
};

struct LrtState {
  std::vector<double> xi_prev;
  std::vector<double> gain_prev;  // gamma * xi / (1 + xi) of the previous frame
  double beta = 0.98;
  double eta = std::exp(0.15);

  static LrtState Initial(std::size_t bins, const DspVadParams& params);
};

// Mean |Y|^2 over the first init_frames frames, floored at eps_floor.
NoiseEstimate InitNoiseEstimate(const MagSpectrogram& mag, int init_frames = 10,
                                double alpha0 = 0.95, double eps_floor = 1e-12);

struct FrameDecision {
  int decision = 0;
  double score = 0.0;  // mean per-bin log-likelihood ratio
};

// Updates noise and state in place.
FrameDecision ProcessFrame(std::span<const double> frame, NoiseEstimate& noise,
                           LrtState& state, bool update_on_silence = true);

// Streaming form: emits decision 0 for the first init_frames frames while the
// noise estimate is collected, then runs ProcessFrame.
class DspVad {
 public:
  DspVad(std::size_t bins, const DspVadParams& params);

  FrameDecision Push(std::span<const double> frame);
  void Reset();

  const NoiseEstimate& noise() const { return noise_; }
  const DspVadParams& params() const { return params_; }
  bool initialized() const { return seen_ >= static_cast<std::size_t>(params_.init_frames); }

 private:
  DspVadParams params_;
  std::size_t bins_;
  std::size_t seen_ = 0;
  std::vector<double> init_acc_;
  NoiseEstimate noise_;
  LrtState state_;
};

struct DspTrack {
  std::vector<double> scores;
  std::vector<int> decisions;
  NoiseEstimate noise;  // state after the last frame
};

// One entry per input frame.
DspTrack RunDspVad(const MagSpectrogram& mag, const DspVadParams& params = {});

// Maps a score to (0, 1) so that 0.5 sits at the decision threshold.
double DspProbability(double score, const DspVadParams& params);

}  // namespace bcvad

#endif  // BCVAD_DSP_VAD_HPP_
