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

#include "bcvad/dsp_vad.hpp"

#include <algorithm>

#include "bcvad/error.hpp"

namespace bcvad {

void DspVadParams::Validate() const {
  Require(alpha0 > 0.0 && alpha0 < 1.0, ErrorCode::kConfig, "alpha0 must lie in (0, 1)");
  Require(beta >= 0.0 && beta < 1.0, ErrorCode::kConfig, "beta must lie in [0, 1)");
  Require(std::isfinite(eta) && eta > 0.0, ErrorCode::kConfig, "eta must be positive");
  Require(init_frames >= 1, ErrorCode::kConfig, "init_frames must be at least 1");
  Require(eps_floor > 0.0, ErrorCode::kConfig, "eps_floor must be positive");
}

LrtState LrtState::Initial(std::size_t bins, const DspVadParams& params) {
  LrtState s;
  s.xi_prev.assign(bins, 0.0);
  s.gain_prev.assign(bins, 0.0);
  s.beta = params.beta;
  s.eta = params.eta;
  return s;
}

NoiseEstimate InitNoiseEstimate(const MagSpectrogram& mag, int init_frames, double alpha0,
                                double eps_floor) {
  Require(init_frames >= 1, ErrorCode::kConfig, "init_frames must be at least 1");
  Require(mag.num_frames() >= static_cast<std::size_t>(init_frames),
          ErrorCode::kInsufficientData, "fewer frames than init_frames");
  NoiseEstimate est;
  est.alpha0 = alpha0;
  est.eps_floor = eps_floor;
  est.gamma_n.assign(mag.frames.cols, 0.0);
  for (int t = 0; t < init_frames; ++t) {
    const auto row = mag.frames.row(static_cast<std::size_t>(t));
    for (std::size_t k = 0; k < row.size(); ++k) est.gamma_n[k] += row[k] * row[k];
  }
  for (double& g : est.gamma_n) g = std::max(g / init_frames, eps_floor);
  return est;
}

FrameDecision ProcessFrame(std::span<const double> frame, NoiseEstimate& noise,
                           LrtState& state, bool update_on_silence) {
  const std::size_t bins = noise.gamma_n.size();
  Require(frame.size() == bins && state.xi_prev.size() == bins &&
              state.gain_prev.size() == bins,
          ErrorCode::kConfig, "frame dimension does not match the noise estimate");
  double sum = 0.0;
  for (std::size_t k = 0; k < bins; ++k) {
    const double power = frame[k] * frame[k];
    const double gamma = power / noise.gamma_n[k];
    const double xi = state.beta * state.gain_prev[k] +
                      (1.0 - state.beta) * std::max(gamma - 1.0, 0.0);
    sum += gamma * xi / (1.0 + xi) - std::log1p(xi);
    state.xi_prev[k] = xi;
    state.gain_prev[k] = gamma * xi / (1.0 + xi);
  }
  FrameDecision out;
  out.score = bins > 0 ? sum / static_cast<double>(bins) : 0.0;
  out.decision = out.score > std::log(state.eta) ? 1 : 0;

  const bool update = update_on_silence ? out.decision == 0 : out.decision == 1;
  if (update) {
    for (std::size_t k = 0; k < bins; ++k) {
      const double power = frame[k] * frame[k];
      noise.gamma_n[k] = std::max(
          noise.alpha0 * noise.gamma_n[k] + (1.0 - noise.alpha0) * power, noise.eps_floor);
    }
  }
  return out;
}

DspVad::DspVad(std::size_t bins, const DspVadParams& params)
    : params_(params), bins_(bins) {
  params_.Validate();
  Reset();
}

void DspVad::Reset() {
  seen_ = 0;
  init_acc_.assign(bins_, 0.0);
  noise_ = NoiseEstimate{std::vector<double>(bins_, params_.eps_floor), params_.alpha0,
                         params_.eps_floor};
  state_ = LrtState::Initial(bins_, params_);
}

FrameDecision DspVad::Push(std::span<const double> frame) {
  Require(frame.size() == bins_, ErrorCode::kConfig,
          "frame dimension does not match the detector");
  const auto init = static_cast<std::size_t>(params_.init_frames);
  if (seen_ < init) {
    for (std::size_t k = 0; k < bins_; ++k) init_acc_[k] += frame[k] * frame[k];
    ++seen_;
    if (seen_ == init) {
      for (std::size_t k = 0; k < bins_; ++k) {
        noise_.gamma_n[k] = std::max(init_acc_[k] / static_cast<double>(init), params_.eps_floor);
      }
    }
    return {};
  }
  ++seen_;
  return ProcessFrame(frame, noise_, state_, params_.update_on_silence);
}

DspTrack RunDspVad(const MagSpectrogram& mag, const DspVadParams& params) {
  Require(mag.num_frames() > 0, ErrorCode::kEmptyInput, "empty spectrogram");
  Require(mag.num_frames() >= static_cast<std::size_t>(params.init_frames),
          ErrorCode::kInsufficientData, "fewer frames than init_frames");
  DspVad vad(mag.frames.cols, params);
  DspTrack track;
  track.scores.reserve(mag.num_frames());
  track.decisions.reserve(mag.num_frames());
  for (std::size_t t = 0; t < mag.num_frames(); ++t) {
    const auto d = vad.Push(mag.frames.row(t));
    track.scores.push_back(d.score);
    track.decisions.push_back(d.decision);
  }
  track.noise = vad.noise();
  return track;
}

double DspProbability(double score, const DspVadParams& params) {
  return 1.0 / (1.0 + std::exp(-(score - std::log(params.eta))));
}

}  // namespace bcvad
