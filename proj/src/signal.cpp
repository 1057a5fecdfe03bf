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

#include "bcvad/signal.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <sstream>

#include "bcvad/error.hpp"
#include "bcvad/text.hpp"

namespace bcvad {

const char* ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kConfig: return "configuration error";
    case ErrorCode::kEmptyInput: return "empty input";
    case ErrorCode::kInvalidData: return "invalid data";
    case ErrorCode::kInsufficientData: return "insufficient data";
    case ErrorCode::kUndefined: return "undefined quantity";
    case ErrorCode::kAssembly: return "assembly failure";
    case ErrorCode::kInvalidModel: return "invalid model";
    case ErrorCode::kData: return "data error";
    case ErrorCode::kFormat: return "format error";
    case ErrorCode::kIo: return "i/o error";
  }
  return "error";
}

void ValidateAudio(const AudioBuffer& audio) {
  Require(audio.sample_rate > 0, ErrorCode::kInvalidData,
          "sample rate must be positive");
  for (double s : audio.samples) {
    Require(std::isfinite(s), ErrorCode::kInvalidData, "non-finite sample");
  }
}

int SpectrogramConfig::frame_samples() const {
  return static_cast<int>(std::lround(frame_len_ms * sample_rate / 1000.0));
}

int SpectrogramConfig::hop_samples() const {
  return std::max(1, static_cast<int>(std::lround(frame_samples() * hop_fraction)));
}

void SpectrogramConfig::Validate() const {
  Require(sample_rate > 0, ErrorCode::kConfig, "sample rate must be positive");
  Require(hop_fraction > 0.0 && hop_fraction <= 1.0, ErrorCode::kConfig,
          "hop fraction must lie in (0, 1]");
  Require(frame_samples() >= 1, ErrorCode::kConfig, "frame length too short");
  Require(fft_size > 0 && std::has_single_bit(static_cast<unsigned>(fft_size)),
          ErrorCode::kConfig, "fft size must be a power of two");
  Require(fft_size >= frame_samples(), ErrorCode::kConfig,
          "fft size smaller than the frame");
  Require(window == "hann" || window == "rect", ErrorCode::kConfig,
          "unknown window '" + window + "'");
}

std::size_t SpectrogramConfig::NumFrames(std::size_t num_samples) const {
  const auto frame = static_cast<std::size_t>(frame_samples());
  if (num_samples < frame) return 0;
  return (num_samples - frame) / static_cast<std::size_t>(hop_samples()) + 1;
}

std::vector<double> MakeWindow(const SpectrogramConfig& cfg) {
  const int n = cfg.frame_samples();
  std::vector<double> w(n, 1.0);
  if (cfg.window == "hann") {
    for (int i = 0; i < n; ++i) {
      w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / n);
    }
  }
  return w;
}

void Fft(std::span<std::complex<double>> data) {
  const std::size_t n = data.size();
  Require(std::has_single_bit(n), ErrorCode::kConfig, "fft size must be 2^k");
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(data[i], data[j]);
  }
  // Plain real arithmetic; std::complex multiplication goes through the
  // Annex G NaN handling.
  auto* d = reinterpret_cast<double*>(data.data());
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * std::numbers::pi / static_cast<double>(len);
    const double wr_step = std::cos(ang), wi_step = std::sin(ang);
    const std::size_t half = len / 2;
    for (std::size_t i = 0; i < n; i += len) {
      double wr = 1.0, wi = 0.0;
      for (std::size_t k = 0; k < half; ++k) {
        double* a = d + 2 * (i + k);
        double* b = d + 2 * (i + k + half);
        const double vr = b[0] * wr - b[1] * wi;
        const double vi = b[0] * wi + b[1] * wr;
        b[0] = a[0] - vr;
        b[1] = a[1] - vi;
        a[0] += vr;
        a[1] += vi;
        const double t = wr * wr_step - wi * wi_step;
        wi = wr * wi_step + wi * wr_step;
        wr = t;
      }
    }
  }
}

FrameAnalyzer::FrameAnalyzer(const SpectrogramConfig& cfg)
    : cfg_(cfg), window_(MakeWindow(cfg)), scratch_(cfg.fft_size) {
  cfg_.Validate();
}

void FrameAnalyzer::Magnitude(std::span<const double> frame, std::span<double> out) {
  Require(frame.size() == window_.size(), ErrorCode::kConfig, "frame size mismatch");
  Require(out.size() == static_cast<std::size_t>(cfg_.num_bins()),
          ErrorCode::kConfig, "output size mismatch");
  std::fill(scratch_.begin(), scratch_.end(), std::complex<double>{});
  for (std::size_t i = 0; i < frame.size(); ++i) {
    scratch_[i] = frame[i] * window_[i];
  }
  Fft(scratch_);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = std::abs(scratch_[k]);
}

MagSpectrogram StftMagnitude(const AudioBuffer& audio, const SpectrogramConfig& cfg) {
  cfg.Validate();
  Require(audio.sample_rate == cfg.sample_rate, ErrorCode::kConfig,
          "audio sample rate does not match the spectrogram config");
  ValidateAudio(audio);
  const std::size_t num_frames = cfg.NumFrames(audio.size());
  Require(num_frames > 0, ErrorCode::kEmptyInput, "audio shorter than one frame");

  MagSpectrogram out;
  out.config = cfg;
  out.frames = FrameMatrix(num_frames, cfg.num_bins());
  FrameAnalyzer analyzer(cfg);
  const std::size_t hop = cfg.hop_samples();
  const std::size_t frame = cfg.frame_samples();
  std::span<const double> all(audio.samples);
  for (std::size_t t = 0; t < num_frames; ++t) {
    analyzer.Magnitude(all.subspan(t * hop, frame), out.frames.row(t));
  }
  return out;
}

double HzToMel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double MelToHz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

MelFilterBank MakeMelFilterBank(int sample_rate, int fft_size, int n_mels,
                                double f_min, double f_max) {
  Require(sample_rate > 0 && fft_size > 0, ErrorCode::kConfig,
          "sample rate and fft size must be positive");
  Require(n_mels >= 1, ErrorCode::kConfig, "need at least one mel filter");
  Require(f_min >= 0.0 && f_min < f_max && f_max <= sample_rate / 2.0,
          ErrorCode::kConfig, "invalid mel band edges");

  MelFilterBank bank;
  bank.n_mels = n_mels;
  bank.f_min = f_min;
  bank.f_max = f_max;
  bank.fft_size = fft_size;
  bank.sample_rate = sample_rate;
  const int bins = fft_size / 2 + 1;
  bank.weights = FrameMatrix(n_mels, bins);

  const double mel_lo = HzToMel(f_min);
  const double mel_hi = HzToMel(f_max);
  std::vector<double> edges(n_mels + 2);
  for (int i = 0; i < n_mels + 2; ++i) {
    edges[i] = MelToHz(mel_lo + (mel_hi - mel_lo) * i / (n_mels + 1));
  }
  edges.front() = f_min;
  edges.back() = f_max;
  bank.center_hz.assign(edges.begin() + 1, edges.end() - 1);

  const double bin_hz = static_cast<double>(sample_rate) / fft_size;
  for (int j = 0; j < n_mels; ++j) {
    const double left = edges[j], center = edges[j + 1], right = edges[j + 2];
    for (int k = 0; k < bins; ++k) {
      const double f = k * bin_hz;
      double w = 0.0;
      if (f > left && f <= center) {
        w = (f - left) / (center - left);
      } else if (f > center && f < right) {
        w = (right - f) / (right - center);
      }
      bank.weights.at(j, k) = w;
    }
  }
  return bank;
}

void LogMelFrame(std::span<const double> mag, const MelFilterBank& bank,
                 std::span<double> out) {
  Require(mag.size() == bank.weights.cols, ErrorCode::kConfig,
          "spectrum size does not match the filterbank");
  Require(out.size() == static_cast<std::size_t>(bank.n_mels), ErrorCode::kConfig,
          "output size does not match the filterbank");
  for (int j = 0; j < bank.n_mels; ++j) {
    const auto w = bank.weights.row(j);
    double acc = 0.0;
    for (std::size_t k = 0; k < mag.size(); ++k) acc += w[k] * mag[k];
    out[j] = std::log(std::max(acc, kLogMelFloor));
  }
}

LogMelFrames LogMelFeatures(const MagSpectrogram& mag, const MelFilterBank& bank) {
  Require(mag.config.fft_size == bank.fft_size, ErrorCode::kConfig,
          "filterbank fft size does not match the spectrogram");
  LogMelFrames out;
  out.frames = FrameMatrix(mag.num_frames(), bank.n_mels);
  for (std::size_t t = 0; t < mag.num_frames(); ++t) {
    LogMelFrame(mag.frames.row(t), bank, out.frames.row(t));
  }
  return out;
}

FeatureConfig FeatureConfig::Bc() { return FeatureConfig{}; }

FeatureConfig FeatureConfig::Air() {
  FeatureConfig cfg;
  cfg.n_mels = 64;
  cfg.f_min = 150.0;
  cfg.f_max = 5000.0;
  return cfg;
}

MelFilterBank FeatureConfig::MakeBank() const {
  return MakeMelFilterBank(stft.sample_rate, stft.fft_size, n_mels, f_min, f_max);
}

std::string FeatureConfig::Describe() const {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << "sr=" << stft.sample_rate << ";frame_ms=" << stft.frame_len_ms
     << ";hop=" << stft.hop_fraction << ";fft=" << stft.fft_size
     << ";win=" << stft.window << ";mels=" << n_mels << ";fmin=" << f_min
     << ";fmax=" << f_max;
  return os.str();
}

std::uint64_t FeatureConfig::Hash() const { return Fnv1a64(Describe()); }

namespace {

double MeanSquare(std::span<const double> x) {
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return x.empty() ? 0.0 : acc / static_cast<double>(x.size());
}

}  // namespace

double RmsDbfs(const AudioBuffer& audio) {
  Require(!audio.samples.empty(), ErrorCode::kEmptyInput, "empty audio buffer");
  const double ms = MeanSquare(audio.samples);
  if (ms <= 0.0) return kSilenceDbfs;
  return std::max(kSilenceDbfs, 10.0 * std::log10(ms));
}

RescaleResult RescaleToDbfs(const AudioBuffer& audio, double target_dbfs) {
  Require(!audio.samples.empty(), ErrorCode::kEmptyInput, "empty audio buffer");
  const double ms = MeanSquare(audio.samples);
  Require(ms > 0.0, ErrorCode::kUndefined, "cannot rescale silent audio");
  Require(std::isfinite(target_dbfs), ErrorCode::kConfig, "non-finite target level");

  RescaleResult res;
  res.gain = std::pow(10.0, target_dbfs / 20.0) / std::sqrt(ms);
  double peak = 0.0;
  for (double s : audio.samples) peak = std::max(peak, std::abs(s));
  if (peak * res.gain > 1.0) {
    res.gain = 1.0 / peak;
    res.peak_limited = true;
  }
  res.audio.sample_rate = audio.sample_rate;
  res.audio.samples.resize(audio.size());
  for (std::size_t i = 0; i < audio.size(); ++i) {
    res.audio.samples[i] = audio.samples[i] * res.gain;
  }
  return res;
}

double ActiveSpeechPower(const AudioBuffer& speech, std::span<const double> labels,
                         const SpectrogramConfig& cfg) {
  const std::size_t num_frames = cfg.NumFrames(speech.size());
  Require(labels.size() == num_frames, ErrorCode::kConfig,
          "label track length does not match the frame count");
  const std::size_t hop = cfg.hop_samples();
  const std::size_t frame = cfg.frame_samples();
  std::span<const double> all(speech.samples);
  double acc = 0.0;
  std::size_t active = 0;
  for (std::size_t t = 0; t < num_frames; ++t) {
    if (labels[t] < 0.5) continue;
    acc += MeanSquare(all.subspan(t * hop, frame));
    ++active;
  }
  Require(active > 0, ErrorCode::kUndefined, "SNR undefined: no active speech frames");
  return acc / static_cast<double>(active);
}

MixResult MixAtSnr(const AudioBuffer& speech, std::span<const double> speech_labels,
                   const AudioBuffer& noise, double snr_db,
                   const SpectrogramConfig& cfg) {
  Require(speech.size() == noise.size(), ErrorCode::kConfig,
          "speech and noise lengths differ");
  Require(speech.sample_rate == noise.sample_rate, ErrorCode::kConfig,
          "speech and noise sample rates differ");
  Require(std::isfinite(snr_db), ErrorCode::kConfig, "non-finite SNR");
  const double ps = ActiveSpeechPower(speech, speech_labels, cfg);
  const double pn = MeanSquare(noise.samples);
  Require(pn > 0.0, ErrorCode::kUndefined, "SNR undefined: silent noise");

  MixResult res;
  res.noise_gain = std::sqrt(ps / (pn * std::pow(10.0, snr_db / 10.0)));
  res.mixture.sample_rate = speech.sample_rate;
  res.mixture.samples.resize(speech.size());
  for (std::size_t i = 0; i < speech.size(); ++i) {
    res.mixture.samples[i] = speech.samples[i] + res.noise_gain * noise.samples[i];
  }
  return res;
}

}  // namespace bcvad
