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

// Time-frequency front end: framing, padded FFT magnitudes, Mel filterbank,
// log-Mel features, level measurement and SNR-controlled mixing.

#ifndef BCVAD_SIGNAL_HPP_
#define BCVAD_SIGNAL_HPP_

#include <complex>
#include <cstdint>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace bcvad {

inline constexpr int kDefaultSampleRate = 16000;

struct AudioBuffer {
  std::vector<double> samples;
  int sample_rate = kDefaultSampleRate;

  std::size_t size() const { return samples.size(); }
  double duration_s() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
};

// Throws kInvalidData on a non-positive rate or a non-finite sample.
void ValidateAudio(const AudioBuffer& audio);

// Dense row-major matrix; rows are time frames.
struct FrameMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  FrameMatrix() = default;
  FrameMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c) {}

  std::span<double> row(std::size_t i) { return {data.data() + i * cols, cols}; }
  std::span<const double> row(std::size_t i) const {
    return {data.data() + i * cols, cols};
  }
  double& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

struct SpectrogramConfig {
  int sample_rate = kDefaultSampleRate;
  double frame_len_ms = 20.0;
  double hop_fraction = 0.5;
  int fft_size = 512;
  std::string window = "hann";  // periodic Hann; "rect" also accepted

  int frame_samples() const;
  int hop_samples() const;
  int num_bins() const { return fft_size / 2 + 1; }
  // Throws kConfig when fft_size is not a power of two, is smaller than a
  // frame, or the hop fraction is outside (0, 1].
  void Validate() const;
  // floor((n - frame) / hop) + 1, or 0 when n < frame.
  std::size_t NumFrames(std::size_t num_samples) const;
};

std::vector<double> MakeWindow(const SpectrogramConfig& cfg);

// In-place iterative radix-2 FFT. Size must be a power of two.
void Fft(std::span<std::complex<double>> data);

// Computes |FFT| of one frame. Reusable across frames of one config; holds
// only scratch space, so one instance per thread.
class FrameAnalyzer {
 public:
  explicit FrameAnalyzer(const SpectrogramConfig& cfg);

  const SpectrogramConfig& config() const { return cfg_; }
  const std::vector<double>& window() const { return window_; }

  // frame.size() == frame_samples(); out.size() == num_bins().
  void Magnitude(std::span<const double> frame, std::span<double> out);

 private:
  SpectrogramConfig cfg_;
  std::vector<double> window_;
  std::vector<std::complex<double>> scratch_;
};

struct MagSpectrogram {
  FrameMatrix frames;  // T x (fft_size/2 + 1)
  SpectrogramConfig config;

  std::size_t num_frames() const { return frames.rows; }
};

MagSpectrogram StftMagnitude(const AudioBuffer& audio,
                             const SpectrogramConfig& cfg = {});

double HzToMel(double hz);
double MelToHz(double mel);

struct MelFilterBank {
  int n_mels = 0;
  double f_min = 0.0;
  double f_max = 0.0;
  int fft_size = 0;
  int sample_rate = 0;
  FrameMatrix weights;             // n_mels x (fft_size/2 + 1)
  std::vector<double> center_hz;   // peak frequency of each filter
};

MelFilterBank MakeMelFilterBank(int sample_rate, int fft_size, int n_mels,
                                double f_min, double f_max);

inline constexpr double kLogMelFloor = 1e-10;

struct LogMelFrames {
  FrameMatrix frames;  // T x n_mels
};

// out[j] = ln(max(sum_k w[j,k] * mag[k], 1e-10))
void LogMelFrame(std::span<const double> mag, const MelFilterBank& bank,
                 std::span<double> out);
LogMelFrames LogMelFeatures(const MagSpectrogram& mag, const MelFilterBank& bank);

// Feature presets. BC: 32 bins over 50-2000 Hz; AIR: 64 bins over 150-5000 Hz.
struct FeatureConfig {
  SpectrogramConfig stft;
  int n_mels = 32;
  double f_min = 50.0;
  double f_max = 2000.0;

  static FeatureConfig Bc();
  static FeatureConfig Air();
  MelFilterBank MakeBank() const;
  // Stable identifier of all fields, used to tag feature files.
  std::string Describe() const;
  std::uint64_t Hash() const;
};

inline constexpr double kSilenceDbfs = -120.0;

double RmsDbfs(const AudioBuffer& audio);

struct RescaleResult {
  AudioBuffer audio;
  double gain = 1.0;
  bool peak_limited = false;
};

// Scales to the target RMS level. When that would push a sample above full
// scale, the gain is reduced so the peak sits at 1.0 and peak_limited is set.
RescaleResult RescaleToDbfs(const AudioBuffer& audio, double target_dbfs);

// Mean power over frames whose label is >= 0.5. Frame n covers samples
// [n * hop, n * hop + frame).
double ActiveSpeechPower(const AudioBuffer& speech, std::span<const double> labels,
                         const SpectrogramConfig& cfg = {});

struct MixResult {
  AudioBuffer mixture;
  double noise_gain = 0.0;
};

// mixture = speech + g * noise with 10 log10(Ps / (g^2 Pn)) = snr_db.
MixResult MixAtSnr(const AudioBuffer& speech, std::span<const double> speech_labels,
                   const AudioBuffer& noise, double snr_db,
                   const SpectrogramConfig& cfg = {});

}  // namespace bcvad

#endif  // BCVAD_SIGNAL_HPP_
