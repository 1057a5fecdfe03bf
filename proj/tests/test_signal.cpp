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

#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "bcvad/error.hpp"
#include "bcvad/rng.hpp"
#include "bcvad/signal.hpp"

namespace bcvad {
namespace {

constexpr double kPi = std::numbers::pi;

AudioBuffer Sine(double hz, double amp, std::size_t n, int sr = 16000) {
  AudioBuffer a;
  a.sample_rate = sr;
  a.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) a.samples[i] = amp * std::sin(2 * kPi * hz * i / sr);
  return a;
}

// Direct O(N^2) DFT magnitude of one windowed, zero-padded frame.
std::vector<double> DftMagnitude(std::span<const double> frame, std::span<const double> window,
                                 int fft) {
  std::vector<double> out(fft / 2 + 1);
  for (int k = 0; k <= fft / 2; ++k) {
    std::complex<double> acc;
    for (std::size_t n = 0; n < frame.size(); ++n) {
      acc += frame[n] * window[n] * std::polar(1.0, -2 * kPi * k * double(n) / fft);
    }
    out[k] = std::abs(acc);
  }
  return out;
}

TEST(Spectrogram, FrameGeometry) {
  SpectrogramConfig cfg;
  EXPECT_EQ(cfg.frame_samples(), 320);
  EXPECT_EQ(cfg.hop_samples(), 160);
  EXPECT_EQ(cfg.num_bins(), 257);
  EXPECT_EQ(cfg.NumFrames(16000), 99u);
  EXPECT_EQ(cfg.NumFrames(480000), 2999u);
  EXPECT_EQ(cfg.NumFrames(319), 0u);
  EXPECT_EQ(cfg.NumFrames(320), 1u);
}

TEST(Spectrogram, FrameCountFormulaOverRandomLengths) {
  Rng rng(11);
  SpectrogramConfig cfg;
  FrameAnalyzer unused(cfg);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 320 + rng.Index(5000);
    AudioBuffer a;
    a.samples.assign(n, 0.01);
    const auto mag = StftMagnitude(a, cfg);
    EXPECT_EQ(mag.num_frames(), (n - 320) / 160 + 1) << n;
  }
}

TEST(Spectrogram, InvalidConfigRejected) {
  SpectrogramConfig cfg;
  cfg.fft_size = 500;
  EXPECT_THROW(cfg.Validate(), Error);
  cfg.fft_size = 256;  // smaller than a 320-sample frame
  EXPECT_THROW(cfg.Validate(), Error);
  cfg = {};
  cfg.hop_fraction = 0.0;
  EXPECT_THROW(cfg.Validate(), Error);
  cfg.hop_fraction = 1.5;
  EXPECT_THROW(cfg.Validate(), Error);
}

TEST(Spectrogram, PeriodicHannWindow) {
  const auto w = MakeWindow(SpectrogramConfig{});
  ASSERT_EQ(w.size(), 320u);
  for (std::size_t n = 0; n < w.size(); ++n) {
    EXPECT_NEAR(w[n], 0.5 - 0.5 * std::cos(2 * kPi * n / 320.0), 1e-15);
  }
  EXPECT_EQ(w[0], 0.0);
  EXPECT_NEAR(w[160], 1.0, 1e-15);
}

TEST(Spectrogram, FftMatchesDirectDft) {
  Rng rng(3);
  for (int size : {1, 2, 8, 64, 512}) {
    std::vector<std::complex<double>> x(size), ref(size);
    for (auto& v : x) v = {rng.Normal(), rng.Normal()};
    for (int k = 0; k < size; ++k) {
      for (int n = 0; n < size; ++n) ref[k] += x[n] * std::polar(1.0, -2 * kPi * k * n / size);
    }
    Fft(x);
    for (int k = 0; k < size; ++k) EXPECT_LT(std::abs(x[k] - ref[k]), 1e-9 * size) << size;
  }
  std::vector<std::complex<double>> bad(6);
  EXPECT_THROW(Fft(bad), Error);
}

TEST(Spectrogram, ZeroFrameGivesZeroMagnitudes) {
  AudioBuffer a;
  a.samples.assign(320, 0.0);
  const auto mag = StftMagnitude(a);
  ASSERT_EQ(mag.num_frames(), 1u);
  for (double v : mag.frames.row(0)) EXPECT_EQ(v, 0.0);
}

TEST(Spectrogram, KiloHertzToneAtBin32) {
  const auto a = Sine(1000.0, 1.0, 16000);
  const auto mag = StftMagnitude(a);
  ASSERT_EQ(mag.num_frames(), 99u);
  for (std::size_t t = 0; t < mag.num_frames(); ++t) {
    const auto row = mag.frames.row(t);
    EXPECT_EQ(std::max_element(row.begin(), row.end()) - row.begin(), 32);
  }
  // Frame 5 against the direct DFT.
  const auto w = MakeWindow(SpectrogramConfig{});
  const auto ref = DftMagnitude(std::span(a.samples).subspan(5 * 160, 320), w, 512);
  for (int k = 0; k < 257; ++k) EXPECT_NEAR(mag.frames.at(5, k), ref[k], 1e-9);
}

TEST(Spectrogram, DcResponseIsWindowSum) {
  AudioBuffer a;
  a.samples.assign(640, 0.5);
  const auto mag = StftMagnitude(a);
  const auto w = MakeWindow(SpectrogramConfig{});
  double sum = 0;
  for (double v : w) sum += v;
  EXPECT_NEAR(mag.frames.at(0, 0), 0.5 * sum, 1e-9);
}

TEST(Spectrogram, Homogeneous) {
  Rng rng(5);
  AudioBuffer a;
  a.samples.resize(4000);
  for (double& v : a.samples) v = 0.3 * rng.Normal();
  AudioBuffer b = a;
  for (double& v : b.samples) v *= 2.5;
  const auto ma = StftMagnitude(a), mb = StftMagnitude(b);
  for (std::size_t i = 0; i < ma.frames.data.size(); ++i) {
    EXPECT_NEAR(mb.frames.data[i], 2.5 * ma.frames.data[i], 1e-9 * (1 + mb.frames.data[i]));
  }
}

TEST(Spectrogram, InputErrors) {
  AudioBuffer short_audio;
  short_audio.samples.assign(100, 0.0);
  try {
    StftMagnitude(short_audio);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyInput);
  }
  AudioBuffer nan_audio;
  nan_audio.samples.assign(400, 0.0);
  nan_audio.samples[7] = std::nan("");
  try {
    StftMagnitude(nan_audio);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidData);
  }
}

TEST(Mel, HtkScale) {
  EXPECT_NEAR(HzToMel(700.0), 2595.0 * std::log10(2.0), 1e-9);
  EXPECT_NEAR(HzToMel(700.0), 781.17, 0.01);
  EXPECT_EQ(HzToMel(0.0), 0.0);
  for (double f : {50.0, 440.0, 2000.0, 7999.0}) EXPECT_NEAR(MelToHz(HzToMel(f)), f, 1e-9);
}

TEST(Mel, SingleFilter) {
  const auto bank = MakeMelFilterBank(16000, 512, 1, 50.0, 2000.0);
  ASSERT_EQ(bank.weights.rows, 1u);
  const double center = MelToHz(0.5 * (HzToMel(50.0) + HzToMel(2000.0)));
  EXPECT_NEAR(bank.center_hz[0], center, 1e-9);
  for (int k = 0; k < 257; ++k) {
    const double f = k * 16000.0 / 512;
    const double w = bank.weights.at(0, k);
    if (f <= 50.0 || f >= 2000.0) {
      EXPECT_EQ(w, 0.0) << f;
    } else {
      const double expect = f <= center ? (f - 50.0) / (center - 50.0)
                                        : (2000.0 - f) / (2000.0 - center);
      EXPECT_NEAR(w, expect, 1e-12) << f;
    }
  }
}

TEST(Mel, BcBankShapeAndSupport) {
  const auto bank = FeatureConfig::Bc().MakeBank();
  ASSERT_EQ(bank.weights.rows, 32u);
  ASSERT_EQ(bank.weights.cols, 257u);
  double prev_center = 0;
  for (std::size_t j = 0; j < 32; ++j) {
    EXPECT_GT(bank.center_hz[j], prev_center);
    prev_center = bank.center_hz[j];
    int first = -1, last = -1;
    for (int k = 0; k < 257; ++k) {
      const double w = bank.weights.at(j, k);
      EXPECT_GE(w, 0.0);
      EXPECT_LE(w, 1.0);
      if (w > 0) {
        if (first < 0) first = k;
        last = k;
      }
    }
    ASSERT_GE(first, 0) << "empty filter " << j;
    for (int k = first; k <= last; ++k) EXPECT_GT(bank.weights.at(j, k), 0.0) << j;
    EXPECT_GE(first * 31.25, 50.0);
    EXPECT_LE(last * 31.25, 2000.0);
  }
}

TEST(Mel, InvalidBandRejected) {
  EXPECT_THROW(MakeMelFilterBank(16000, 512, 32, 2000.0, 50.0), Error);
  EXPECT_THROW(MakeMelFilterBank(16000, 512, 32, 50.0, 9000.0), Error);
  EXPECT_THROW(MakeMelFilterBank(16000, 512, 0, 50.0, 2000.0), Error);
}

TEST(Mel, ToneAtCenterPeaksAtItsFilter) {
  // Needs filters wider than one FFT bin. The lowest BC and AIR filters are
  // narrower than the 31.25 Hz spacing of a 512-point grid, so the property
  // is checked on a 4096-point grid, and on 512 points for the filters whose
  // neighbours sit at least one bin away.
  for (int fft : {512, 4096}) {
    for (const auto& fcfg : {FeatureConfig::Bc(), FeatureConfig::Air()}) {
      const auto bank = MakeMelFilterBank(16000, fft, fcfg.n_mels, fcfg.f_min, fcfg.f_max);
      const double bin_hz = 16000.0 / fft;
      int checked = 0;
      for (int j = 0; j < fcfg.n_mels; ++j) {
        const double lo = j == 0 ? fcfg.f_min : bank.center_hz[j - 1];
        const double hi = j + 1 == fcfg.n_mels ? fcfg.f_max : bank.center_hz[j + 1];
        if (bank.center_hz[j] - lo < bin_hz || hi - bank.center_hz[j] < bin_hz) continue;
        const auto tone = Sine(bank.center_hz[j], 0.5, 2048);
        SpectrogramConfig cfg;
        cfg.fft_size = fft;
        const auto mag = StftMagnitude(tone, cfg);
        std::vector<double> e(fcfg.n_mels);
        LogMelFrame(mag.frames.row(1), bank, e);
        EXPECT_EQ(std::max_element(e.begin(), e.end()) - e.begin(), j) << fft << " " << j;
        ++checked;
      }
      if (fft == 4096) EXPECT_EQ(checked, fcfg.n_mels);
    }
  }
}

TEST(LogMel, FloorAndWidths) {
  for (const auto& fcfg : {FeatureConfig::Bc(), FeatureConfig::Air()}) {
    const auto bank = fcfg.MakeBank();
    AudioBuffer a;
    a.samples.assign(800, 0.0);
    const auto feats = LogMelFeatures(StftMagnitude(a), bank);
    ASSERT_EQ(feats.frames.cols, static_cast<std::size_t>(fcfg.n_mels));
    ASSERT_EQ(feats.frames.rows, 4u);
    for (double v : feats.frames.data) EXPECT_DOUBLE_EQ(v, std::log(1e-10));
  }
  EXPECT_EQ(FeatureConfig::Bc().n_mels, 32);
  EXPECT_EQ(FeatureConfig::Air().n_mels, 64);
  EXPECT_EQ(FeatureConfig::Air().f_min, 150.0);
  EXPECT_EQ(FeatureConfig::Air().f_max, 5000.0);
}

TEST(LogMel, MatchesWeightedSum) {
  const auto bank = FeatureConfig::Bc().MakeBank();
  const auto mag = StftMagnitude(Sine(300.0, 0.2, 1600));
  const auto feats = LogMelFeatures(mag, bank);
  for (std::size_t t = 0; t < mag.num_frames(); ++t) {
    for (int j = 0; j < 32; ++j) {
      double acc = 0;
      for (int k = 0; k < 257; ++k) acc += bank.weights.at(j, k) * mag.frames.at(t, k);
      EXPECT_NEAR(feats.frames.at(t, j), std::log(std::max(acc, 1e-10)), 1e-12);
    }
  }
  std::vector<double> wrong(100), out(32);
  EXPECT_THROW(LogMelFrame(wrong, bank, out), Error);
}

TEST(Level, Dbfs) {
  AudioBuffer sq;
  for (int i = 0; i < 1000; ++i) sq.samples.push_back(i % 2 ? 1.0 : -1.0);
  EXPECT_NEAR(RmsDbfs(sq), 0.0, 1e-12);
  EXPECT_NEAR(RmsDbfs(Sine(1000.0, 1.0, 16000)), -3.0103, 1e-3);
  AudioBuffer zero;
  zero.samples.assign(100, 0.0);
  EXPECT_EQ(RmsDbfs(zero), -120.0);
  EXPECT_THROW(RmsDbfs(AudioBuffer{}), Error);
}

TEST(Level, Rescale) {
  const auto s = Sine(1000.0, 1.0, 16000);
  const auto r = RescaleToDbfs(s, -28.0);
  EXPECT_NEAR(r.gain, std::pow(10.0, (-28.0 + 3.0103) / 20.0), 1e-4);
  EXPECT_NEAR(r.gain, 0.0563, 1e-4);
  EXPECT_NEAR(RmsDbfs(r.audio), -28.0, 1e-6);
  EXPECT_FALSE(r.peak_limited);

  const auto q = Sine(440.0, 0.1, 8000);
  const auto same = RescaleToDbfs(q, RmsDbfs(q));
  for (std::size_t i = 0; i < q.size(); ++i) EXPECT_NEAR(same.audio.samples[i], q.samples[i], 1e-9);

  // -1 dBFS on a sine would need a peak of about 1.26.
  const auto lim = RescaleToDbfs(q, -1.0);
  EXPECT_TRUE(lim.peak_limited);
  double peak = 0;
  for (double v : lim.audio.samples) peak = std::max(peak, std::abs(v));
  EXPECT_NEAR(peak, 1.0, 1e-12);

  AudioBuffer zero;
  zero.samples.assign(100, 0.0);
  EXPECT_THROW(RescaleToDbfs(zero, -20.0), Error);
}

TEST(Mix, GainFromPowers) {
  AudioBuffer speech, noise;
  Rng rng(9);
  for (int i = 0; i < 3200; ++i) {
    speech.samples.push_back(i % 2 ? 0.2 : -0.2);
    noise.samples.push_back(i % 2 ? 0.2 : -0.2);
  }
  const SpectrogramConfig cfg;
  std::vector<double> labels(cfg.NumFrames(3200), 1.0);
  EXPECT_NEAR(MixAtSnr(speech, labels, noise, 0.0).noise_gain, 1.0, 1e-12);
  for (double& v : noise.samples) v *= 0.5;  // Ps = 4 Pn
  EXPECT_NEAR(MixAtSnr(speech, labels, noise, 0.0).noise_gain, 2.0, 1e-12);
}

TEST(Mix, AchievesRequestedSnr) {
  Rng rng(21);
  const SpectrogramConfig cfg;
  for (int trial = 0; trial < 10; ++trial) {
    AudioBuffer speech, noise;
    const std::size_t n = 16000;
    speech.samples.assign(n, 0.0);
    noise.samples.resize(n);
    std::vector<double> labels(cfg.NumFrames(n), 0.0);
    for (std::size_t t = 30; t < 60; ++t) labels[t] = 1.0;
    for (std::size_t i = 30 * 160; i < 59 * 160 + 320; ++i) speech.samples[i] = 0.1 * rng.Normal();
    for (double& v : noise.samples) v = 0.05 * rng.Normal();
    const double snr = rng.Uniform(-10, 20);
    const auto mix = MixAtSnr(speech, labels, noise, snr);
    AudioBuffer scaled = noise;
    for (double& v : scaled.samples) v *= mix.noise_gain;
    double pn = 0;
    for (double v : scaled.samples) pn += v * v;
    pn /= n;
    const double measured = 10 * std::log10(ActiveSpeechPower(speech, labels) / pn);
    EXPECT_NEAR(measured, snr, 1e-6);
    for (std::size_t i = 0; i < n; ++i) {
      EXPECT_DOUBLE_EQ(mix.mixture.samples[i], speech.samples[i] + scaled.samples[i]);
    }
  }
}

TEST(Mix, Errors) {
  AudioBuffer speech, noise;
  speech.samples.assign(1600, 0.1);
  noise.samples.assign(1600, 0.1);
  std::vector<double> none(SpectrogramConfig{}.NumFrames(1600), 0.0);
  try {
    MixAtSnr(speech, none, noise, 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUndefined);
  }
  std::vector<double> all(none.size(), 1.0);
  noise.samples.resize(1000);
  try {
    MixAtSnr(speech, all, noise, 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kConfig);
  }
}

}  // namespace
}  // namespace bcvad
