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
#include <numbers>
#include <numeric>
#include <vector>

#include "bcvad/error.hpp"
#include "bcvad/signal.hpp"
#include "bcvad/synth.hpp"

namespace bcvad {
namespace {

// Welch-style band power: mean periodogram over Hann-windowed 512-sample
// segments with 50% overlap, summed over [lo, hi) Hz.
double BandPower(const AudioBuffer& a, double lo, double hi) {
  SpectrogramConfig cfg;
  cfg.frame_len_ms = 32.0;
  const auto mag = StftMagnitude(a, cfg);
  double p = 0;
  for (std::size_t t = 0; t < mag.num_frames(); ++t) {
    for (int k = 0; k < cfg.num_bins(); ++k) {
      const double f = k * 16000.0 / 512;
      if (f >= lo && f < hi) p += mag.frames.at(t, k) * mag.frames.at(t, k);
    }
  }
  return p / mag.num_frames();
}

SynthProfile Profile(SynthKind kind, std::uint64_t seed) {
  SynthProfile p;
  p.kind = kind;
  p.seed = seed;
  return p;
}

TEST(SynthSpeech, LengthAndDeterminism) {
  const auto p = SpeakerProfile(77, SynthKind::kTargetSpeech, 0.4);
  const auto a = SynthSpeechPair(30.0, p);
  EXPECT_EQ(a.air.size(), 480000u);
  EXPECT_EQ(a.bc.size(), 480000u);
  const auto b = SynthSpeechPair(30.0, p);
  EXPECT_EQ(a.air.samples, b.air.samples);
  EXPECT_EQ(a.bc.samples, b.bc.samples);
  auto q = p;
  q.seed ^= 1;
  EXPECT_NE(SynthSpeechPair(30.0, q).air.samples, a.air.samples);
}

TEST(SynthSpeech, BoneChannelAttenuatesAbove2k) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto pair = SynthSpeechPair(10.0, SpeakerProfile(seed, SynthKind::kTargetSpeech, 0.3));
    const double air = BandPower(pair.air, 2000.0, 8000.1);
    const double bc = BandPower(pair.bc, 2000.0, 8000.1);
    EXPECT_LE(10 * std::log10(bc / air), -20.0) << seed;
  }
}

TEST(SynthSpeech, PausesAreSilent) {
  SynthProfile p = SpeakerProfile(5, SynthKind::kTargetSpeech, 0.6);
  const auto pair = SynthSpeechPair(20.0, p);
  std::size_t zeros = 0;
  for (double v : pair.air.samples) zeros += v == 0.0;
  const double frac = double(zeros) / pair.air.size();
  EXPECT_GT(frac, 0.35);
  EXPECT_LT(frac, 0.85);
}

TEST(SynthSpeech, RejectsBadProfiles) {
  EXPECT_THROW(SynthSpeechPair(1.0, Profile(SynthKind::kWhiteNoise, 1)), Error);
  EXPECT_THROW(SynthSpeechPair(0.0, Profile(SynthKind::kTargetSpeech, 1)), Error);
  SynthProfile p;
  p.pitch_min_hz = 40;
  EXPECT_THROW(p.Validate(), Error);
  p = {};
  p.pause_density = 1.5;
  EXPECT_THROW(p.Validate(), Error);
}

TEST(SynthSpeech, SpeakerPitchWithinLimits) {
  for (std::uint64_t s = 0; s < 200; ++s) {
    const auto p = SpeakerProfile(s, SynthKind::kTargetSpeech, 0.5);
    EXPECT_GE(p.pitch_min_hz, 60.0);
    EXPECT_LE(p.pitch_max_hz, 400.0);
    EXPECT_LT(p.pitch_min_hz, p.pitch_max_hz);
  }
}

TEST(SynthNoise, WhiteIsFlatInOctaves) {
  const auto n = SynthNoise(30.0, Profile(SynthKind::kWhiteNoise, 3));
  std::vector<double> db;
  for (double lo = 250; lo < 8000; lo *= 2) {
    // Power density per Hz, so octaves of different width compare.
    db.push_back(10 * std::log10(BandPower(n, lo, 2 * lo) / lo));
  }
  const double mean = std::accumulate(db.begin(), db.end(), 0.0) / db.size();
  for (double v : db) EXPECT_NEAR(v, mean, 1.5);
}

TEST(SynthNoise, PinkSlopesThreeDbPerOctave) {
  const auto n = SynthNoise(30.0, Profile(SynthKind::kPinkNoise, 4));
  std::vector<double> x, y;
  for (double lo = 125; lo < 8000; lo *= 2) {
    x.push_back(std::log2(lo));
    y.push_back(10 * std::log10(BandPower(n, lo, 2 * lo) / lo));
  }
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / x.size();
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / y.size();
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  EXPECT_NEAR(sxy / sxx, -3.0, 1.0);
}

TEST(SynthNoise, DeterministicAndScaled) {
  for (auto kind : {SynthKind::kWhiteNoise, SynthKind::kPinkNoise, SynthKind::kBabble}) {
    const auto a = SynthNoise(3.0, Profile(kind, 9));
    const auto b = SynthNoise(3.0, Profile(kind, 9));
    EXPECT_EQ(a.samples, b.samples);
    EXPECT_EQ(a.size(), 48000u);
    EXPECT_NEAR(RmsDbfs(a), -20.0, 1e-6) << SynthKindName(kind);
  }
}

TEST(SynthNoise, BabbleHasNoLongPauses) {
  // Six overlapping talkers: the summed signal is rarely silent.
  const auto b = SynthNoise(10.0, Profile(SynthKind::kBabble, 2));
  std::size_t zeros = 0;
  for (double v : b.samples) zeros += v == 0.0;
  EXPECT_LT(double(zeros) / b.size(), 0.05);
}

TEST(SynthKinds, NamesRoundTrip) {
  for (auto k : {SynthKind::kTargetSpeech, SynthKind::kDistractorSpeech, SynthKind::kWhiteNoise,
                 SynthKind::kPinkNoise, SynthKind::kBabble}) {
    EXPECT_EQ(ParseSynthKind(SynthKindName(k)), k);
  }
  EXPECT_THROW(ParseSynthKind("brown"), Error);
}

}  // namespace
}  // namespace bcvad
