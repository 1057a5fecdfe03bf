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

#include "bcvad/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "bcvad/error.hpp"
#include "bcvad/rng.hpp"

namespace bcvad {
namespace {

constexpr double kPi = std::numbers::pi;

struct Vowel {
  double f1, f2, f3;
};

// Average adult formant frequencies.
constexpr std::array<Vowel, 8> kVowels{{{730, 1090, 2440},
                                        {270, 2290, 3010},
                                        {300, 870, 2240},
                                        {530, 1840, 2480},
                                        {570, 840, 2410},
                                        {660, 1720, 2410},
                                        {490, 1350, 1690},
                                        {440, 1020, 2240}}};
constexpr std::array<double, 3> kBandwidthsHz{90.0, 110.0, 170.0};

// Unity-DC-gain two-pole resonator.
class Resonator {
 public:
  void Tune(double freq_hz, double bw_hz, int sample_rate) {
    const double r = std::exp(-kPi * bw_hz / sample_rate);
    a1_ = 2.0 * r * std::cos(2.0 * kPi * freq_hz / sample_rate);
    a2_ = -r * r;
    g_ = 1.0 - a1_ - a2_;
  }
  double Process(double x) {
    const double y = g_ * x + a1_ * y1_ + a2_ * y2_;
    y2_ = y1_;
    y1_ = y;
    return y;
  }

 private:
  double a1_ = 0, a2_ = 0, g_ = 1, y1_ = 0, y2_ = 0;
};

// Rosenberg glottal flow over one period, phase in [0, 1).
double GlottalFlow(double phase) {
  constexpr double kOpen = 0.4, kClose = 0.16;
  if (phase < kOpen) return 0.5 * (1.0 - std::cos(kPi * phase / kOpen));
  if (phase < kOpen + kClose) return std::cos(0.5 * kPi * (phase - kOpen) / kClose);
  return 0.0;
}

void NormalizeRms(std::vector<double>& x, double target_rms) {
  double acc = 0.0;
  for (double v : x) acc += v * v;
  if (acc <= 0.0) return;
  const double g = target_rms / std::sqrt(acc / static_cast<double>(x.size()));
  for (double& v : x) v *= g;
}

struct Spurt {
  std::size_t begin, end;  // samples
};

std::vector<Spurt> PlanSpurts(std::size_t n, double pause_density, int sample_rate,
                              Rng& rng) {
  std::vector<Spurt> spurts;
  if (pause_density >= 1.0) return spurts;
  constexpr double kMeanSpurtS = 1.4;
  const double mean_pause_s = kMeanSpurtS * pause_density / (1.0 - pause_density);
  double t = pause_density > 0.0 ? rng.Uniform(0.0, 1.0) * mean_pause_s : 0.0;
  const double total = static_cast<double>(n) / sample_rate;
  while (t < total) {
    const double len = rng.Uniform(0.5, 2.3);
    const auto b = static_cast<std::size_t>(t * sample_rate);
    const auto e = std::min(n, static_cast<std::size_t>((t + len) * sample_rate));
    if (e > b) spurts.push_back({b, e});
    t += len;
    if (pause_density > 0.0) t += mean_pause_s * rng.Uniform(0.5, 1.5);
  }
  return spurts;
}

}  // namespace

const char* SynthKindName(SynthKind kind) {
  switch (kind) {
    case SynthKind::kTargetSpeech: return "target_speech";
    case SynthKind::kDistractorSpeech: return "distractor_speech";
    case SynthKind::kWhiteNoise: return "white";
    case SynthKind::kPinkNoise: return "pink";
    case SynthKind::kBabble: return "babble";
  }
  return "?";
}

SynthKind ParseSynthKind(const std::string& name) {
  for (auto k : {SynthKind::kTargetSpeech, SynthKind::kDistractorSpeech,
                 SynthKind::kWhiteNoise, SynthKind::kPinkNoise, SynthKind::kBabble}) {
    if (name == SynthKindName(k)) return k;
  }
  if (name == "distractor") return SynthKind::kDistractorSpeech;
  Fail(ErrorCode::kConfig, "unknown signal kind '" + name + "'");
}

bool IsSpeechKind(SynthKind kind) {
  return kind == SynthKind::kTargetSpeech || kind == SynthKind::kDistractorSpeech;
}

void SynthProfile::Validate() const {
  Require(pitch_min_hz >= 60.0 && pitch_max_hz <= 400.0 && pitch_min_hz <= pitch_max_hz,
          ErrorCode::kConfig, "pitch range must lie within [60, 400] Hz");
  Require(pause_density >= 0.0 && pause_density <= 1.0, ErrorCode::kConfig,
          "pause density must lie in [0, 1]");
  Require(formant_scale > 0.5 && formant_scale < 2.0, ErrorCode::kConfig,
          "formant scale out of range");
}

SynthProfile SpeakerProfile(std::uint64_t speaker_seed, SynthKind kind,
                            double pause_density) {
  Rng rng(DeriveSeed(speaker_seed, "speaker"));
  SynthProfile p;
  p.kind = kind;
  p.pause_density = pause_density;
  p.seed = speaker_seed;
  const bool low_voice = rng.Uniform() < 0.5;
  const double center = low_voice ? rng.Uniform(85.0, 155.0) : rng.Uniform(165.0, 255.0);
  p.pitch_min_hz = std::max(60.0, center * 0.8);
  p.pitch_max_hz = std::min(400.0, center * 1.25);
  p.formant_scale = low_voice ? rng.Uniform(0.95, 1.05) : rng.Uniform(1.08, 1.2);
  return p;
}

Biquad Biquad::LowPass(double cutoff_hz, double q, int sample_rate) {
  const double w0 = 2.0 * kPi * cutoff_hz / sample_rate;
  const double alpha = std::sin(w0) / (2.0 * q);
  const double cw = std::cos(w0);
  const double a0 = 1.0 + alpha;
  Biquad f;
  f.b0_ = (1.0 - cw) / 2.0 / a0;
  f.b1_ = (1.0 - cw) / a0;
  f.b2_ = f.b0_;
  f.a1_ = -2.0 * cw / a0;
  f.a2_ = (1.0 - alpha) / a0;
  return f;
}

Biquad Biquad::HighPass(double cutoff_hz, double q, int sample_rate) {
  const double w0 = 2.0 * kPi * cutoff_hz / sample_rate;
  const double alpha = std::sin(w0) / (2.0 * q);
  const double cw = std::cos(w0);
  const double a0 = 1.0 + alpha;
  Biquad f;
  f.b0_ = (1.0 + cw) / 2.0 / a0;
  f.b1_ = -(1.0 + cw) / a0;
  f.b2_ = f.b0_;
  f.a1_ = -2.0 * cw / a0;
  f.a2_ = (1.0 - alpha) / a0;
  return f;
}

AudioBuffer BoneConductionPath(const AudioBuffer& air) {
  // Butterworth pole pair Qs for order 4.
  Biquad s1 = Biquad::LowPass(kBcCutoffHz, 0.54119610, air.sample_rate);
  Biquad s2 = Biquad::LowPass(kBcCutoffHz, 1.30656296, air.sample_rate);
  AudioBuffer bc;
  bc.sample_rate = air.sample_rate;
  bc.samples.resize(air.size());
  for (std::size_t i = 0; i < air.size(); ++i) {
    bc.samples[i] = s2.Process(s1.Process(air.samples[i]));
  }
  return bc;
}

SpeechPair SynthSpeechPair(double duration_s, const SynthProfile& profile,
                           int sample_rate) {
  Require(duration_s > 0.0, ErrorCode::kConfig, "duration must be positive");
  Require(IsSpeechKind(profile.kind), ErrorCode::kConfig,
          std::string("not a speech kind: ") + SynthKindName(profile.kind));
  profile.Validate();
  const auto n = static_cast<std::size_t>(std::llround(duration_s * sample_rate));
  Rng rng(DeriveSeed(profile.seed, "speech"));

  std::vector<double> air(n, 0.0);
  const auto spurts = PlanSpurts(n, profile.pause_density, sample_rate, rng);
  constexpr std::size_t kCoefBlock = 16;
  const auto fade = static_cast<std::size_t>(0.025 * sample_rate);

  for (const auto& sp : spurts) {
    const std::size_t len = sp.end - sp.begin;
    // Syllable layout within the spurt.
    std::vector<std::size_t> bounds{0};
    while (bounds.back() < len) {
      bounds.push_back(std::min(len, bounds.back() + static_cast<std::size_t>(
                                                         rng.Uniform(0.12, 0.32) * sample_rate)));
    }
    const std::size_t n_syl = bounds.size() - 1;
    std::vector<Vowel> targets(n_syl);
    std::vector<double> amps(n_syl), jitter(n_syl + 1);
    for (std::size_t s = 0; s < n_syl; ++s) {
      const Vowel& v = kVowels[rng.Index(kVowels.size())];
      targets[s] = {v.f1 * profile.formant_scale, v.f2 * profile.formant_scale,
                    v.f3 * profile.formant_scale};
      amps[s] = rng.Uniform(0.6, 1.0);
    }
    for (double& j : jitter) j = 1.0 + 0.08 * (2.0 * rng.Uniform() - 1.0);
    const double base = rng.Uniform(profile.pitch_min_hz, profile.pitch_max_hz);

    std::array<Resonator, 3> formants;
    std::array<double, 3> cur{targets[0].f1, targets[0].f2, targets[0].f3};
    const double smooth = 1.0 - std::exp(-static_cast<double>(kCoefBlock) / (0.02 * sample_rate));
    double phase = rng.Uniform();
    double prev_flow = GlottalFlow(phase);
    std::size_t syl = 0;
    for (std::size_t i = 0; i < len; ++i) {
      while (i >= bounds[syl + 1]) ++syl;
      const double u = static_cast<double>(i - bounds[syl]) /
                       static_cast<double>(bounds[syl + 1] - bounds[syl]);
      if (i % kCoefBlock == 0) {
        const Vowel& tg = targets[syl];
        cur[0] += smooth * (tg.f1 - cur[0]);
        cur[1] += smooth * (tg.f2 - cur[1]);
        cur[2] += smooth * (tg.f3 - cur[2]);
        for (int f = 0; f < 3; ++f) formants[f].Tune(cur[f], kBandwidthsHz[f], sample_rate);
      }
      const double pos = static_cast<double>(i) / static_cast<double>(len);
      const double jit = jitter[syl] + (jitter[syl + 1] - jitter[syl]) * u;
      const double f0 = std::clamp(base * (1.1 - 0.2 * pos) * jit, 60.0, 400.0);
      phase += f0 / sample_rate;
      if (phase >= 1.0) phase -= 1.0;
      const double flow = GlottalFlow(phase);
      double x = (flow - prev_flow) + 0.01 * rng.Normal();
      prev_flow = flow;
      for (auto& r : formants) x = r.Process(x);

      double env = amps[syl] * (0.3 + 0.7 * std::pow(std::sin(kPi * u), 0.6));
      if (i < fade) env *= 0.5 - 0.5 * std::cos(kPi * static_cast<double>(i) / fade);
      if (len - i <= fade) env *= 0.5 - 0.5 * std::cos(kPi * static_cast<double>(len - i) / fade);
      air[sp.begin + i] = x * env;
    }
  }

  // Fixed active level of about -26 dBFS RMS.
  double acc = 0.0;
  std::size_t active = 0;
  for (const auto& sp : spurts) {
    for (std::size_t i = sp.begin; i < sp.end; ++i) acc += air[i] * air[i];
    active += sp.end - sp.begin;
  }
  if (acc > 0.0) {
    const double g = 0.05 / std::sqrt(acc / static_cast<double>(active));
    for (double& v : air) v *= g;
  }

  SpeechPair out;
  out.air.sample_rate = sample_rate;
  out.air.samples = std::move(air);
  out.bc = BoneConductionPath(out.air);
  return out;
}

AudioBuffer SynthNoise(double duration_s, const SynthProfile& profile, int sample_rate) {
  Require(duration_s > 0.0, ErrorCode::kConfig, "duration must be positive");
  const auto n = static_cast<std::size_t>(std::llround(duration_s * sample_rate));
  AudioBuffer out;
  out.sample_rate = sample_rate;
  out.samples.assign(n, 0.0);
  Rng rng(DeriveSeed(profile.seed, SynthKindName(profile.kind)));

  switch (profile.kind) {
    case SynthKind::kWhiteNoise:
      for (double& v : out.samples) v = rng.Normal();
      break;
    case SynthKind::kPinkNoise: {
      // Kellet's refined pinking filter.
      double b0 = 0, b1 = 0, b2 = 0, b3 = 0, b4 = 0, b5 = 0, b6 = 0;
      for (double& v : out.samples) {
        const double w = rng.Normal();
        b0 = 0.99886 * b0 + w * 0.0555179;
        b1 = 0.99332 * b1 + w * 0.0750759;
        b2 = 0.96900 * b2 + w * 0.1538520;
        b3 = 0.86650 * b3 + w * 0.3104856;
        b4 = 0.55000 * b4 + w * 0.5329522;
        b5 = -0.7616 * b5 - w * 0.0168980;
        v = b0 + b1 + b2 + b3 + b4 + b5 + b6 + w * 0.5362;
        b6 = w * 0.115926;
      }
      break;
    }
    case SynthKind::kBabble: {
      constexpr int kTalkers = 6;
      for (int t = 0; t < kTalkers; ++t) {
        const auto talker = SpeakerProfile(DeriveSeed(profile.seed, "babble", t),
                                           SynthKind::kDistractorSpeech, 0.1);
        auto voice = SynthSpeechPair(duration_s, talker, sample_rate).air.samples;
        NormalizeRms(voice, 1.0);
        for (std::size_t i = 0; i < n; ++i) out.samples[i] += voice[i];
      }
      break;
    }
    case SynthKind::kTargetSpeech:
    case SynthKind::kDistractorSpeech:
      out.samples = SynthSpeechPair(duration_s, profile, sample_rate).air.samples;
      break;
  }
  NormalizeRms(out.samples, 0.1);
  return out;
}

}  // namespace bcvad
