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

// Parametric stand-ins for recorded speech, distractor speech and noise.

#ifndef BCVAD_SYNTH_HPP_
#define BCVAD_SYNTH_HPP_

#include <cmath>
#include <cstdint>
#include <string>

#include "bcvad/signal.hpp"

namespace bcvad {

enum class SynthKind { kTargetSpeech, kDistractorSpeech, kWhiteNoise, kPinkNoise, kBabble };

const char* SynthKindName(SynthKind kind);
SynthKind ParseSynthKind(const std::string& name);
bool IsSpeechKind(SynthKind kind);

struct SynthProfile {
  SynthKind kind = SynthKind::kTargetSpeech;
  double pitch_min_hz = 90.0;
  double pitch_max_hz = 180.0;
  double formant_scale = 1.0;
  double pause_density = 0.5;  // fraction of silent time
  std::uint64_t seed = 0;

  void Validate() const;
};

// A "speaker": pitch range and formant scale drawn from the seed.
SynthProfile SpeakerProfile(std::uint64_t speaker_seed, SynthKind kind,
                            double pause_density);

struct SpeechPair {
  AudioBuffer air;
  AudioBuffer bc;
};

// Second-order IIR section, transposed direct form II.
class Biquad {
 public:
  static Biquad LowPass(double cutoff_hz, double q, int sample_rate);
  static Biquad HighPass(double cutoff_hz, double q, int sample_rate);

  double Process(double x) {
    const double y = b0_ * x + z1_;
    z1_ = b1_ * x - a1_ * y + z2_;
    z2_ = b2_ * x - a2_ * y;
    // Decay through digital silence would otherwise run on subnormals.
    if (std::fabs(z1_) < 1e-30) z1_ = 0.0;
    if (std::fabs(z2_) < 1e-30) z2_ = 0.0;
    return y;
  }

 private:
  double b0_ = 1, b1_ = 0, b2_ = 0, a1_ = 0, a2_ = 0;
  double z1_ = 0, z2_ = 0;
};

// Sensor path of the bone-conduction channel: 4th-order Butterworth low-pass.
inline constexpr double kBcCutoffHz = 1000.0;
AudioBuffer BoneConductionPath(const AudioBuffer& air);

// Voiced talk spurts separated by digital silence. Deterministic per seed.
SpeechPair SynthSpeechPair(double duration_s, const SynthProfile& profile,
                           int sample_rate = kDefaultSampleRate);

// White, pink (-3 dB/octave) or babble (six summed distractor talkers).
// Output RMS is 0.1.
AudioBuffer SynthNoise(double duration_s, const SynthProfile& profile,
                       int sample_rate = kDefaultSampleRate);

}  // namespace bcvad

#endif  // BCVAD_SYNTH_HPP_
