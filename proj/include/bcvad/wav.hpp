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

#ifndef BCVAD_WAV_HPP_
#define BCVAD_WAV_HPP_

#include <string>

#include "bcvad/signal.hpp"

namespace bcvad {

// Reads 16-bit PCM mono RIFF/WAVE. Any other encoding, channel count, or a
// sample rate other than 16 kHz is rejected with kFormat; no resampling is
// attempted.
AudioBuffer ReadWav(const std::string& path);

// Writes 16-bit PCM mono; samples are clipped to [-1, 1] and rounded.
void WriteWav(const std::string& path, const AudioBuffer& audio);

}  // namespace bcvad

#endif  // BCVAD_WAV_HPP_
