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

// Command implementations behind the command-line tool. Each command reads a
// flat key-value config and writes text lines to a sink.

#ifndef BCVAD_PIPELINE_HPP_
#define BCVAD_PIPELINE_HPP_

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "bcvad/dsp_vad.hpp"
#include "bcvad/text.hpp"

namespace bcvad {

enum class Channel { kResult, kInfo };
using LineSink = std::function<void(Channel, std::string_view)>;

// Keys: corpus config keys, seed, out.
void CmdSynth(const KeyValueConfig& cfg, const LineSink& sink);
// Keys: corpus, out, seed, arch, steps_per_epoch, max_epochs, batch_size, lr,
// lr_halving_patience, early_stop_patience.
void CmdTrain(const KeyValueConfig& cfg, const LineSink& sink);
// Keys: model, out.
void CmdQuantize(const KeyValueConfig& cfg, const LineSink& sink);
// DSP-VAD parameters from keys alpha0, beta, eta, init_frames, eps_floor.
DspVadParams DspParamsFromConfig(const KeyValueConfig& cfg);

// Keys: corpus, out, detectors, model, model_int8, snr_list, noise_types, threads,
// plus the DSP keys.
void CmdEval(const KeyValueConfig& cfg, const LineSink& sink);
// Keys: input, detector, model, plus the DSP keys.
void CmdStream(const KeyValueConfig& cfg, const LineSink& sink);
// Keys: model, model_int8, frames, seed.
void CmdBench(const KeyValueConfig& cfg, const LineSink& sink);

// Dispatches on synth, train, quantize, eval, stream, bench.
void RunCommand(const std::string& name, const KeyValueConfig& cfg, const LineSink& sink);
const std::vector<std::string>& CommandNames();

// Per-frame latency summary in milliseconds.
struct LatencyStats {
  std::size_t frames = 0;
  double mean_ms = 0.0;
  double p50_ms = 0.0;
  double p95_ms = 0.0;
  double max_ms = 0.0;
};
LatencyStats SummarizeLatency(std::vector<double> samples_ms);

}  // namespace bcvad

#endif  // BCVAD_PIPELINE_HPP_
