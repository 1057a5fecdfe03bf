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

// Causal detectors over streamed audio, and the noise/SNR evaluation sweep.

#ifndef BCVAD_EVALUATE_HPP_
#define BCVAD_EVALUATE_HPP_

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "bcvad/dataset.hpp"
#include "bcvad/dsp_vad.hpp"
#include "bcvad/metrics.hpp"
#include "bcvad/model.hpp"
#include "bcvad/signal.hpp"

namespace bcvad {

struct DetectorOutput {
  double probability = 0.0;
  int decision = 0;
};

// Consumes one magnitude frame (fft_size/2 + 1 bins) at a time.
class Detector {
 public:
  virtual ~Detector() = default;
  virtual const std::string& name() const = 0;
  virtual DetectorOutput Push(std::span<const double> magnitude) = 0;
  virtual void Reset() = 0;
  // Fresh detector with the same configuration and reset state.
  virtual std::unique_ptr<Detector> Clone() const = 0;
};

// Log-mel features from the preset matching the model's input size; features
// are rounded to float32 as in the stored corpus.
std::unique_ptr<Detector> MakeNeuralDetector(std::shared_ptr<const ModelWeights> model,
                                             std::string name);
std::unique_ptr<Detector> MakeDspDetector(const DspVadParams& params, std::string name = "dsp");

// Feature preset for a model: BC for 32 inputs, AIR for 64.
FeatureConfig FeaturesForModel(const ArchSpec& arch);

struct FrameResult {
  std::size_t index = 0;
  double time_ms = 0.0;  // frame start
  double probability = 0.0;
  int decision = 0;
};

// Frames a sample stream and runs a detector on each completed frame.
class StreamingVad {
 public:
  explicit StreamingVad(std::unique_ptr<Detector> detector, const SpectrogramConfig& cfg = {});

  // Appends results for every frame completed by these samples.
  void Push(std::span<const double> samples, std::vector<FrameResult>& out);
  void Reset();
  std::size_t frames_emitted() const { return next_index_; }
  Detector& detector() { return *detector_; }

 private:
  std::unique_ptr<Detector> detector_;
  SpectrogramConfig cfg_;
  FrameAnalyzer analyzer_;
  std::vector<double> pending_;
  std::vector<double> mag_;
  std::size_t next_index_ = 0;
};

// Per-frame probabilities of a whole buffer, from a reset detector.
std::vector<DetectorOutput> RunDetector(Detector& detector, const AudioBuffer& audio);

struct EvalPlan {
  std::vector<double> snr_db{-5.0, 0.0, 5.0, 10.0, 15.0};
  std::vector<std::string> noise_types{"white", "pink", "babble", "clean"};
  int threads = 1;
};

// Remixes every test clip of the manifest for each (noise, SNR) condition,
// pools frames across clips and scores against binarized smoothed labels.
// Rows follow the plan order; "clean" gets a single row without SNR.
std::vector<EvalReport> EvaluateDetectors(std::span<const Detector* const> detectors,
                                          const ClipManifest& manifest,
                                          const CorpusConfig& config, const EvalPlan& plan = {});

// The mixture one test clip is scored on, plus its metric truth.
struct EvalSignal {
  AudioBuffer audio;
  std::vector<int> truth;
};
EvalSignal MakeEvalSignal(const ClipEntry& entry, const CleanClip& clean,
                          const std::string& noise_type, double snr_db);

}  // namespace bcvad

#endif  // BCVAD_EVALUATE_HPP_
