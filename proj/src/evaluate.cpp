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

#include "bcvad/evaluate.hpp"

#include <atomic>
#include <exception>
#include <thread>
#include <utility>

#include "bcvad/error.hpp"
#include "bcvad/labels.hpp"
#include "bcvad/rng.hpp"

namespace bcvad {
namespace {

class NeuralDetector final : public Detector {
 public:
  NeuralDetector(std::shared_ptr<const ModelWeights> model, std::string name)
      : model_(std::move(model)),
        name_(std::move(name)),
        bank_(FeaturesForModel(model_->arch).MakeBank()),
        session_(*model_),
        feats_(static_cast<std::size_t>(bank_.n_mels)) {}

  const std::string& name() const override { return name_; }

  DetectorOutput Push(std::span<const double> magnitude) override {
    LogMelFrame(magnitude, bank_, feats_);
    for (double& v : feats_) v = static_cast<float>(v);
    const double p = session_.Step(feats_);
    return {p, p > 0.5 ? 1 : 0};
  }

  void Reset() override { session_.Reset(); }

  std::unique_ptr<Detector> Clone() const override {
    return std::make_unique<NeuralDetector>(model_, name_);
  }

 private:
  std::shared_ptr<const ModelWeights> model_;
  std::string name_;
  MelFilterBank bank_;
  InferenceSession session_;
  std::vector<double> feats_;
};

class DspDetector final : public Detector {
 public:
  DspDetector(const DspVadParams& params, std::string name)
      : params_(params), name_(std::move(name)), vad_(SpectrogramConfig{}.num_bins(), params) {}

  const std::string& name() const override { return name_; }

  DetectorOutput Push(std::span<const double> magnitude) override {
    const FrameDecision d = vad_.Push(magnitude);
    return {vad_.initialized() ? DspProbability(d.score, params_) : 0.0, d.decision};
  }

  void Reset() override { vad_.Reset(); }

  std::unique_ptr<Detector> Clone() const override {
    return std::make_unique<DspDetector>(params_, name_);
  }

 private:
  DspVadParams params_;
  std::string name_;
  DspVad vad_;
};

}  // namespace

FeatureConfig FeaturesForModel(const ArchSpec& arch) {
  const FeatureConfig bc = FeatureConfig::Bc();
  if (arch.input_bins == bc.n_mels) return bc;
  const FeatureConfig air = FeatureConfig::Air();
  if (arch.input_bins == air.n_mels) return air;
  Fail(ErrorCode::kInvalidModel, "no feature preset with " + std::to_string(arch.input_bins) +
                                     " bins");
}

std::unique_ptr<Detector> MakeNeuralDetector(std::shared_ptr<const ModelWeights> model,
                                             std::string name) {
  Require(model != nullptr, ErrorCode::kInvalidModel, "null model");
  return std::make_unique<NeuralDetector>(std::move(model), std::move(name));
}

std::unique_ptr<Detector> MakeDspDetector(const DspVadParams& params, std::string name) {
  params.Validate();
  return std::make_unique<DspDetector>(params, std::move(name));
}

StreamingVad::StreamingVad(std::unique_ptr<Detector> detector, const SpectrogramConfig& cfg)
    : detector_(std::move(detector)),
      cfg_(cfg),
      analyzer_(cfg),
      mag_(static_cast<std::size_t>(cfg.num_bins())) {
  Require(detector_ != nullptr, ErrorCode::kConfig, "null detector");
  pending_.reserve(cfg_.frame_samples() * 2);
}

void StreamingVad::Push(std::span<const double> samples, std::vector<FrameResult>& out) {
  const std::size_t frame = cfg_.frame_samples();
  const std::size_t hop = cfg_.hop_samples();
  const double hop_ms = 1000.0 * static_cast<double>(hop) / cfg_.sample_rate;
  for (double s : samples) {
    pending_.push_back(s);
    if (pending_.size() < frame) continue;
    analyzer_.Magnitude(pending_, mag_);
    const DetectorOutput d = detector_->Push(mag_);
    out.push_back({next_index_, static_cast<double>(next_index_) * hop_ms, d.probability,
                   d.decision});
    ++next_index_;
    pending_.erase(pending_.begin(), pending_.begin() + static_cast<std::ptrdiff_t>(hop));
  }
}

void StreamingVad::Reset() {
  detector_->Reset();
  pending_.clear();
  next_index_ = 0;
}

std::vector<DetectorOutput> RunDetector(Detector& detector, const AudioBuffer& audio) {
  const MagSpectrogram mag = StftMagnitude(audio);
  detector.Reset();
  std::vector<DetectorOutput> out;
  out.reserve(mag.num_frames());
  for (std::size_t t = 0; t < mag.num_frames(); ++t) out.push_back(detector.Push(mag.frames.row(t)));
  return out;
}

EvalSignal MakeEvalSignal(const ClipEntry& entry, const CleanClip& clean,
                          const std::string& noise_type, double snr_db) {
  EvalSignal sig;
  if (noise_type == "clean") {
    sig.audio = MixForModel(clean.speech, clean.labels, nullptr, 0.0, entry.level_dbfs);
  } else {
    const AudioBuffer noise =
        MakeInterference(noise_type, DeriveSeed(entry.interference_seed, noise_type),
                         static_cast<double>(clean.speech.size()) / clean.speech.sample_rate);
    sig.audio = MixForModel(clean.speech, clean.labels, &noise, snr_db, entry.level_dbfs);
  }
  const LabelTrack truth = BinarizeLabels(SmoothLabels(clean.labels));
  sig.truth.reserve(truth.values.size());
  for (double v : truth.values) sig.truth.push_back(v >= 0.5 ? 1 : 0);
  return sig;
}

std::vector<EvalReport> EvaluateDetectors(std::span<const Detector* const> detectors,
                                          const ClipManifest& manifest,
                                          const CorpusConfig& config, const EvalPlan& plan) {
  Require(!detectors.empty(), ErrorCode::kConfig, "no detectors to evaluate");
  const auto test = manifest.Split("test");
  Require(!test.empty(), ErrorCode::kData, "manifest has no test clips");

  struct Condition {
    std::string noise;
    std::optional<double> snr;
  };
  std::vector<Condition> conditions;
  for (const auto& n : plan.noise_types) {
    if (n == "clean") {
      conditions.push_back({n, std::nullopt});
    } else {
      for (double s : plan.snr_db) conditions.push_back({n, s});
    }
  }
  Require(!conditions.empty(), ErrorCode::kConfig, "empty evaluation plan");

  std::vector<CleanClip> clean;
  clean.reserve(test.size());
  for (const ClipEntry* e : test) clean.push_back(MaterializeClip(*e, config));

  // rows[condition][detector]
  std::vector<std::vector<ReportRow>> rows(conditions.size(),
                                           std::vector<ReportRow>(detectors.size()));
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(conditions.size());
  auto run_condition = [&](std::size_t c, std::vector<std::unique_ptr<Detector>>& local) {
    const Condition& cond = conditions[c];
    std::vector<std::vector<double>> scores(detectors.size());
    std::vector<int> truth;
    for (std::size_t i = 0; i < test.size(); ++i) {
      const EvalSignal sig =
          MakeEvalSignal(*test[i], clean[i], cond.noise, cond.snr.value_or(0.0));
      Require(sig.truth.size() == SpectrogramConfig{}.NumFrames(sig.audio.size()),
              ErrorCode::kData, "label track does not match clip " + test[i]->clip_id);
      const MagSpectrogram mag = StftMagnitude(sig.audio);
      for (std::size_t d = 0; d < local.size(); ++d) {
        local[d]->Reset();
        for (std::size_t t = 0; t < mag.num_frames(); ++t) {
          scores[d].push_back(local[d]->Push(mag.frames.row(t)).probability);
        }
      }
      truth.insert(truth.end(), sig.truth.begin(), sig.truth.end());
    }
    for (std::size_t d = 0; d < local.size(); ++d) {
      rows[c][d] = ScoreCondition(cond.noise, cond.snr, scores[d], truth);
    }
  };
  auto worker = [&] {
    std::vector<std::unique_ptr<Detector>> local;
    for (const Detector* d : detectors) local.push_back(d->Clone());
    for (std::size_t c = next++; c < conditions.size(); c = next++) {
      try {
        run_condition(c, local);
      } catch (...) {
        errors[c] = std::current_exception();
      }
    }
  };
  const int n_threads = std::max(1, std::min<int>(plan.threads, static_cast<int>(conditions.size())));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::vector<EvalReport> reports(detectors.size());
  for (std::size_t d = 0; d < detectors.size(); ++d) {
    reports[d].detector = detectors[d]->name();
    for (std::size_t c = 0; c < conditions.size(); ++c) reports[d].rows.push_back(rows[c][d]);
  }
  return reports;
}

}  // namespace bcvad
