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

// Loss, exact full-sequence backpropagation through time, Adam, and the
// epoch loop with plateau-driven learning-rate halving and early stopping.

#ifndef BCVAD_TRAIN_HPP_
#define BCVAD_TRAIN_HPP_

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "bcvad/dataset.hpp"
#include "bcvad/model.hpp"

namespace bcvad {

inline constexpr double kBceClamp = 1e-7;

// -(1/N) sum [z ln(p) + (1 - z) ln(1 - p)], p clamped to [1e-7, 1 - 1e-7].
double BceLoss(std::span<const double> targets, std::span<const double> predictions);

struct SequenceExample {
  std::span<const float> features;  // frames x input_bins
  std::span<const float> targets;   // frames
};

// Same shapes as the model tensors.
struct Gradients {
  std::vector<std::vector<double>> tensors;

  static Gradients ZerosLike(const ModelWeights& model);
  void SetZero();
};

// Forward pass through the training code path (zero initial state).
std::vector<double> PredictSequence(const ModelWeights& model, std::span<const float> features,
                                    std::size_t frames);

// Gradient of the mean BCE over every frame of the batch. Sequences are
// processed independently and summed in batch order. Returns the loss.
double ComputeGradients(const ModelWeights& model, std::span<const SequenceExample> batch,
                        Gradients& grads);

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  std::vector<std::vector<double>> m, v;
  std::int64_t step = 0;

  static AdamState ZerosLike(const ModelWeights& model);
};

void AdamStep(ModelWeights& model, const Gradients& grads, AdamState& state, double lr,
              const AdamConfig& cfg = {});

struct TrainSchedule {
  double lr_init = 0.001;
  int steps_per_epoch = 2000;
  int batch_size = 8;
  int lr_halving_patience = 3;
  int early_stop_patience = 5;
  int max_epochs = 100;
  AdamConfig adam;
  std::uint64_t seed = 1;

  // Full-size constants with reduced step and epoch counts for desk runs.
  static TrainSchedule Desk();
  void Validate() const;
};

// Tracks test-loss improvement. Any decrease counts as an improvement.
class PlateauTracker {
 public:
  PlateauTracker(double lr, int halving_patience, int stop_patience)
      : lr_(lr), halving_patience_(halving_patience), stop_patience_(stop_patience) {}

  // Returns true when the new loss is the best so far.
  bool Observe(double test_loss);
  double lr() const { return lr_; }
  bool should_stop() const { return since_best_ >= stop_patience_; }
  int since_best() const { return since_best_; }

 private:
  double lr_;
  int halving_patience_;
  int stop_patience_;
  double best_ = 0.0;
  bool have_best_ = false;
  int since_best_ = 0;
  int since_halving_ = 0;
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double test_loss = 0.0;
  double lr = 0.0;  // rate used during this epoch
};

struct TrainResult {
  ModelWeights best;
  double initial_test_loss = 0.0;
  double best_test_loss = 0.0;
  std::vector<EpochRecord> history;
};

// Mean BCE over all frames of a set.
double MeanLoss(const ModelWeights& model, const SequenceSet& set);

// Sets input_mean / input_scale from the mean and standard deviation of the
// training features.
void FitInputStandardization(ArchSpec& arch, const SequenceSet& train);

TrainResult Train(ModelWeights model, const SequenceSet& train, const SequenceSet& test,
                  const TrainSchedule& schedule,
                  const std::function<void(const EpochRecord&)>& on_epoch = {});

// "epoch,train_loss,test_loss,lr" lines, one per epoch.
std::string FormatHistory(const std::vector<EpochRecord>& history);

}  // namespace bcvad

#endif  // BCVAD_TRAIN_HPP_
