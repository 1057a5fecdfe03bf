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

#include "bcvad/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>

#include "bcvad/error.hpp"
#include "bcvad/rng.hpp"
#include "bcvad/text.hpp"

namespace bcvad {
namespace {

double Sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapC = Eigen::Map<const Mat>;
using MapM = Eigen::Map<Mat>;

MapC View(const Tensor& t, Eigen::Index rows, Eigen::Index cols) {
  return MapC(t.values.data(), rows, cols);
}
MapM View(std::vector<double>& g, Eigen::Index rows, Eigen::Index cols) {
  return MapM(g.data(), rows, cols);
}

// Forward activations of one sequence kept for the backward pass. Everything
// except the recurrence is batched over time.
class SequenceRunner {
 public:
  SequenceRunner(const ModelWeights& model, std::size_t frames)
      : m_(model), a_(model.arch), t_(static_cast<Eigen::Index>(frames)) {
    out_bins_ = a_.ConvOutBins();
    h_ = a_.gru_units;
    d_ = a_.fc_hidden;
    f_ = a_.FlattenSize();
    maps_.resize(a_.conv.size() + 1);
    patches_.resize(a_.conv.size());
  }

  const std::vector<double>& Forward(std::span<const float> features) {
    const Eigen::Index bins = a_.input_bins;
    Require(features.size() == static_cast<std::size_t>(t_ * bins), ErrorCode::kConfig,
            "feature sequence has the wrong size");
    maps_[0].resize(t_, bins);
    for (Eigen::Index t = 0; t < t_; ++t) {
      for (Eigen::Index i = 0; i < bins; ++i) {
        maps_[0](t, i) = (features[t * bins + i] - a_.input_mean) * a_.input_scale;
      }
    }
    int in_ch = 1, in_len = a_.input_bins;
    for (std::size_t l = 0; l < a_.conv.size(); ++l) {
      const ConvSpec& c = a_.conv[l];
      const int out_len = out_bins_[l];
      const int pad = std::max((out_len - 1) * c.stride + c.kernel - in_len, 0) / 2;
      Mat& p = patches_[l];
      p.setZero(t_ * out_len, in_ch * c.kernel);
      for (Eigen::Index t = 0; t < t_; ++t) {
        for (int j = 0; j < out_len; ++j) {
          for (int ch = 0; ch < in_ch; ++ch) {
            for (int k = 0; k < c.kernel; ++k) {
              const int pos = j * c.stride - pad + k;
              if (pos >= 0 && pos < in_len) {
                p(t * out_len + j, ch * c.kernel + k) = maps_[l](t, ch * in_len + pos);
              }
            }
          }
        }
      }
      const auto w = View(m_.conv_weight(l), c.out_channels, in_ch * c.kernel);
      const auto b = View(m_.conv_bias(l), 1, c.out_channels);
      Mat out = p * w.transpose();
      out.rowwise() += b.row(0);
      Mat& next = maps_[l + 1];
      next.resize(t_, c.out_channels * out_len);
      for (Eigen::Index t = 0; t < t_; ++t) {
        for (int o = 0; o < c.out_channels; ++o) {
          for (int j = 0; j < out_len; ++j) {
            next(t, o * out_len + j) = std::max(out(t * out_len + j, o), 0.0);
          }
        }
      }
      in_ch = c.out_channels;
      in_len = out_len;
    }

    const auto wih = View(m_.gru_w_ih(), 3 * h_, f_);
    const auto whh = View(m_.gru_w_hh(), 3 * h_, h_);
    const auto bias = View(m_.gru_bias(), 1, 3 * h_);
    gx_ = maps_.back() * wih.transpose();
    gx_.rowwise() += bias.row(0);
    hs_.setZero(t_ + 1, h_);
    z_.resize(t_, h_);
    r_.resize(t_, h_);
    n_.resize(t_, h_);
    ghn_.resize(t_, h_);
    Eigen::VectorXd gh(3 * h_);
    for (Eigen::Index t = 0; t < t_; ++t) {
      gh.noalias() = whh * hs_.row(t).transpose();
      for (Eigen::Index i = 0; i < h_; ++i) {
        const double z = Sigmoid(gx_(t, i) + gh[i]);
        const double r = Sigmoid(gx_(t, h_ + i) + gh[h_ + i]);
        const double n = std::tanh(gx_(t, 2 * h_ + i) + r * gh[2 * h_ + i]);
        z_(t, i) = z;
        r_(t, i) = r;
        n_(t, i) = n;
        ghn_(t, i) = gh[2 * h_ + i];
        hs_(t + 1, i) = (1.0 - z) * n + z * hs_(t, i);
      }
    }

    const auto w1 = View(m_.fc1_weight(), d_, h_);
    const auto b1 = View(m_.fc1_bias(), 1, d_);
    const auto w2 = View(m_.fc2_weight(), 1, d_);
    v_ = hs_.bottomRows(t_) * w1.transpose();
    v_.rowwise() += b1.row(0);
    v_ = v_.cwiseMax(0.0);
    const Eigen::VectorXd logit = v_ * w2.transpose();
    p_.resize(static_cast<std::size_t>(t_));
    const double b2 = m_.fc2_bias().values[0];
    for (Eigen::Index t = 0; t < t_; ++t) p_[t] = Sigmoid(logit[t] + b2);
    return p_;
  }

  // Adds scale * gradient of the summed frame losses to grads and returns the
  // summed loss. Call after Forward.
  double Backward(std::span<const float> targets, double scale, Gradients& grads) {
    Require(targets.size() == static_cast<std::size_t>(t_), ErrorCode::kConfig,
            "target sequence has the wrong size");
    const std::size_t nc = a_.conv.size();
    double loss = 0.0;
    Eigen::VectorXd e(t_);
    for (Eigen::Index t = 0; t < t_; ++t) {
      const double z = targets[t];
      const double p = p_[t];
      const double pc = std::clamp(p, kBceClamp, 1.0 - kBceClamp);
      loss -= z * std::log(pc) + (1.0 - z) * std::log(1.0 - pc);
      // The clamp is flat outside its range.
      e[t] = (p == pc) ? scale * (p - z) : 0.0;
    }

    const auto w1 = View(m_.fc1_weight(), d_, h_);
    const auto w2 = View(m_.fc2_weight(), 1, d_);
    View(grads.tensors[2 * nc + 6], 1, 1)(0, 0) += e.sum();
    View(grads.tensors[2 * nc + 5], 1, d_).noalias() += e.transpose() * v_;
    Mat dv = e * w2;
    dv = (v_.array() > 0.0).select(dv, 0.0);
    View(grads.tensors[2 * nc + 3], d_, h_).noalias() += dv.transpose() * hs_.bottomRows(t_);
    View(grads.tensors[2 * nc + 4], 1, d_) += dv.colwise().sum();
    const Mat dh_out = dv * w1;

    const auto whh = View(m_.gru_w_hh(), 3 * h_, h_);
    Mat dgx(t_, 3 * h_), dgh(t_, 3 * h_);
    Eigen::VectorXd dh_next = Eigen::VectorXd::Zero(h_), dh(h_);
    for (Eigen::Index t = t_ - 1; t >= 0; --t) {
      dh = dh_out.row(t).transpose() + dh_next;
      for (Eigen::Index i = 0; i < h_; ++i) {
        const double z = z_(t, i), r = r_(t, i), n = n_(t, i);
        const double dz = dh[i] * (hs_(t, i) - n);
        const double dan = dh[i] * (1.0 - z) * (1.0 - n * n);
        const double daz = dz * z * (1.0 - z);
        const double dar = dan * ghn_(t, i) * r * (1.0 - r);
        dgx(t, i) = daz;
        dgx(t, h_ + i) = dar;
        dgx(t, 2 * h_ + i) = dan;
        dgh(t, i) = daz;
        dgh(t, h_ + i) = dar;
        dgh(t, 2 * h_ + i) = dan * r;
        dh_next[i] = dh[i] * z;
      }
      dh_next.noalias() += whh.transpose() * dgh.row(t).transpose();
    }
    const auto wih = View(m_.gru_w_ih(), 3 * h_, f_);
    View(grads.tensors[2 * nc], 3 * h_, f_).noalias() += dgx.transpose() * maps_.back();
    View(grads.tensors[2 * nc + 1], 3 * h_, h_).noalias() += dgh.transpose() * hs_.topRows(t_);
    View(grads.tensors[2 * nc + 2], 1, 3 * h_) += dgx.colwise().sum();
    Mat dmap = dgx * wih;

    for (std::size_t l = nc; l-- > 0;) {
      const ConvSpec& c = a_.conv[l];
      const int out_len = out_bins_[l];
      const int in_len = l == 0 ? a_.input_bins : out_bins_[l - 1];
      const int in_ch = l == 0 ? 1 : a_.conv[l - 1].out_channels;
      const Mat& out = maps_[l + 1];
      Mat drows(t_ * out_len, c.out_channels);
      for (Eigen::Index t = 0; t < t_; ++t) {
        for (int o = 0; o < c.out_channels; ++o) {
          for (int j = 0; j < out_len; ++j) {
            const Eigen::Index col = o * out_len + j;
            drows(t * out_len + j, o) = out(t, col) > 0.0 ? dmap(t, col) : 0.0;
          }
        }
      }
      View(grads.tensors[2 * l], c.out_channels, in_ch * c.kernel).noalias() +=
          drows.transpose() * patches_[l];
      View(grads.tensors[2 * l + 1], 1, c.out_channels) += drows.colwise().sum();
      if (l == 0) break;
      const auto w = View(m_.conv_weight(l), c.out_channels, in_ch * c.kernel);
      const Mat dp = drows * w;
      const int pad = std::max((out_len - 1) * c.stride + c.kernel - in_len, 0) / 2;
      Mat din = Mat::Zero(t_, in_ch * in_len);
      for (Eigen::Index t = 0; t < t_; ++t) {
        for (int j = 0; j < out_len; ++j) {
          for (int ch = 0; ch < in_ch; ++ch) {
            for (int k = 0; k < c.kernel; ++k) {
              const int pos = j * c.stride - pad + k;
              if (pos >= 0 && pos < in_len) {
                din(t, ch * in_len + pos) += dp(t * out_len + j, ch * c.kernel + k);
              }
            }
          }
        }
      }
      dmap.swap(din);
    }
    return loss;
  }

 private:
  const ModelWeights& m_;
  const ArchSpec& a_;
  Eigen::Index t_;
  std::vector<int> out_bins_;
  Eigen::Index h_ = 0, d_ = 0, f_ = 0;
  std::vector<Mat> maps_;     // post-activation maps, channel-major columns
  std::vector<Mat> patches_;  // im2col inputs per conv layer
  Mat gx_, hs_, z_, r_, n_, ghn_, v_;
  std::vector<double> p_;
};

}  // namespace

double BceLoss(std::span<const double> targets, std::span<const double> predictions) {
  Require(targets.size() == predictions.size(), ErrorCode::kConfig,
          "targets and predictions differ in length");
  Require(!targets.empty(), ErrorCode::kEmptyInput, "empty loss sample");
  double acc = 0.0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const double p = std::clamp(predictions[i], kBceClamp, 1.0 - kBceClamp);
    acc += targets[i] * std::log(p) + (1.0 - targets[i]) * std::log(1.0 - p);
  }
  return -acc / static_cast<double>(targets.size());
}

Gradients Gradients::ZerosLike(const ModelWeights& model) {
  Gradients g;
  for (const auto& t : model.tensors) g.tensors.emplace_back(t.size(), 0.0);
  return g;
}

void Gradients::SetZero() {
  for (auto& t : tensors) std::fill(t.begin(), t.end(), 0.0);
}

std::vector<double> PredictSequence(const ModelWeights& model, std::span<const float> features,
                                    std::size_t frames) {
  SequenceRunner runner(model, frames);
  return runner.Forward(features);
}

double ComputeGradients(const ModelWeights& model, std::span<const SequenceExample> batch,
                        Gradients& grads) {
  Require(!batch.empty(), ErrorCode::kEmptyInput, "empty batch");
  const std::size_t frames = batch[0].targets.size();
  Require(frames > 0, ErrorCode::kEmptyInput, "empty sequence");
  for (const auto& ex : batch) {
    Require(ex.targets.size() == frames, ErrorCode::kConfig,
            "batch sequences must have equal length");
  }
  if (grads.tensors.size() != model.tensors.size()) grads = Gradients::ZerosLike(model);
  grads.SetZero();
  const double scale = 1.0 / static_cast<double>(frames * batch.size());
  double loss = 0.0;
  SequenceRunner runner(model, frames);
  for (const auto& ex : batch) {
    runner.Forward(ex.features);
    loss += runner.Backward(ex.targets, scale, grads);
  }
  return loss * scale;
}

AdamState AdamState::ZerosLike(const ModelWeights& model) {
  AdamState s;
  for (const auto& t : model.tensors) {
    s.m.emplace_back(t.size(), 0.0);
    s.v.emplace_back(t.size(), 0.0);
  }
  return s;
}

void AdamStep(ModelWeights& model, const Gradients& grads, AdamState& state, double lr,
              const AdamConfig& cfg) {
  Require(model.precision == Precision::kFloat32, ErrorCode::kInvalidModel,
          "cannot train a quantized model");
  Require(grads.tensors.size() == model.tensors.size() &&
              state.m.size() == model.tensors.size(),
          ErrorCode::kConfig, "optimizer state does not match the model");
  ++state.step;
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  for (std::size_t t = 0; t < model.tensors.size(); ++t) {
    auto& w = model.tensors[t].values;
    const auto& g = grads.tensors[t];
    auto& m = state.m[t];
    auto& v = state.v[t];
    Require(g.size() == w.size(), ErrorCode::kConfig, "gradient shape mismatch");
    for (std::size_t i = 0; i < w.size(); ++i) {
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
      const double mh = m[i] / c1;
      const double vh = v[i] / c2;
      w[i] -= lr * mh / (std::sqrt(vh) + cfg.epsilon);
    }
  }
}

TrainSchedule TrainSchedule::Desk() {
  TrainSchedule s;
  s.steps_per_epoch = 200;
  s.max_epochs = 30;
  return s;
}

void TrainSchedule::Validate() const {
  Require(lr_init > 0.0 && steps_per_epoch > 0 && batch_size > 0 && lr_halving_patience > 0 &&
              early_stop_patience > 0 && max_epochs > 0,
          ErrorCode::kConfig, "training schedule values must be positive");
}

bool PlateauTracker::Observe(double test_loss) {
  if (!have_best_ || test_loss < best_) {
    best_ = test_loss;
    have_best_ = true;
    since_best_ = 0;
    since_halving_ = 0;
    return true;
  }
  ++since_best_;
  ++since_halving_;
  if (since_halving_ >= halving_patience_) {
    lr_ *= 0.5;
    since_halving_ = 0;
  }
  return false;
}

double MeanLoss(const ModelWeights& model, const SequenceSet& set) {
  Require(set.count > 0, ErrorCode::kEmptyInput, "empty sequence set");
  SequenceRunner runner(model, set.frames);
  double acc = 0.0;
  for (std::size_t i = 0; i < set.count; ++i) {
    const auto& p = runner.Forward(set.Features(i));
    const auto z = set.Targets(i);
    for (std::size_t t = 0; t < set.frames; ++t) {
      const double pc = std::clamp(p[t], kBceClamp, 1.0 - kBceClamp);
      acc -= z[t] * std::log(pc) + (1.0 - z[t]) * std::log(1.0 - pc);
    }
  }
  return acc / static_cast<double>(set.count * set.frames);
}

void FitInputStandardization(ArchSpec& arch, const SequenceSet& train) {
  Require(!train.features.empty(), ErrorCode::kEmptyInput, "no training features");
  double sum = 0.0, sq = 0.0;
  for (float v : train.features) {
    sum += v;
    sq += static_cast<double>(v) * v;
  }
  const double n = static_cast<double>(train.features.size());
  const double mean = sum / n;
  const double var = std::max(sq / n - mean * mean, 1e-12);
  arch.input_mean = mean;
  arch.input_scale = 1.0 / std::sqrt(var);
}

TrainResult Train(ModelWeights model, const SequenceSet& train, const SequenceSet& test,
                  const TrainSchedule& schedule,
                  const std::function<void(const EpochRecord&)>& on_epoch) {
  schedule.Validate();
  Require(train.count > 0, ErrorCode::kConfig, "empty training split");
  Require(test.count > 0, ErrorCode::kConfig, "empty test split");
  Require(train.bins == static_cast<std::size_t>(model.arch.input_bins) &&
              test.bins == train.bins,
          ErrorCode::kConfig, "corpus feature size does not match the model");

  TrainResult result;
  result.initial_test_loss = MeanLoss(model, test);
  result.best = model;
  result.best_test_loss = result.initial_test_loss;

  Rng rng(DeriveSeed(schedule.seed, "batches"));
  AdamState adam = AdamState::ZerosLike(model);
  Gradients grads = Gradients::ZerosLike(model);
  PlateauTracker plateau(schedule.lr_init, schedule.lr_halving_patience,
                         schedule.early_stop_patience);
  std::vector<SequenceExample> batch(static_cast<std::size_t>(schedule.batch_size));

  for (int epoch = 1; epoch <= schedule.max_epochs; ++epoch) {
    const double lr = plateau.lr();
    double train_loss = 0.0;
    for (int step = 0; step < schedule.steps_per_epoch; ++step) {
      for (auto& ex : batch) {
        const std::size_t i = rng.Index(train.count);
        ex = {train.Features(i), train.Targets(i)};
      }
      train_loss += ComputeGradients(model, batch, grads);
      AdamStep(model, grads, adam, lr, schedule.adam);
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = train_loss / schedule.steps_per_epoch;
    rec.test_loss = MeanLoss(model, test);
    rec.lr = lr;
    result.history.push_back(rec);
    if (on_epoch) on_epoch(rec);
    if (plateau.Observe(rec.test_loss)) {
      result.best = model;
      result.best_test_loss = rec.test_loss;
    }
    if (plateau.should_stop()) break;
  }
  return result;
}

std::string FormatHistory(const std::vector<EpochRecord>& history) {
  std::string out;
  for (const auto& r : history) {
    out += std::to_string(r.epoch) + "," + FormatDouble(r.train_loss) + "," +
           FormatDouble(r.test_loss) + "," + FormatDouble(r.lr) + "\n";
  }
  return out;
}

}  // namespace bcvad
