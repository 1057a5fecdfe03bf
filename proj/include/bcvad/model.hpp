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

// Convolutional-recurrent frame detector: 1-D convolutions over the Mel axis,
// one GRU layer, a ReLU hidden layer and a sigmoid output.

#ifndef BCVAD_MODEL_HPP_
#define BCVAD_MODEL_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace bcvad {

enum class ArchTag : std::uint32_t { kBc = 0, kAir = 1, kCustom = 2 };

const char* ArchTagName(ArchTag tag);
ArchTag ParseArchTag(const std::string& name);

struct ConvSpec {
  int kernel = 3;
  int stride = 2;
  int out_channels = 8;
};

struct ArchSpec {
  ArchTag tag = ArchTag::kCustom;
  int input_bins = 32;
  std::vector<ConvSpec> conv;
  int gru_units = 16;
  int fc_hidden = 16;
  // Fixed input standardization, x' = (x - input_mean) * input_scale.
  double input_mean = 0.0;
  double input_scale = 1.0;

  static ArchSpec Bc();   // conv(3,2,8) x2, GRU(16), FC(16)
  static ArchSpec Air();  // conv(3,2,16) x2, GRU(56), FC(32)
  static ArchSpec ForTag(ArchTag tag);

  // Length of each conv layer's output ('same' padding).
  std::vector<int> ConvOutBins() const;
  int FlattenSize() const;
  void Validate() const;
};

enum class Precision : std::uint32_t { kFloat32 = 0, kInt8 = 1 };

struct Tensor {
  std::string name;
  std::vector<std::size_t> shape;
  std::vector<double> values;      // dequantized when quantized
  std::vector<std::int8_t> codes;  // int8 models only
  double scale = 1.0;

  std::size_t size() const { return values.size(); }
};

// Tensor order: conv{i}.weight [out, in, k], conv{i}.bias [out] for each
// layer, then gru.w_ih [3H, F], gru.w_hh [3H, H], gru.bias [3H] with gate
// blocks (update, reset, candidate), fc1.weight [D, H], fc1.bias [D],
// fc2.weight [1, D], fc2.bias [1].
struct ModelWeights {
  ArchSpec arch;
  Precision precision = Precision::kFloat32;
  std::vector<Tensor> tensors;

  const Tensor& conv_weight(std::size_t i) const { return tensors[2 * i]; }
  const Tensor& conv_bias(std::size_t i) const { return tensors[2 * i + 1]; }
  const Tensor& gru_w_ih() const { return tensors[2 * arch.conv.size()]; }
  const Tensor& gru_w_hh() const { return tensors[2 * arch.conv.size() + 1]; }
  const Tensor& gru_bias() const { return tensors[2 * arch.conv.size() + 2]; }
  const Tensor& fc1_weight() const { return tensors[2 * arch.conv.size() + 3]; }
  const Tensor& fc1_bias() const { return tensors[2 * arch.conv.size() + 4]; }
  const Tensor& fc2_weight() const { return tensors[2 * arch.conv.size() + 5]; }
  const Tensor& fc2_bias() const { return tensors[2 * arch.conv.size() + 6]; }

  // Throws kInvalidModel on shape mismatch or non-finite values.
  void Validate() const;
};

// Zero-valued tensors of the right shapes.
ModelWeights ZeroModel(const ArchSpec& arch);
// Glorot-uniform weights, zero biases.
ModelWeights BuildModel(const ArchSpec& arch, std::uint64_t seed);
ModelWeights BuildModel(ArchTag tag, std::uint64_t seed);

std::size_t CountParams(const ModelWeights& model);
std::size_t CountParams(const ArchSpec& arch);
// Bytes held by the parameter payload: 4 per float, 1 per int8 plus scales.
std::size_t ParameterBytes(const ModelWeights& model);

struct RecurrentState {
  std::vector<double> h;

  static RecurrentState Zero(const ArchSpec& arch) {
    return {std::vector<double>(static_cast<std::size_t>(arch.gru_units), 0.0)};
  }
};

// Single-frame inference with reusable scratch buffers. Read-only on the
// model; one session per stream.
class InferenceSession {
 public:
  explicit InferenceSession(const ModelWeights& model);

  // features.size() == input_bins. Returns P(speech) in (0, 1).
  double Step(std::span<const double> features);
  void Reset();

  const RecurrentState& state() const { return state_; }
  RecurrentState& state() { return state_; }
  const ModelWeights& model() const { return *model_; }

 private:
  const ModelWeights* model_;
  RecurrentState state_;
  std::vector<std::vector<double>> maps_;  // input + one per conv layer
  std::vector<double> gates_x_, gates_h_, h_new_, hidden_;
};

double ForwardStep(const ModelWeights& model, std::span<const double> features,
                   RecurrentState& state);

// Per-tensor symmetric int8: scale = max|w| / 127 (1 for all-zero tensors),
// codes rounded half-to-even and clamped to [-127, 127].
ModelWeights QuantizeWeights(const ModelWeights& model);

// Little-endian: magic, version, architecture block, tensor records.
std::vector<unsigned char> SerializeModel(const ModelWeights& model);
ModelWeights DeserializeModel(std::span<const unsigned char> bytes);
void SaveModel(const std::string& path, const ModelWeights& model);
ModelWeights LoadModel(const std::string& path);

}  // namespace bcvad

#endif  // BCVAD_MODEL_HPP_
