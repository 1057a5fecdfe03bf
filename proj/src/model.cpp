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

#include "bcvad/model.hpp"

#include <algorithm>
#include <bit>
#include <cfenv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "bcvad/error.hpp"
#include "bcvad/rng.hpp"

namespace bcvad {
namespace {

constexpr char kWeightMagic[8] = {'B', 'C', 'V', 'A', 'D', 'W', 'T', 'S'};
constexpr std::uint32_t kWeightVersion = 1;
constexpr std::uint8_t kDtypeFloat32 = 0;
constexpr std::uint8_t kDtypeInt8 = 1;

double Sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

std::vector<std::pair<std::string, std::vector<std::size_t>>> TensorShapes(const ArchSpec& a) {
  std::vector<std::pair<std::string, std::vector<std::size_t>>> shapes;
  std::size_t in_ch = 1;
  for (std::size_t i = 0; i < a.conv.size(); ++i) {
    const auto out = static_cast<std::size_t>(a.conv[i].out_channels);
    const auto k = static_cast<std::size_t>(a.conv[i].kernel);
    shapes.push_back({"conv" + std::to_string(i) + ".weight", {out, in_ch, k}});
    shapes.push_back({"conv" + std::to_string(i) + ".bias", {out}});
    in_ch = out;
  }
  const auto h = static_cast<std::size_t>(a.gru_units);
  const auto f = static_cast<std::size_t>(a.FlattenSize());
  const auto d = static_cast<std::size_t>(a.fc_hidden);
  shapes.push_back({"gru.w_ih", {3 * h, f}});
  shapes.push_back({"gru.w_hh", {3 * h, h}});
  shapes.push_back({"gru.bias", {3 * h}});
  shapes.push_back({"fc1.weight", {d, h}});
  shapes.push_back({"fc1.bias", {d}});
  shapes.push_back({"fc2.weight", {1, d}});
  shapes.push_back({"fc2.bias", {1}});
  return shapes;
}

std::size_t ShapeSize(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

class ByteWriter {
 public:
  template <typename T>
  void Put(T v) {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
    bytes.insert(bytes.end(), b, b + sizeof(T));
  }
  void PutBytes(const void* p, std::size_t n) {
    const auto* c = static_cast<const unsigned char*>(p);
    bytes.insert(bytes.end(), c, c + n);
  }
  std::vector<unsigned char> bytes;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const unsigned char> b) : bytes_(b) {}
  template <typename T>
  T Get() {
    Need(sizeof(T));
    unsigned char b[sizeof(T)];
    std::memcpy(b, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
    T v;
    std::memcpy(&v, b, sizeof(T));
    return v;
  }
  std::span<const unsigned char> GetBytes(std::size_t n) {
    Need(n);
    auto s = bytes_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  void Need(std::size_t n) const {
    Require(pos_ + n <= bytes_.size(), ErrorCode::kFormat, "truncated weight file");
  }
  std::span<const unsigned char> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

const char* ArchTagName(ArchTag tag) {
  switch (tag) {
    case ArchTag::kBc: return "bc";
    case ArchTag::kAir: return "air";
    case ArchTag::kCustom: return "custom";
  }
  return "?";
}

ArchTag ParseArchTag(const std::string& name) {
  if (name == "bc") return ArchTag::kBc;
  if (name == "air") return ArchTag::kAir;
  if (name == "custom") return ArchTag::kCustom;
  Fail(ErrorCode::kConfig, "unknown architecture '" + name + "' (expected bc or air)");
}

ArchSpec ArchSpec::Bc() {
  ArchSpec a;
  a.tag = ArchTag::kBc;
  a.input_bins = 32;
  a.conv = {{3, 2, 8}, {3, 2, 8}};
  a.gru_units = 16;
  a.fc_hidden = 16;
  return a;
}

ArchSpec ArchSpec::Air() {
  ArchSpec a;
  a.tag = ArchTag::kAir;
  a.input_bins = 64;
  a.conv = {{3, 2, 16}, {3, 2, 16}};
  a.gru_units = 56;
  a.fc_hidden = 32;
  return a;
}

ArchSpec ArchSpec::ForTag(ArchTag tag) {
  switch (tag) {
    case ArchTag::kBc: return Bc();
    case ArchTag::kAir: return Air();
    case ArchTag::kCustom: break;
  }
  Fail(ErrorCode::kConfig, "custom architectures have no default realization");
}

std::vector<int> ArchSpec::ConvOutBins() const {
  std::vector<int> out;
  int len = input_bins;
  for (const auto& c : conv) {
    len = (len + c.stride - 1) / c.stride;
    out.push_back(len);
  }
  return out;
}

int ArchSpec::FlattenSize() const {
  if (conv.empty()) return input_bins;
  return ConvOutBins().back() * conv.back().out_channels;
}

void ArchSpec::Validate() const {
  Require(input_bins >= 1, ErrorCode::kInvalidModel, "input_bins must be positive");
  for (const auto& c : conv) {
    Require(c.kernel >= 1 && c.stride >= 1 && c.out_channels >= 1, ErrorCode::kInvalidModel,
            "conv kernel, stride and channels must be positive");
  }
  Require(gru_units >= 1 && fc_hidden >= 1, ErrorCode::kInvalidModel,
          "gru_units and fc_hidden must be positive");
  Require(std::isfinite(input_mean) && std::isfinite(input_scale) && input_scale > 0.0,
          ErrorCode::kInvalidModel, "bad input standardization");
}

void ModelWeights::Validate() const {
  arch.Validate();
  const auto shapes = TensorShapes(arch);
  Require(tensors.size() == shapes.size(), ErrorCode::kInvalidModel,
          "tensor count does not match the architecture");
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    const Tensor& t = tensors[i];
    Require(t.shape == shapes[i].second && t.values.size() == ShapeSize(t.shape),
            ErrorCode::kInvalidModel, "tensor '" + t.name + "' has the wrong shape");
    for (double v : t.values) {
      Require(std::isfinite(v), ErrorCode::kInvalidModel,
              "tensor '" + t.name + "' holds a non-finite value");
    }
    if (precision == Precision::kInt8) {
      Require(t.codes.size() == t.values.size() && t.scale > 0.0, ErrorCode::kInvalidModel,
              "tensor '" + t.name + "' lacks int8 codes");
    }
  }
}

ModelWeights ZeroModel(const ArchSpec& arch) {
  arch.Validate();
  ModelWeights m;
  m.arch = arch;
  for (auto& [name, shape] : TensorShapes(arch)) {
    Tensor t;
    t.name = name;
    t.shape = shape;
    t.values.assign(ShapeSize(shape), 0.0);
    m.tensors.push_back(std::move(t));
  }
  return m;
}

ModelWeights BuildModel(const ArchSpec& arch, std::uint64_t seed) {
  ModelWeights m = ZeroModel(arch);
  Rng rng(DeriveSeed(seed, "glorot"));
  for (Tensor& t : m.tensors) {
    if (t.shape.size() < 2) continue;  // biases stay zero
    double fan_in, fan_out;
    if (t.shape.size() == 3) {
      fan_in = static_cast<double>(t.shape[1] * t.shape[2]);
      fan_out = static_cast<double>(t.shape[0] * t.shape[2]);
    } else {
      fan_in = static_cast<double>(t.shape[1]);
      fan_out = static_cast<double>(t.shape[0]);
    }
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    for (double& v : t.values) v = rng.Uniform(-limit, limit);
  }
  return m;
}

ModelWeights BuildModel(ArchTag tag, std::uint64_t seed) {
  return BuildModel(ArchSpec::ForTag(tag), seed);
}

std::size_t CountParams(const ModelWeights& model) {
  std::size_t n = 0;
  for (const auto& t : model.tensors) n += t.size();
  return n;
}

std::size_t CountParams(const ArchSpec& arch) {
  std::size_t n = 0;
  for (const auto& [name, shape] : TensorShapes(arch)) n += ShapeSize(shape);
  return n;
}

std::size_t ParameterBytes(const ModelWeights& model) {
  const std::size_t n = CountParams(model);
  if (model.precision == Precision::kFloat32) return 4 * n;
  return n + 4 * model.tensors.size();
}

InferenceSession::InferenceSession(const ModelWeights& model) : model_(&model) {
  const ArchSpec& a = model.arch;
  maps_.emplace_back(static_cast<std::size_t>(a.input_bins));
  const auto bins = a.ConvOutBins();
  for (std::size_t i = 0; i < a.conv.size(); ++i) {
    maps_.emplace_back(static_cast<std::size_t>(bins[i] * a.conv[i].out_channels));
  }
  const auto h = static_cast<std::size_t>(a.gru_units);
  gates_x_.resize(3 * h);
  gates_h_.resize(3 * h);
  h_new_.resize(h);
  hidden_.resize(static_cast<std::size_t>(a.fc_hidden));
  Reset();
}

void InferenceSession::Reset() { state_ = RecurrentState::Zero(model_->arch); }

double InferenceSession::Step(std::span<const double> features) {
  const ModelWeights& m = *model_;
  const ArchSpec& a = m.arch;
  Require(features.size() == static_cast<std::size_t>(a.input_bins), ErrorCode::kConfig,
          "feature length does not match the model input");
  Require(state_.h.size() == static_cast<std::size_t>(a.gru_units), ErrorCode::kConfig,
          "recurrent state size does not match the model");

  for (std::size_t i = 0; i < features.size(); ++i) {
    maps_[0][i] = (features[i] - a.input_mean) * a.input_scale;
  }
  int in_ch = 1, in_len = a.input_bins;
  for (std::size_t l = 0; l < a.conv.size(); ++l) {
    const ConvSpec& c = a.conv[l];
    const int out_len = (in_len + c.stride - 1) / c.stride;
    const int pad = std::max((out_len - 1) * c.stride + c.kernel - in_len, 0) / 2;
    const auto& w = m.conv_weight(l).values;
    const auto& b = m.conv_bias(l).values;
    const auto& in = maps_[l];
    auto& out = maps_[l + 1];
    for (int o = 0; o < c.out_channels; ++o) {
      for (int j = 0; j < out_len; ++j) {
        double acc = b[o];
        for (int ch = 0; ch < in_ch; ++ch) {
          const double* wk = &w[(static_cast<std::size_t>(o) * in_ch + ch) * c.kernel];
          const double* x = &in[static_cast<std::size_t>(ch) * in_len];
          for (int t = 0; t < c.kernel; ++t) {
            const int pos = j * c.stride - pad + t;
            if (pos >= 0 && pos < in_len) acc += wk[t] * x[pos];
          }
        }
        out[static_cast<std::size_t>(o) * out_len + j] = std::max(acc, 0.0);
      }
    }
    in_ch = c.out_channels;
    in_len = out_len;
  }

  const auto& flat = maps_.back();
  const std::size_t f = flat.size();
  const auto h = static_cast<std::size_t>(a.gru_units);
  const auto& wih = m.gru_w_ih().values;
  const auto& whh = m.gru_w_hh().values;
  const auto& bias = m.gru_bias().values;
  for (std::size_t g = 0; g < 3 * h; ++g) {
    double ax = bias[g];
    const double* wr = &wih[g * f];
    for (std::size_t i = 0; i < f; ++i) ax += wr[i] * flat[i];
    double ah = 0.0;
    const double* ur = &whh[g * h];
    for (std::size_t i = 0; i < h; ++i) ah += ur[i] * state_.h[i];
    gates_x_[g] = ax;
    gates_h_[g] = ah;
  }
  for (std::size_t i = 0; i < h; ++i) {
    const double z = Sigmoid(gates_x_[i] + gates_h_[i]);
    const double r = Sigmoid(gates_x_[h + i] + gates_h_[h + i]);
    const double n = std::tanh(gates_x_[2 * h + i] + r * gates_h_[2 * h + i]);
    h_new_[i] = (1.0 - z) * n + z * state_.h[i];
  }
  state_.h = h_new_;

  const auto d = static_cast<std::size_t>(a.fc_hidden);
  const auto& w1 = m.fc1_weight().values;
  const auto& b1 = m.fc1_bias().values;
  for (std::size_t j = 0; j < d; ++j) {
    double acc = b1[j];
    for (std::size_t i = 0; i < h; ++i) acc += w1[j * h + i] * state_.h[i];
    hidden_[j] = std::max(acc, 0.0);
  }
  const auto& w2 = m.fc2_weight().values;
  double logit = m.fc2_bias().values[0];
  for (std::size_t j = 0; j < d; ++j) logit += w2[j] * hidden_[j];
  return Sigmoid(logit);
}

double ForwardStep(const ModelWeights& model, std::span<const double> features,
                   RecurrentState& state) {
  InferenceSession session(model);
  session.state() = state;
  const double p = session.Step(features);
  state = session.state();
  return p;
}

ModelWeights QuantizeWeights(const ModelWeights& model) {
  Require(model.precision == Precision::kFloat32, ErrorCode::kInvalidModel,
          "model is already quantized");
  model.Validate();
  ModelWeights q = model;
  q.precision = Precision::kInt8;
  const int saved_mode = std::fegetround();
  std::fesetround(FE_TONEAREST);
  for (Tensor& t : q.tensors) {
    double max_abs = 0.0;
    for (double v : t.values) max_abs = std::max(max_abs, std::abs(v));
    // Scales are stored as float32, so quantize against the stored value.
    t.scale = static_cast<float>(max_abs / 127.0);
    if (!(t.scale > 0.0)) t.scale = 1.0;
    t.codes.resize(t.values.size());
    for (std::size_t i = 0; i < t.values.size(); ++i) {
      const double c = std::clamp(std::nearbyint(t.values[i] / t.scale), -127.0, 127.0);
      t.codes[i] = static_cast<std::int8_t>(c);
      t.values[i] = t.codes[i] * t.scale;
    }
  }
  std::fesetround(saved_mode);
  return q;
}

std::vector<unsigned char> SerializeModel(const ModelWeights& model) {
  model.Validate();
  ByteWriter w;
  w.PutBytes(kWeightMagic, sizeof(kWeightMagic));
  w.Put<std::uint32_t>(kWeightVersion);
  const ArchSpec& a = model.arch;
  w.Put<std::uint32_t>(static_cast<std::uint32_t>(a.tag));
  w.Put<std::uint32_t>(static_cast<std::uint32_t>(a.input_bins));
  w.Put<std::uint32_t>(static_cast<std::uint32_t>(a.conv.size()));
  for (const auto& c : a.conv) {
    w.Put<std::uint32_t>(static_cast<std::uint32_t>(c.kernel));
    w.Put<std::uint32_t>(static_cast<std::uint32_t>(c.stride));
    w.Put<std::uint32_t>(static_cast<std::uint32_t>(c.out_channels));
  }
  w.Put<std::uint32_t>(static_cast<std::uint32_t>(a.gru_units));
  w.Put<std::uint32_t>(static_cast<std::uint32_t>(a.fc_hidden));
  w.Put<double>(a.input_mean);
  w.Put<double>(a.input_scale);
  w.Put<std::uint32_t>(static_cast<std::uint32_t>(model.precision));
  w.Put<std::uint32_t>(static_cast<std::uint32_t>(model.tensors.size()));
  const bool int8 = model.precision == Precision::kInt8;
  for (const Tensor& t : model.tensors) {
    w.Put<std::uint16_t>(static_cast<std::uint16_t>(t.name.size()));
    w.PutBytes(t.name.data(), t.name.size());
    w.Put<std::uint8_t>(int8 ? kDtypeInt8 : kDtypeFloat32);
    w.Put<float>(static_cast<float>(int8 ? t.scale : 1.0));
    w.Put<std::uint8_t>(static_cast<std::uint8_t>(t.shape.size()));
    for (auto d : t.shape) w.Put<std::uint32_t>(static_cast<std::uint32_t>(d));
    if (int8) {
      w.PutBytes(t.codes.data(), t.codes.size());
    } else {
      for (double v : t.values) w.Put<float>(static_cast<float>(v));
    }
  }
  return std::move(w.bytes);
}

ModelWeights DeserializeModel(std::span<const unsigned char> bytes) {
  ByteReader r(bytes);
  const auto magic = r.GetBytes(sizeof(kWeightMagic));
  Require(std::memcmp(magic.data(), kWeightMagic, sizeof(kWeightMagic)) == 0,
          ErrorCode::kFormat, "not a weight file");
  Require(r.Get<std::uint32_t>() == kWeightVersion, ErrorCode::kFormat,
          "unsupported weight file version");
  ModelWeights m;
  ArchSpec& a = m.arch;
  const auto tag = r.Get<std::uint32_t>();
  Require(tag <= 2, ErrorCode::kFormat, "unknown architecture tag");
  a.tag = static_cast<ArchTag>(tag);
  a.input_bins = static_cast<int>(r.Get<std::uint32_t>());
  const auto n_conv = r.Get<std::uint32_t>();
  Require(n_conv <= 16, ErrorCode::kFormat, "implausible conv layer count");
  for (std::uint32_t i = 0; i < n_conv; ++i) {
    ConvSpec c;
    c.kernel = static_cast<int>(r.Get<std::uint32_t>());
    c.stride = static_cast<int>(r.Get<std::uint32_t>());
    c.out_channels = static_cast<int>(r.Get<std::uint32_t>());
    a.conv.push_back(c);
  }
  a.gru_units = static_cast<int>(r.Get<std::uint32_t>());
  a.fc_hidden = static_cast<int>(r.Get<std::uint32_t>());
  a.input_mean = r.Get<double>();
  a.input_scale = r.Get<double>();
  const auto precision = r.Get<std::uint32_t>();
  Require(precision <= 1, ErrorCode::kFormat, "unknown precision tag");
  m.precision = static_cast<Precision>(precision);
  const auto n_tensors = r.Get<std::uint32_t>();
  Require(n_tensors <= 256, ErrorCode::kFormat, "implausible tensor count");
  for (std::uint32_t i = 0; i < n_tensors; ++i) {
    Tensor t;
    const auto name_len = r.Get<std::uint16_t>();
    const auto name = r.GetBytes(name_len);
    t.name.assign(name.begin(), name.end());
    const auto dtype = r.Get<std::uint8_t>();
    Require(dtype == kDtypeFloat32 || dtype == kDtypeInt8, ErrorCode::kFormat,
            "unknown tensor dtype");
    Require((dtype == kDtypeInt8) == (m.precision == Precision::kInt8), ErrorCode::kFormat,
            "tensor dtype disagrees with the model precision");
    t.scale = r.Get<float>();
    const auto ndim = r.Get<std::uint8_t>();
    std::size_t n = 1;
    for (std::uint8_t k = 0; k < ndim; ++k) {
      t.shape.push_back(r.Get<std::uint32_t>());
      n *= t.shape.back();
    }
    Require(n <= (1u << 24), ErrorCode::kFormat, "implausible tensor size");
    t.values.resize(n);
    if (dtype == kDtypeInt8) {
      const auto raw = r.GetBytes(n);
      t.codes.resize(n);
      for (std::size_t k = 0; k < n; ++k) {
        t.codes[k] = static_cast<std::int8_t>(raw[k]);
        t.values[k] = t.codes[k] * t.scale;
      }
    } else {
      for (auto& v : t.values) v = r.Get<float>();
    }
    m.tensors.push_back(std::move(t));
  }
  Require(r.done(), ErrorCode::kFormat, "trailing bytes in weight file");
  try {
    m.Validate();
  } catch (const Error& e) {
    Fail(ErrorCode::kFormat, std::string("inconsistent weight file: ") + e.what());
  }
  return m;
}

void SaveModel(const std::string& path, const ModelWeights& model) {
  const auto bytes = SerializeModel(model);
  std::ofstream os(path, std::ios::binary);
  Require(os.good(), ErrorCode::kIo, "cannot write '" + path + "'");
  os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  Require(os.good(), ErrorCode::kIo, "write failed for '" + path + "'");
}

ModelWeights LoadModel(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  Require(is.good(), ErrorCode::kData, "cannot open weight file '" + path + "'");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(is)),
                                   std::istreambuf_iterator<char>());
  return DeserializeModel(bytes);
}

}  // namespace bcvad
