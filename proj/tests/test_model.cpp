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

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "bcvad/error.hpp"
#include "bcvad/model.hpp"
#include "bcvad/rng.hpp"

namespace bcvad {
namespace {

double Sig(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Straightforward forward pass over the whole sequence, kept separate from the
// library so the two can be compared.
std::vector<double> NaiveForward(const ModelWeights& m, const std::vector<std::vector<double>>& xs) {
  const ArchSpec& a = m.arch;
  const int H = a.gru_units;
  std::vector<double> h(H, 0.0), out;
  for (const auto& x : xs) {
    std::vector<std::vector<double>> maps(1, std::vector<double>(x.size()));
    for (std::size_t i = 0; i < x.size(); ++i) maps[0][i] = (x[i] - a.input_mean) * a.input_scale;
    int len = a.input_bins;
    for (std::size_t l = 0; l < a.conv.size(); ++l) {
      const auto& c = a.conv[l];
      const int out_len = int(std::ceil(double(len) / c.stride));
      const int pad = std::max((out_len - 1) * c.stride + c.kernel - len, 0) / 2;
      const auto& w = m.conv_weight(l);
      const int in_ch = int(w.shape[1]);
      std::vector<std::vector<double>> next(c.out_channels, std::vector<double>(out_len));
      for (int o = 0; o < c.out_channels; ++o) {
        for (int j = 0; j < out_len; ++j) {
          double acc = m.conv_bias(l).values[o];
          for (int ch = 0; ch < in_ch; ++ch) {
            for (int t = 0; t < c.kernel; ++t) {
              const int p = j * c.stride + t - pad;
              const double v = (p < 0 || p >= len) ? 0.0 : maps[ch][p];
              acc += w.values[(o * in_ch + ch) * c.kernel + t] * v;
            }
          }
          next[o][j] = acc > 0 ? acc : 0;
        }
      }
      maps = next;
      len = out_len;
    }
    std::vector<double> flat;
    for (const auto& ch : maps) flat.insert(flat.end(), ch.begin(), ch.end());
    const auto& wih = m.gru_w_ih().values;
    const auto& whh = m.gru_w_hh().values;
    const auto& b = m.gru_bias().values;
    auto dot_x = [&](int g) {
      double s = b[g];
      for (std::size_t i = 0; i < flat.size(); ++i) s += wih[g * flat.size() + i] * flat[i];
      return s;
    };
    auto dot_h = [&](int g) {
      double s = 0;
      for (int i = 0; i < H; ++i) s += whh[g * H + i] * h[i];
      return s;
    };
    std::vector<double> hn(H);
    for (int i = 0; i < H; ++i) {
      const double z = Sig(dot_x(i) + dot_h(i));
      const double r = Sig(dot_x(H + i) + dot_h(H + i));
      const double n = std::tanh(dot_x(2 * H + i) + r * dot_h(2 * H + i));
      hn[i] = (1 - z) * n + z * h[i];
    }
    h = hn;
    double logit = m.fc2_bias().values[0];
    for (int j = 0; j < a.fc_hidden; ++j) {
      double acc = m.fc1_bias().values[j];
      for (int i = 0; i < H; ++i) acc += m.fc1_weight().values[j * H + i] * h[i];
      logit += m.fc2_weight().values[j] * std::max(acc, 0.0);
    }
    out.push_back(Sig(logit));
  }
  return out;
}

ModelWeights RandomModel(const ArchSpec& arch, std::uint64_t seed) {
  ModelWeights m = BuildModel(arch, seed);
  Rng rng(seed + 100);
  for (auto& t : m.tensors) {
    for (double& v : t.values) v += 0.05 * rng.Normal();  // nonzero biases too
  }
  return m;
}

std::vector<std::vector<double>> RandomInputs(int frames, int bins, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::vector<double>> xs(frames, std::vector<double>(bins));
  for (auto& x : xs) {
    for (double& v : x) v = rng.Normal(-5.0, 2.0);
  }
  return xs;
}

TEST(Architecture, ParameterCounts) {
  EXPECT_EQ(CountParams(ArchSpec::Bc()), 4409u);
  EXPECT_EQ(CountParams(ArchSpec::Air()), 55289u);
  EXPECT_EQ(CountParams(BuildModel(ArchTag::kBc, 1)), 4409u);
  EXPECT_EQ(ArchSpec::Bc().ConvOutBins(), (std::vector<int>{16, 8}));
  EXPECT_EQ(ArchSpec::Bc().FlattenSize(), 64);
  EXPECT_EQ(ArchSpec::Air().FlattenSize(), 256);
  EXPECT_EQ(ParameterBytes(BuildModel(ArchTag::kBc, 1)), 4409u * 4);
}

TEST(Architecture, InvalidSpecsRejected) {
  ArchSpec a = ArchSpec::Bc();
  a.gru_units = 0;
  EXPECT_THROW(a.Validate(), Error);
  a = ArchSpec::Bc();
  a.conv[0].stride = 0;
  EXPECT_THROW(a.Validate(), Error);
  EXPECT_THROW(ParseArchTag("cnn"), Error);
}

TEST(Init, GlorotBoundsAndZeroBiases) {
  const auto m = BuildModel(ArchTag::kBc, 3);
  for (const auto& t : m.tensors) {
    if (t.shape.size() == 1) {
      for (double v : t.values) EXPECT_EQ(v, 0.0) << t.name;
      continue;
    }
    // fan_in / fan_out include the receptive field for conv kernels.
    double rf = t.shape.size() == 3 ? double(t.shape[2]) : 1.0;
    const double fan_in = t.shape[1] * rf, fan_out = t.shape[0] * rf;
    const double lim = std::sqrt(6.0 / (fan_in + fan_out));
    double mx = 0;
    for (double v : t.values) mx = std::max(mx, std::abs(v));
    EXPECT_LE(mx, lim) << t.name;
    EXPECT_GT(mx, 0.5 * lim) << t.name;
  }
  EXPECT_EQ(BuildModel(ArchTag::kBc, 3).tensors[0].values, m.tensors[0].values);
  EXPECT_NE(BuildModel(ArchTag::kBc, 4).tensors[0].values, m.tensors[0].values);
}

TEST(Forward, MatchesNaiveReference) {
  ArchSpec odd;
  odd.input_bins = 13;
  odd.conv = {{5, 3, 4}, {2, 1, 3}, {3, 2, 2}};
  odd.gru_units = 7;
  odd.fc_hidden = 5;
  odd.input_mean = -4.0;
  odd.input_scale = 0.5;
  for (const ArchSpec& arch : {ArchSpec::Bc(), ArchSpec::Air(), odd}) {
    const auto m = RandomModel(arch, 11);
    const auto xs = RandomInputs(40, arch.input_bins, 12);
    const auto ref = NaiveForward(m, xs);
    InferenceSession s(m);
    for (std::size_t t = 0; t < xs.size(); ++t) {
      const double p = s.Step(xs[t]);
      EXPECT_NEAR(p, ref[t], 1e-12);
      EXPECT_GT(p, 0.0);
      EXPECT_LT(p, 1.0);
    }
  }
}

TEST(Forward, ResetAndForwardStepAgree) {
  const auto m = RandomModel(ArchSpec::Bc(), 5);
  const auto xs = RandomInputs(20, 32, 6);
  InferenceSession s(m);
  std::vector<double> a, b, c;
  for (const auto& x : xs) a.push_back(s.Step(x));
  s.Reset();
  for (const auto& x : xs) b.push_back(s.Step(x));
  auto st = RecurrentState::Zero(m.arch);
  for (const auto& x : xs) c.push_back(ForwardStep(m, x, st));
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, c);
  EXPECT_THROW(s.Step(std::vector<double>(31)), Error);
}

TEST(Forward, ZeroModelIsHalf) {
  const auto m = ZeroModel(ArchSpec::Bc());
  InferenceSession s(m);
  for (const auto& x : RandomInputs(5, 32, 1)) EXPECT_DOUBLE_EQ(s.Step(x), 0.5);
}

TEST(Quantize, CodesAndErrorBound) {
  const auto m = RandomModel(ArchSpec::Bc(), 8);
  const auto q = QuantizeWeights(m);
  EXPECT_EQ(q.precision, Precision::kInt8);
  EXPECT_EQ(CountParams(q), CountParams(m));
  for (std::size_t i = 0; i < m.tensors.size(); ++i) {
    const auto& t = m.tensors[i];
    const auto& r = q.tensors[i];
    double mx = 0;
    for (double v : t.values) mx = std::max(mx, std::abs(v));
    EXPECT_NEAR(r.scale, mx / 127.0, 1e-7 * mx);
    ASSERT_EQ(r.codes.size(), t.size());
    bool hit_max = false;
    for (std::size_t k = 0; k < t.size(); ++k) {
      EXPECT_GE(r.codes[k], -127);
      EXPECT_LE(std::abs(t.values[k] - r.values[k]), 0.5 * r.scale * (1 + 1e-9));
      EXPECT_DOUBLE_EQ(r.values[k], r.codes[k] * r.scale);
      hit_max |= std::abs(r.codes[k]) == 127;
    }
    EXPECT_TRUE(hit_max) << t.name;
  }
  EXPECT_THROW(QuantizeWeights(q), Error);
  EXPECT_LT(ParameterBytes(q), ParameterBytes(m) / 3);
}

TEST(Quantize, AllZeroTensorUsesUnitScale) {
  const auto q = QuantizeWeights(ZeroModel(ArchSpec::Bc()));
  for (const auto& t : q.tensors) {
    EXPECT_EQ(t.scale, 1.0);
    for (auto c : t.codes) EXPECT_EQ(c, 0);
  }
}

TEST(Quantize, TiesRoundToEven) {
  ModelWeights m = ZeroModel(ArchSpec::Bc());
  auto& t = m.tensors[0];
  // scale = 127/127 = 1, so 2.5 -> 2, 3.5 -> 4, -0.5 -> 0.
  t.values[0] = 127.0;
  t.values[1] = 2.5;
  t.values[2] = 3.5;
  t.values[3] = -0.5;
  const auto q = QuantizeWeights(m);
  EXPECT_EQ(q.tensors[0].codes[1], 2);
  EXPECT_EQ(q.tensors[0].codes[2], 4);
  EXPECT_EQ(q.tensors[0].codes[3], 0);
}

TEST(Serialization, RoundTripFloatAndInt8) {
  const auto m = RandomModel(ArchSpec::Bc(), 9);
  ModelWeights mf = m;
  for (auto& t : mf.tensors) {
    for (double& v : t.values) v = static_cast<float>(v);
  }
  const auto back = DeserializeModel(SerializeModel(mf));
  for (std::size_t i = 0; i < mf.tensors.size(); ++i) EXPECT_EQ(back.tensors[i].values, mf.tensors[i].values);
  EXPECT_EQ(back.arch.tag, ArchTag::kBc);

  const auto q = QuantizeWeights(m);
  const auto qb = DeserializeModel(SerializeModel(q));
  EXPECT_EQ(qb.precision, Precision::kInt8);
  for (std::size_t i = 0; i < q.tensors.size(); ++i) {
    EXPECT_EQ(qb.tensors[i].codes, q.tensors[i].codes);
    EXPECT_EQ(qb.tensors[i].values, q.tensors[i].values);
  }
  EXPECT_LT(SerializeModel(q).size(), SerializeModel(m).size() / 3);
}

TEST(Serialization, FileRoundTrip) {
  const auto path = (std::filesystem::temp_directory_path() / "bcvad_model_test.bin").string();
  const auto m = BuildModel(ArchTag::kAir, 2);
  SaveModel(path, m);
  EXPECT_EQ(LoadModel(path).tensors.back().values, m.tensors.back().values);
  std::filesystem::remove(path);
  try {
    LoadModel(path);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kData);
  }
}

TEST(Serialization, CorruptionDetected) {
  auto bytes = SerializeModel(BuildModel(ArchTag::kBc, 1));
  auto bad_magic = bytes;
  bad_magic[0] ^= 0xff;
  EXPECT_THROW(DeserializeModel(bad_magic), Error);
  auto truncated = bytes;
  truncated.resize(bytes.size() / 2);
  EXPECT_THROW(DeserializeModel(truncated), Error);
  auto trailing = bytes;
  trailing.push_back(0);
  EXPECT_THROW(DeserializeModel(trailing), Error);
  ModelWeights nan = BuildModel(ArchTag::kBc, 1);
  nan.tensors[2].values[0] = std::nan("");
  EXPECT_THROW(nan.Validate(), Error);
}

}  // namespace
}  // namespace bcvad
