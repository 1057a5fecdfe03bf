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

#include "bcvad/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <vector>

#include "bcvad/error.hpp"

namespace bcvad {
namespace {

std::uint32_t ReadU32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t ReadU16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void PutU32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

void PutU16(std::vector<unsigned char>& out, std::uint16_t v) {
  out.push_back(static_cast<unsigned char>(v & 0xff));
  out.push_back(static_cast<unsigned char>(v >> 8));
}

}  // namespace

AudioBuffer ReadWav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  Require(in.good(), ErrorCode::kData, "cannot open '" + path + "'");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  const auto bad = [&](const std::string& why) {
    Fail(ErrorCode::kFormat, "malformed WAV '" + path + "': " + why);
  };
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    bad("missing RIFF/WAVE header");
  }

  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const unsigned char* data = nullptr;
  std::size_t data_len = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* chunk = bytes.data() + pos;
    const std::size_t len = ReadU32(chunk + 4);
    const std::size_t body = pos + 8;
    if (body + len > bytes.size()) {
      // Tolerate a truncated data chunk length written by streaming encoders.
      if (std::memcmp(chunk, "data", 4) != 0) bad("truncated chunk");
    }
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (len < 16) bad("short fmt chunk");
      format = ReadU16(bytes.data() + body);
      channels = ReadU16(bytes.data() + body + 2);
      rate = ReadU32(bytes.data() + body + 4);
      bits = ReadU16(bytes.data() + body + 14);
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = bytes.data() + body;
      data_len = std::min(len, bytes.size() - body);
      break;
    }
    pos = body + len + (len & 1);
  }
  if (!have_fmt) bad("missing fmt chunk");
  if (data == nullptr) bad("missing data chunk");
  if (format != 1 || bits != 16) bad("only 16-bit PCM is supported");
  if (channels != 1) bad("only mono audio is supported");
  if (rate != static_cast<std::uint32_t>(kDefaultSampleRate)) {
    bad("sample rate " + std::to_string(rate) +
        " Hz is not supported (16000 Hz required, resampling not available)");
  }

  AudioBuffer audio;
  audio.sample_rate = static_cast<int>(rate);
  audio.samples.resize(data_len / 2);
  for (std::size_t i = 0; i < audio.samples.size(); ++i) {
    const auto v = static_cast<std::int16_t>(ReadU16(data + 2 * i));
    audio.samples[i] = v / 32768.0;
  }
  return audio;
}

void WriteWav(const std::string& path, const AudioBuffer& audio) {
  ValidateAudio(audio);
  const auto data_len = static_cast<std::uint32_t>(audio.size() * 2);
  std::vector<unsigned char> out;
  out.reserve(44 + data_len);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  PutU32(out, 36 + data_len);
  out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  PutU32(out, 16);
  PutU16(out, 1);
  PutU16(out, 1);
  PutU32(out, static_cast<std::uint32_t>(audio.sample_rate));
  PutU32(out, static_cast<std::uint32_t>(audio.sample_rate * 2));
  PutU16(out, 2);
  PutU16(out, 16);
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  PutU32(out, data_len);
  for (double s : audio.samples) {
    const double c = std::clamp(s, -1.0, 1.0);
    const auto v = static_cast<std::int16_t>(std::clamp(std::lround(c * 32767.0), -32768L, 32767L));
    PutU16(out, static_cast<std::uint16_t>(v));
  }
  std::ofstream f(path, std::ios::binary);
  Require(f.good(), ErrorCode::kIo, "cannot write '" + path + "'");
  f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
  Require(f.good(), ErrorCode::kIo, "write failed for '" + path + "'");
}

}  // namespace bcvad
