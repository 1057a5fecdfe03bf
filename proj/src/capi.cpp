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

#include "bcvad/bcvad.h"

#include <algorithm>
#include <cstring>
#include <exception>
#include <memory>
#include <new>
#include <string>

#include "bcvad/error.hpp"
#include "bcvad/evaluate.hpp"
#include "bcvad/model.hpp"
#include "bcvad/pipeline.hpp"
#include "bcvad/text.hpp"

struct bcvad_config {
  bcvad::KeyValueConfig kv;
};

struct bcvad_model {
  std::shared_ptr<const bcvad::ModelWeights> weights;
};

struct bcvad_stream {
  explicit bcvad_stream(std::unique_ptr<bcvad::Detector> det) : vad(std::move(det)) {}
  bcvad::StreamingVad vad;
  std::vector<double> samples;
  std::vector<bcvad::FrameResult> results;
};

namespace {

thread_local std::string g_last_error;

bcvad_status FromCode(bcvad::ErrorCode code) {
  using bcvad::ErrorCode;
  switch (code) {
    case ErrorCode::kConfig: return BCVAD_ERR_CONFIG;
    case ErrorCode::kEmptyInput: return BCVAD_ERR_EMPTY_INPUT;
    case ErrorCode::kInvalidData: return BCVAD_ERR_INVALID_DATA;
    case ErrorCode::kInsufficientData: return BCVAD_ERR_INSUFFICIENT_DATA;
    case ErrorCode::kUndefined: return BCVAD_ERR_UNDEFINED;
    case ErrorCode::kAssembly: return BCVAD_ERR_ASSEMBLY;
    case ErrorCode::kInvalidModel: return BCVAD_ERR_INVALID_MODEL;
    case ErrorCode::kData: return BCVAD_ERR_DATA;
    case ErrorCode::kFormat: return BCVAD_ERR_FORMAT;
    case ErrorCode::kIo: return BCVAD_ERR_IO;
  }
  return BCVAD_ERR_INTERNAL;
}

bcvad_status Fail(bcvad_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

template <typename F>
bcvad_status Guard(F&& f) {
  try {
    f();
    g_last_error.clear();
    return BCVAD_OK;
  } catch (const bcvad::Error& e) {
    return Fail(FromCode(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return Fail(BCVAD_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return Fail(BCVAD_ERR_INTERNAL, e.what());
  } catch (...) {
    return Fail(BCVAD_ERR_INTERNAL, "unknown error");
  }
}

}  // namespace

extern "C" {

const char* bcvad_version(void) { return "0.1.0"; }

const char* bcvad_last_error(void) { return g_last_error.c_str(); }

const char* bcvad_status_name(bcvad_status status) {
  switch (status) {
    case BCVAD_OK: return "ok";
    case BCVAD_ERR_CONFIG: return "configuration error";
    case BCVAD_ERR_EMPTY_INPUT: return "empty input";
    case BCVAD_ERR_INVALID_DATA: return "invalid data";
    case BCVAD_ERR_INSUFFICIENT_DATA: return "insufficient data";
    case BCVAD_ERR_UNDEFINED: return "undefined result";
    case BCVAD_ERR_ASSEMBLY: return "assembly failed";
    case BCVAD_ERR_INVALID_MODEL: return "invalid model";
    case BCVAD_ERR_DATA: return "data error";
    case BCVAD_ERR_FORMAT: return "format error";
    case BCVAD_ERR_IO: return "i/o error";
    case BCVAD_ERR_INVALID_ARGUMENT: return "invalid argument";
    case BCVAD_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

int bcvad_exit_code(bcvad_status status) {
  switch (status) {
    case BCVAD_OK: return 0;
    case BCVAD_ERR_CONFIG:
    case BCVAD_ERR_EMPTY_INPUT:
    case BCVAD_ERR_INSUFFICIENT_DATA:
    case BCVAD_ERR_UNDEFINED:
    case BCVAD_ERR_ASSEMBLY:
    case BCVAD_ERR_INVALID_MODEL:
    case BCVAD_ERR_INVALID_ARGUMENT:
      return 2;
    case BCVAD_ERR_DATA:
    case BCVAD_ERR_INVALID_DATA:
      return 3;
    case BCVAD_ERR_FORMAT: return 4;
    case BCVAD_ERR_IO: return 5;
    default: return 1;
  }
}

bcvad_status bcvad_config_create(bcvad_config** out) {
  if (!out) return Fail(BCVAD_ERR_INVALID_ARGUMENT, "null output pointer");
  return Guard([&] { *out = new bcvad_config{}; });
}

bcvad_status bcvad_config_parse(const char* text, bcvad_config** out) {
  if (!text || !out) return Fail(BCVAD_ERR_INVALID_ARGUMENT, "null argument");
  return Guard([&] { *out = new bcvad_config{bcvad::KeyValueConfig::Parse(text)}; });
}

bcvad_status bcvad_config_load(const char* path, bcvad_config** out) {
  if (!path || !out) return Fail(BCVAD_ERR_INVALID_ARGUMENT, "null argument");
  return Guard([&] { *out = new bcvad_config{bcvad::KeyValueConfig::Load(path)}; });
}

bcvad_status bcvad_config_set(bcvad_config* cfg, const char* key, const char* value) {
  if (!cfg || !key || !value) return Fail(BCVAD_ERR_INVALID_ARGUMENT, "null argument");
  return Guard([&] { cfg->kv.Set(key, value); });
}

bcvad_status bcvad_config_get(const bcvad_config* cfg, const char* key, char* buf,
                              size_t capacity, size_t* len) {
  if (!cfg || !key) return Fail(BCVAD_ERR_INVALID_ARGUMENT, "null argument");
  const auto v = cfg->kv.Get(key);
  if (!v) return Fail(BCVAD_ERR_CONFIG, std::string("no key '") + key + "'");
  if (len) *len = v->size();
  if (buf && capacity > 0) {
    const size_t n = std::min(capacity - 1, v->size());
    std::memcpy(buf, v->data(), n);
    buf[n] = '\0';
  }
  g_last_error.clear();
  return BCVAD_OK;
}

void bcvad_config_free(bcvad_config* cfg) { delete cfg; }

bcvad_status bcvad_model_create(const char* arch, uint64_t seed, bcvad_model** out) {
  if (!arch || !out) return Fail(BCVAD_ERR_INVALID_ARGUMENT, "null argument");
  return Guard([&] {
    auto w = std::make_shared<bcvad::ModelWeights>(bcvad::BuildModel(bcvad::ParseArchTag(arch), seed));
    *out = new bcvad_model{std::move(w)};
  });
}

bcvad_status bcvad_model_load(const char* path, bcvad_model** out) {
  if (!path || !out) return Fail(BCVAD_ERR_INVALID_ARGUMENT, "null argument");
  return Guard([&] {
    *out = new bcvad_model{std::make_shared<bcvad::ModelWeights>(bcvad::LoadModel(path))};
  });
}

bcvad_status bcvad_model_save(const bcvad_model* model, const char* path) {
  if (!model || !path) return Fail(BCVAD_ERR_INVALID_ARGUMENT, "null argument");
  return Guard([&] { bcvad::SaveModel(path, *model->weights); });
}

bcvad_status bcvad_model_quantize(const bcvad_model* model, bcvad_model** out) {
  if (!model || !out) return Fail(BCVAD_ERR_INVALID_ARGUMENT, "null argument");
  return Guard([&] {
    *out = new bcvad_model{
        std::make_shared<bcvad::ModelWeights>(bcvad::QuantizeWeights(*model->weights))};
  });
}

size_t bcvad_model_param_count(const bcvad_model* model) {
  return model ? bcvad::CountParams(*model->weights) : 0;
}

int bcvad_model_is_quantized(const bcvad_model* model) {
  return model && model->weights->precision == bcvad::Precision::kInt8 ? 1 : 0;
}

void bcvad_model_free(bcvad_model* model) { delete model; }

bcvad_status bcvad_stream_create_neural(const bcvad_model* model, bcvad_stream** out) {
  if (!model || !out) return Fail(BCVAD_ERR_INVALID_ARGUMENT, "null argument");
  return Guard([&] { *out = new bcvad_stream(bcvad::MakeNeuralDetector(model->weights, "neural")); });
}

bcvad_status bcvad_stream_create_dsp(const bcvad_config* cfg, bcvad_stream** out) {
  if (!out) return Fail(BCVAD_ERR_INVALID_ARGUMENT, "null output pointer");
  return Guard([&] {
    const auto params = cfg ? bcvad::DspParamsFromConfig(cfg->kv) : bcvad::DspVadParams{};
    *out = new bcvad_stream(bcvad::MakeDspDetector(params));
  });
}

size_t bcvad_stream_max_frames(const bcvad_stream* stream, size_t n) {
  (void)stream;
  return n / bcvad::SpectrogramConfig{}.hop_samples() + 1;
}

bcvad_status bcvad_stream_push(bcvad_stream* stream, const float* samples, size_t n,
                               bcvad_frame* frames, size_t capacity, size_t* n_frames) {
  if (!stream || (!samples && n > 0) || !n_frames) {
    return Fail(BCVAD_ERR_INVALID_ARGUMENT, "null argument");
  }
  if (capacity < bcvad_stream_max_frames(stream, n) || (!frames && capacity > 0)) {
    return Fail(BCVAD_ERR_INVALID_ARGUMENT, "frame buffer smaller than bcvad_stream_max_frames");
  }
  return Guard([&] {
    stream->samples.assign(samples, samples + n);
    stream->results.clear();
    stream->vad.Push(stream->samples, stream->results);
    for (size_t i = 0; i < stream->results.size(); ++i) {
      const auto& r = stream->results[i];
      frames[i] = {r.index, r.time_ms, r.probability, r.decision};
    }
    *n_frames = stream->results.size();
  });
}

bcvad_status bcvad_stream_reset(bcvad_stream* stream) {
  if (!stream) return Fail(BCVAD_ERR_INVALID_ARGUMENT, "null stream");
  return Guard([&] { stream->vad.Reset(); });
}

void bcvad_stream_free(bcvad_stream* stream) { delete stream; }

bcvad_status bcvad_run(const char* command, const bcvad_config* cfg, bcvad_log_fn log,
                       void* user) {
  if (!command) return Fail(BCVAD_ERR_INVALID_ARGUMENT, "null command");
  return Guard([&] {
    const bcvad::KeyValueConfig empty;
    bcvad::RunCommand(command, cfg ? cfg->kv : empty,
                      [&](bcvad::Channel ch, std::string_view line) {
                        if (!log) return;
                        const std::string s(line);
                        log(ch == bcvad::Channel::kResult ? 0 : 1, s.c_str(), user);
                      });
  });
}

}  // extern "C"
