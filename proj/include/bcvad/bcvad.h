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

/* C interface to the bcvad library. All objects are opaque handles; calls
 * return a status and leave a message in bcvad_last_error() on failure. */

#ifndef BCVAD_BCVAD_H_
#define BCVAD_BCVAD_H_

#include <stddef.h>
#include <stdint.h>

#if defined(BCVAD_BUILDING_LIBRARY)
#define BCVAD_API __attribute__((visibility("default")))
#else
#define BCVAD_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum bcvad_status {
  BCVAD_OK = 0,
  BCVAD_ERR_CONFIG = 1,
  BCVAD_ERR_EMPTY_INPUT = 2,
  BCVAD_ERR_INVALID_DATA = 3,
  BCVAD_ERR_INSUFFICIENT_DATA = 4,
  BCVAD_ERR_UNDEFINED = 5,
  BCVAD_ERR_ASSEMBLY = 6,
  BCVAD_ERR_INVALID_MODEL = 7,
  BCVAD_ERR_DATA = 8,
  BCVAD_ERR_FORMAT = 9,
  BCVAD_ERR_IO = 10,
  BCVAD_ERR_INVALID_ARGUMENT = 11,
  BCVAD_ERR_INTERNAL = 12
} bcvad_status;

typedef struct bcvad_config bcvad_config;
typedef struct bcvad_model bcvad_model;
typedef struct bcvad_stream bcvad_stream;

typedef struct bcvad_frame {
  uint64_t index;
  double time_ms; /* frame start */
  double probability;
  int decision;
} bcvad_frame;

/* channel 0: command results, channel 1: progress and diagnostics. */
typedef void (*bcvad_log_fn)(int channel, const char* line, void* user);

BCVAD_API const char* bcvad_version(void);
/* Message of the last failed call on this thread; "" if none. */
BCVAD_API const char* bcvad_last_error(void);
BCVAD_API const char* bcvad_status_name(bcvad_status status);
/* Process exit code: 0 ok, 2 config, 3 data, 4 format, 5 i/o, 1 otherwise. */
BCVAD_API int bcvad_exit_code(bcvad_status status);

BCVAD_API bcvad_status bcvad_config_create(bcvad_config** out);
/* Flat "key = value" text; '#' starts a comment. */
BCVAD_API bcvad_status bcvad_config_parse(const char* text, bcvad_config** out);
BCVAD_API bcvad_status bcvad_config_load(const char* path, bcvad_config** out);
BCVAD_API bcvad_status bcvad_config_set(bcvad_config* cfg, const char* key, const char* value);
/* Copies the value into buf (NUL-terminated); *len receives the value length. */
BCVAD_API bcvad_status bcvad_config_get(const bcvad_config* cfg, const char* key, char* buf,
                                        size_t capacity, size_t* len);
BCVAD_API void bcvad_config_free(bcvad_config* cfg);

/* arch: "bc" or "air". Glorot-initialized float32 weights. */
BCVAD_API bcvad_status bcvad_model_create(const char* arch, uint64_t seed, bcvad_model** out);
BCVAD_API bcvad_status bcvad_model_load(const char* path, bcvad_model** out);
BCVAD_API bcvad_status bcvad_model_save(const bcvad_model* model, const char* path);
BCVAD_API bcvad_status bcvad_model_quantize(const bcvad_model* model, bcvad_model** out);
BCVAD_API size_t bcvad_model_param_count(const bcvad_model* model);
BCVAD_API int bcvad_model_is_quantized(const bcvad_model* model);
BCVAD_API void bcvad_model_free(bcvad_model* model);

/* 16 kHz streaming detectors. The stream keeps its own reference to the model. */
BCVAD_API bcvad_status bcvad_stream_create_neural(const bcvad_model* model, bcvad_stream** out);
/* cfg may be NULL; keys alpha0, beta, eta, init_frames, eps_floor override defaults. */
BCVAD_API bcvad_status bcvad_stream_create_dsp(const bcvad_config* cfg, bcvad_stream** out);
/* Upper bound on frames one push of n samples can complete. */
BCVAD_API size_t bcvad_stream_max_frames(const bcvad_stream* stream, size_t n);
BCVAD_API bcvad_status bcvad_stream_push(bcvad_stream* stream, const float* samples, size_t n,
                                         bcvad_frame* frames, size_t capacity, size_t* n_frames);
BCVAD_API bcvad_status bcvad_stream_reset(bcvad_stream* stream);
BCVAD_API void bcvad_stream_free(bcvad_stream* stream);

/* Runs synth, train, eval, stream, quantize or bench. log may be NULL. */
BCVAD_API bcvad_status bcvad_run(const char* command, const bcvad_config* cfg, bcvad_log_fn log,
                                 void* user);

#ifdef __cplusplus
}
#endif

#endif /* BCVAD_BCVAD_H_ */
