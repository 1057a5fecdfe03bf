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

// bcvad command-line tool. Option values are merged over the --config file
// and handed to the library as flat key-value settings.

#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bcvad/bcvad.h"

namespace {

void PrintLine(int channel, const char* line, void* /*user*/) {
  std::FILE* f = channel == 0 ? stdout : stderr;
  std::fputs(line, f);
  std::fputc('\n', f);
}

struct Settings {
  std::map<std::string, std::string> values;

  // Registers --flag writing to key when given.
  void Bind(CLI::App* app, const std::string& flag, const std::string& key,
            const std::string& help) {
    app->add_option_function<std::string>(
        flag, [this, key](const std::string& v) { values[key] = v; }, help);
  }

  void BindDsp(CLI::App* app) {
    Bind(app, "--alpha0", "alpha0", "DSP noise smoothing constant");
    Bind(app, "--beta", "beta", "DSP decision-directed weight");
    Bind(app, "--eta", "eta", "DSP threshold, compared as ln(eta)");
    Bind(app, "--init-frames", "init_frames", "DSP noise initialization frames");
    Bind(app, "--eps-floor", "eps_floor", "DSP noise variance floor");
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bone-conduction voice activity detection toolkit"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  Settings s;
  std::vector<std::string> overrides;
  app.add_option("--config", config_path, "flat key = value config file");
  s.Bind(&app, "--seed", "seed", "random seed (u64)");
  s.Bind(&app, "--out", "out", "output directory");
  app.add_option("--set", overrides, "extra key=value setting (repeatable)");

  auto* synth = app.add_subcommand("synth", "synthesize a corpus");
  s.Bind(synth, "--modality", "modality", "bc or air");
  s.Bind(synth, "--train-clips", "train_clips", "number of training clips");
  s.Bind(synth, "--test-clips", "test_clips", "number of test clips");

  auto* train = app.add_subcommand("train", "train a neural detector");
  s.Bind(train, "--corpus", "corpus", "corpus directory");
  s.Bind(train, "--arch", "arch", "bc or air");
  s.Bind(train, "--steps-per-epoch", "steps_per_epoch", "optimizer steps per epoch");
  s.Bind(train, "--max-epochs", "max_epochs", "epoch limit");

  auto* eval = app.add_subcommand("eval", "noise and SNR evaluation sweep");
  s.Bind(eval, "--corpus", "corpus", "corpus directory");
  s.Bind(eval, "--model", "model", "float32 weight file");
  s.Bind(eval, "--model-int8", "model_int8", "int8 weight file");
  s.Bind(eval, "--detectors", "detectors", "comma list of dsp, neural-float, neural-int8");
  s.Bind(eval, "--snr-list", "snr_list", "comma list of SNRs in dB");
  s.Bind(eval, "--noise-types", "noise_types", "comma list of white, pink, babble, clean");
  s.Bind(eval, "--threads", "threads", "worker threads");
  s.BindDsp(eval);

  auto* stream = app.add_subcommand("stream", "per-frame decisions for a WAV file");
  s.Bind(stream, "input", "input", "16 kHz mono 16-bit WAV file");
  s.Bind(stream, "--model", "model", "weight file");
  s.Bind(stream, "--detector", "detector", "neural or dsp");
  s.BindDsp(stream);

  auto* quantize = app.add_subcommand("quantize", "int8 weight quantization");
  s.Bind(quantize, "--model", "model", "float32 weight file");
  s.Bind(quantize, "--output", "output", "int8 weight file to write");

  auto* bench = app.add_subcommand("bench", "footprint and latency report");
  s.Bind(bench, "--model", "model", "float32 weight file");
  s.Bind(bench, "--model-int8", "model_int8", "int8 weight file");
  s.Bind(bench, "--frames", "frames", "timed frames (at least 10000)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  bcvad_config* cfg = nullptr;
  bcvad_status st = config_path.empty() ? bcvad_config_create(&cfg)
                                        : bcvad_config_load(config_path.c_str(), &cfg);
  if (st != BCVAD_OK) {
    std::fprintf(stderr, "error: %s\n", bcvad_last_error());
    // An unreadable --config is a configuration problem.
    return st == BCVAD_ERR_IO ? 2 : bcvad_exit_code(st);
  }
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "error: --set expects key=value, got '%s'\n", o.c_str());
      bcvad_config_free(cfg);
      return 2;
    }
    bcvad_config_set(cfg, o.substr(0, eq).c_str(), o.substr(eq + 1).c_str());
  }
  for (const auto& [k, v] : s.values) bcvad_config_set(cfg, k.c_str(), v.c_str());

  const std::string command = app.get_subcommands().front()->get_name();
  st = bcvad_run(command.c_str(), cfg, PrintLine, nullptr);
  bcvad_config_free(cfg);
  if (st != BCVAD_OK) {
    std::fprintf(stderr, "error: %s: %s\n", bcvad_status_name(st), bcvad_last_error());
  }
  return bcvad_exit_code(st);
}
