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

#include "bcvad/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <set>

#include "bcvad/dataset.hpp"
#include "bcvad/error.hpp"
#include "bcvad/evaluate.hpp"
#include "bcvad/model.hpp"
#include "bcvad/rng.hpp"
#include "bcvad/train.hpp"
#include "bcvad/wav.hpp"

namespace bcvad {
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

std::string Hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string OutDir(const KeyValueConfig& cfg) { return cfg.GetString("out", "."); }

std::string PathKey(const KeyValueConfig& cfg, const std::string& key,
                    const std::string& fallback_name) {
  if (const auto v = cfg.Get(key)) return *v;
  return (fs::path(OutDir(cfg)) / fallback_name).string();
}

void EnsureDir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  Require(!ec, ErrorCode::kIo, "cannot create '" + dir + "': " + ec.message());
}

void WriteText(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  Require(os.good(), ErrorCode::kIo, "cannot write '" + path + "'");
  os << text;
  Require(os.good(), ErrorCode::kIo, "write failed for '" + path + "'");
}

std::uintmax_t FileSize(const std::string& path) {
  std::error_code ec;
  const auto n = fs::file_size(path, ec);
  Require(!ec, ErrorCode::kData, "cannot stat '" + path + "': " + ec.message());
  return n;
}

void Result(const LineSink& sink, const std::string& line) { sink(Channel::kResult, line); }
void Info(const LineSink& sink, const std::string& line) { sink(Channel::kInfo, line); }

double Ms(Clock::duration d) { return std::chrono::duration<double, std::milli>(d).count(); }

}  // namespace

LatencyStats SummarizeLatency(std::vector<double> samples_ms) {
  LatencyStats s;
  s.frames = samples_ms.size();
  if (samples_ms.empty()) return s;
  double acc = 0.0;
  for (double v : samples_ms) acc += v;
  s.mean_ms = acc / static_cast<double>(samples_ms.size());
  std::sort(samples_ms.begin(), samples_ms.end());
  // Nearest-rank percentiles.
  auto rank = [&](double q) {
    const auto k = static_cast<std::size_t>(std::ceil(q * static_cast<double>(samples_ms.size())));
    return samples_ms[std::min(samples_ms.size(), std::max<std::size_t>(k, 1)) - 1];
  };
  s.p50_ms = rank(0.50);
  s.p95_ms = rank(0.95);
  s.max_ms = samples_ms.back();
  return s;
}

void CmdSynth(const KeyValueConfig& cfg, const LineSink& sink) {
  const CorpusConfig config = CorpusConfig::FromKeyValue(cfg);
  config.Validate();
  const std::string out = OutDir(cfg);
  Info(sink, "building corpus in " + out);
  const Corpus corpus = BuildCorpus(config);
  WriteCorpus(out, corpus);

  Result(sink, std::string("modality ") + (config.modality == Modality::kBc ? "bc" : "air") +
                   ", seed " + std::to_string(config.seed));
  for (const std::string split : {"train", "test"}) {
    std::map<std::string, int> classes;
    std::set<std::uint64_t> speakers;
    for (const ClipEntry* e : corpus.manifest.Split(split)) {
      ++classes[SpeechClassName(e->speech_class)];
      speakers.insert(e->speaker_seed);
    }
    const auto clips = corpus.manifest.Split(split).size();
    std::string line = split + ": " + std::to_string(clips) + " clips, " +
                       FormatFixed(static_cast<double>(clips) * config.clip_len_s / 3600.0, 3) +
                       " h, low " + std::to_string(classes["low"]) + " medium " +
                       std::to_string(classes["medium"]) + " high " +
                       std::to_string(classes["high"]);
    Result(sink, line);
    std::string spk = split + " speakers:";
    for (auto s : speakers) spk += " " + Hex(s);
    Result(sink, spk);
  }
  Result(sink, "manifest hash " + Hex(Fnv1a64(corpus.manifest.ToJsonLines())));
  Result(sink, "feature config hash " + Hex(config.features().Hash()));
}

void CmdTrain(const KeyValueConfig& cfg, const LineSink& sink) {
  const std::string corpus_dir = cfg.GetString("corpus", "corpus");
  const Corpus corpus = LoadCorpus(corpus_dir);
  const std::string out = OutDir(cfg);
  EnsureDir(out);

  const std::uint64_t seed = cfg.GetU64("seed", 1);
  const std::string default_arch = corpus.config.modality == Modality::kBc ? "bc" : "air";
  ArchSpec arch = ArchSpec::ForTag(ParseArchTag(cfg.GetString("arch", default_arch)));
  Require(static_cast<std::size_t>(arch.input_bins) == corpus.train.bins, ErrorCode::kConfig,
          "architecture input size does not match the corpus features");
  FitInputStandardization(arch, corpus.train);
  const ModelWeights init = BuildModel(arch, DeriveSeed(seed, "init"));

  TrainSchedule schedule = TrainSchedule::Desk();
  schedule.seed = seed;
  schedule.lr_init = cfg.GetDouble("lr", schedule.lr_init);
  schedule.steps_per_epoch = static_cast<int>(cfg.GetInt("steps_per_epoch", schedule.steps_per_epoch));
  schedule.batch_size = static_cast<int>(cfg.GetInt("batch_size", schedule.batch_size));
  schedule.max_epochs = static_cast<int>(cfg.GetInt("max_epochs", schedule.max_epochs));
  schedule.lr_halving_patience =
      static_cast<int>(cfg.GetInt("lr_halving_patience", schedule.lr_halving_patience));
  schedule.early_stop_patience =
      static_cast<int>(cfg.GetInt("early_stop_patience", schedule.early_stop_patience));
  schedule.Validate();

  Info(sink, std::string("training ") + ArchTagName(arch.tag) + " model, " +
                 std::to_string(CountParams(init)) + " parameters, " +
                 std::to_string(schedule.steps_per_epoch) + " steps per epoch");
  const TrainResult result = Train(init, corpus.train, corpus.test, schedule,
                                   [&](const EpochRecord& r) {
                                     Info(sink, "epoch " + std::to_string(r.epoch) +
                                                    " train " + FormatFixed(r.train_loss, 6) +
                                                    " test " + FormatFixed(r.test_loss, 6) +
                                                    " lr " + FormatDouble(r.lr));
                                   });
  const std::string model_path = (fs::path(out) / "model.bin").string();
  SaveModel(model_path, result.best);
  WriteText((fs::path(out) / "history.csv").string(), FormatHistory(result.history));
  Result(sink, "epochs " + std::to_string(result.history.size()) + ", initial test loss " +
                   FormatFixed(result.initial_test_loss, 6) + ", best test loss " +
                   FormatFixed(result.best_test_loss, 6));
  Result(sink, "wrote " + model_path);
}

void CmdQuantize(const KeyValueConfig& cfg, const LineSink& sink) {
  const std::string in = PathKey(cfg, "model", "model.bin");
  const ModelWeights model = LoadModel(in);
  const ModelWeights q = QuantizeWeights(model);
  const std::string out = PathKey(cfg, "output", "model_int8.bin");
  if (const auto parent = fs::path(out).parent_path(); !parent.empty()) EnsureDir(parent.string());
  SaveModel(out, q);
  double max_err = 0.0;
  for (std::size_t t = 0; t < model.tensors.size(); ++t) {
    for (std::size_t i = 0; i < model.tensors[t].size(); ++i) {
      max_err = std::max(max_err, std::abs(model.tensors[t].values[i] - q.tensors[t].values[i]));
    }
  }
  Result(sink, "parameters " + std::to_string(CountParams(q)));
  Result(sink, "float32 file bytes " + std::to_string(FileSize(in)));
  Result(sink, "int8 file bytes " + std::to_string(FileSize(out)));
  Result(sink, "max abs weight error " + FormatDouble(max_err));
  Result(sink, "wrote " + out);
}

DspVadParams DspParamsFromConfig(const KeyValueConfig& cfg) {
  DspVadParams p;
  p.alpha0 = cfg.GetDouble("alpha0", p.alpha0);
  p.beta = cfg.GetDouble("beta", p.beta);
  p.eta = cfg.GetDouble("eta", p.eta);
  p.init_frames = static_cast<int>(cfg.GetInt("init_frames", p.init_frames));
  p.eps_floor = cfg.GetDouble("eps_floor", p.eps_floor);
  p.Validate();
  return p;
}

void CmdEval(const KeyValueConfig& cfg, const LineSink& sink) {
  const Corpus corpus = LoadCorpus(cfg.GetString("corpus", "corpus"));
  const std::string out = OutDir(cfg);
  const auto names =
      cfg.GetStringList("detectors", {"dsp", "neural-float", "neural-int8"});
  std::shared_ptr<const ModelWeights> float_model, int8_model;
  auto need_float = [&] {
    if (!float_model) {
      float_model = std::make_shared<ModelWeights>(LoadModel(PathKey(cfg, "model", "model.bin")));
    }
    return float_model;
  };
  std::vector<std::unique_ptr<Detector>> detectors;
  for (const auto& n : names) {
    if (n == "dsp") {
      detectors.push_back(MakeDspDetector(DspParamsFromConfig(cfg), n));
    } else if (n == "neural-float") {
      detectors.push_back(MakeNeuralDetector(need_float(), n));
    } else if (n == "neural-int8") {
      if (!int8_model) {
        if (const auto p = cfg.Get("model_int8")) {
          int8_model = std::make_shared<ModelWeights>(LoadModel(*p));
        } else {
          int8_model = std::make_shared<ModelWeights>(QuantizeWeights(*need_float()));
        }
      }
      detectors.push_back(MakeNeuralDetector(int8_model, n));
    } else {
      Fail(ErrorCode::kConfig, "unknown detector '" + n + "'");
    }
  }
  EvalPlan plan;
  plan.snr_db = cfg.GetDoubleList("snr_list", plan.snr_db);
  plan.noise_types = cfg.GetStringList("noise_types", plan.noise_types);
  plan.threads = static_cast<int>(cfg.GetInt("threads", plan.threads));

  std::vector<const Detector*> ptrs;
  for (const auto& d : detectors) ptrs.push_back(d.get());
  Info(sink, "evaluating " + std::to_string(ptrs.size()) + " detectors on " +
                 std::to_string(corpus.manifest.Split("test").size()) + " test clips");
  const auto reports = EvaluateDetectors(ptrs, corpus.manifest, corpus.config, plan);
  EnsureDir(out);
  for (const auto& r : reports) {
    const std::string path = (fs::path(out) / ("report_" + r.detector + ".csv")).string();
    WriteText(path, r.ToCsv());
    Info(sink, "wrote " + path);
  }
  const std::string table = FormatDcfTable(reports);
  WriteText((fs::path(out) / "dcf_table.txt").string(), table);
  std::size_t pos = 0;
  while (pos < table.size()) {
    const auto end = table.find('\n', pos);
    Result(sink, table.substr(pos, end - pos));
    pos = end == std::string::npos ? table.size() : end + 1;
  }
}

void CmdStream(const KeyValueConfig& cfg, const LineSink& sink) {
  const auto input = cfg.Get("input");
  Require(input.has_value(), ErrorCode::kConfig, "stream needs an input WAV file");
  const AudioBuffer audio = ReadWav(*input);
  const std::string kind = cfg.GetString("detector", "neural");
  std::unique_ptr<Detector> det;
  if (kind == "dsp") {
    det = MakeDspDetector(DspParamsFromConfig(cfg));
  } else if (kind == "neural") {
    det = MakeNeuralDetector(
        std::make_shared<ModelWeights>(LoadModel(PathKey(cfg, "model", "model.bin"))), kind);
  } else {
    Fail(ErrorCode::kConfig, "unknown detector '" + kind + "'");
  }

  StreamingVad vad(std::move(det));
  const std::size_t hop = SpectrogramConfig{}.hop_samples();
  std::vector<FrameResult> frames;
  std::vector<double> times;
  std::span<const double> all(audio.samples);
  for (std::size_t i = 0; i < all.size(); i += hop) {
    const std::size_t before = frames.size();
    const auto t0 = Clock::now();
    vad.Push(all.subspan(i, std::min(hop, all.size() - i)), frames);
    const auto t1 = Clock::now();
    if (frames.size() > before) times.push_back(Ms(t1 - t0) / double(frames.size() - before));
    for (std::size_t f = before; f < frames.size(); ++f) {
      const FrameResult& r = frames[f];
      Result(sink, std::to_string(r.index) + "," + FormatDouble(r.time_ms) + "," +
                       FormatDouble(r.probability) + "," + std::to_string(r.decision));
    }
  }
  const LatencyStats s = SummarizeLatency(times);
  Info(sink, "frames " + std::to_string(frames.size()) + " mean_ms " + FormatFixed(s.mean_ms, 4) +
                 " p95_ms " + FormatFixed(s.p95_ms, 4));
}

void CmdBench(const KeyValueConfig& cfg, const LineSink& sink) {
  const std::int64_t requested = cfg.GetInt("frames", 10000);
  Require(requested >= 10000, ErrorCode::kConfig, "bench needs at least 10000 frames");
  const auto frames = static_cast<std::size_t>(requested);
  const std::string float_path = PathKey(cfg, "model", "model.bin");
  const auto float_model = std::make_shared<ModelWeights>(LoadModel(float_path));
  Require(float_model->precision == Precision::kFloat32, ErrorCode::kConfig,
          "bench expects a float32 model; the int8 variant is derived from it");
  std::shared_ptr<ModelWeights> int8_model;
  std::size_t int8_bytes = 0;
  if (const auto p = cfg.Get("model_int8")) {
    int8_model = std::make_shared<ModelWeights>(LoadModel(*p));
    int8_bytes = FileSize(*p);
  } else {
    int8_model = std::make_shared<ModelWeights>(QuantizeWeights(*float_model));
    int8_bytes = SerializeModel(*int8_model).size();
  }
  const std::uint64_t seed = cfg.GetU64("seed", 1);

  const SpectrogramConfig stft;
  const std::size_t hop = stft.hop_samples();
  Rng rng(DeriveSeed(seed, "bench"));
  std::vector<double> audio((frames + 1) * hop);
  for (double& v : audio) v = 0.05 * rng.Normal();

  Result(sink, "precision,file_bytes,param_count,param_bytes,mean_ms,p50_ms,p95_ms,max_ms");
  const std::pair<const char*, std::shared_ptr<ModelWeights>> runs[] = {
      {"float32", float_model}, {"int8", int8_model}};
  for (const auto& [label, model] : runs) {
    StreamingVad vad(MakeNeuralDetector(model, label));
    std::vector<FrameResult> out;
    out.reserve(frames + 2);
    std::vector<double> times;
    times.reserve(frames);
    std::span<const double> all(audio);
    vad.Push(all.subspan(0, hop), out);
    for (std::size_t i = hop; i + hop <= all.size() && times.size() < frames; i += hop) {
      const auto t0 = Clock::now();
      vad.Push(all.subspan(i, hop), out);
      times.push_back(Ms(Clock::now() - t0));
    }
    const LatencyStats s = SummarizeLatency(times);
    const std::size_t file_bytes =
        model == float_model ? FileSize(float_path) : int8_bytes;
    Result(sink, std::string(label) + "," + std::to_string(file_bytes) + "," +
                     std::to_string(CountParams(*model)) + "," +
                     std::to_string(ParameterBytes(*model)) + "," + FormatFixed(s.mean_ms, 5) +
                     "," + FormatFixed(s.p50_ms, 5) + "," + FormatFixed(s.p95_ms, 5) + "," +
                     FormatFixed(s.max_ms, 5));
  }
}

const std::vector<std::string>& CommandNames() {
  static const std::vector<std::string> names{"synth", "train", "eval",
                                              "stream", "quantize", "bench"};
  return names;
}

void RunCommand(const std::string& name, const KeyValueConfig& cfg, const LineSink& sink) {
  if (name == "synth") return CmdSynth(cfg, sink);
  if (name == "train") return CmdTrain(cfg, sink);
  if (name == "quantize") return CmdQuantize(cfg, sink);
  if (name == "eval") return CmdEval(cfg, sink);
  if (name == "stream") return CmdStream(cfg, sink);
  if (name == "bench") return CmdBench(cfg, sink);
  Fail(ErrorCode::kConfig, "unknown command '" + name + "'");
}

}  // namespace bcvad
