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

// Acceptance run: one PASS/FAIL line per criterion. Criteria 5-7 and 9 train
// a BC model on the standard synthetic corpus first; everything is written
// under --work so a failed run can be inspected.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "bcvad/dataset.hpp"
#include "bcvad/dsp_vad.hpp"
#include "bcvad/error.hpp"
#include "bcvad/evaluate.hpp"
#include "bcvad/labels.hpp"
#include "bcvad/metrics.hpp"
#include "bcvad/model.hpp"
#include "bcvad/pipeline.hpp"
#include "bcvad/rng.hpp"
#include "bcvad/text.hpp"
#include "bcvad/train.hpp"

namespace fs = std::filesystem;
using namespace bcvad;

namespace {

using Clock = std::chrono::steady_clock;

// Tolerances and limits.
constexpr double kExactTol = 1e-9;
constexpr double kGradRelTol = 1e-4;
constexpr int kGradSeeds = 5;
constexpr double kAucOracleTol = 1e-9;
constexpr int kAucSets = 200;
constexpr double kStreamTol = 1e-6;
constexpr int kStreamSequences = 100;
constexpr double kMinAuc15 = 0.95;
constexpr double kMinAcc15 = 0.90;
constexpr double kTrainBudgetS = 30 * 60;
constexpr double kMinDspAccWhite20 = 0.85;
constexpr double kMaxInt8AccDrop = 0.05;
constexpr std::size_t kMaxInt8FileBytes = 35 * 1024;
constexpr double kMaxP95Ms = 10.0;
constexpr int kLatencyFrames = 10000;
constexpr double kCorrectedMaxRatio = 2.0;
constexpr double kUncorrectedMinRatio = 3.0;

struct Outcome {
  bool pass = false;
  std::string detail;
};

int g_failed = 0;

void Report(int id, const std::string& title, const Outcome& o) {
  std::printf("[%s] %d %s: %s\n", o.pass ? "PASS" : "FAIL", id, title.c_str(), o.detail.c_str());
  std::fflush(stdout);
  if (!o.pass) ++g_failed;
}

void Log(const std::string& line) {
  std::fprintf(stderr, "%s\n", line.c_str());
}

std::string F(double v, int d = 4) { return FormatFixed(v, d); }

// 1 ---------------------------------------------------------------------------

Outcome FormulaExactness() {
  const double dcf = Dcf(0.1, 0.2);
  const double bce = BceLoss(std::vector<double>{1.0}, std::vector<double>{0.5});
  MagSpectrogram flat;
  flat.frames = FrameMatrix(40, 257);
  for (double& v : flat.frames.data) v = 0.25;
  const auto labels = GenerateLabels(flat);
  bool all_zero = true;
  for (double v : labels.values) all_zero &= v == 0.0;
  const bool ok = std::abs(dcf - 12.5) < kExactTol && std::abs(bce - std::log(2.0)) < kExactTol &&
                  all_zero;
  return {ok, "dcf(0.1,0.2)=" + FormatDouble(dcf) + " bce(1,0.5)-ln2=" +
                  FormatDouble(bce - std::log(2.0)) + " constant-input labels all zero=" +
                  (all_zero ? "yes" : "no")};
}

// 2 ---------------------------------------------------------------------------

// Loss through the single-step inference path, independent of the training code.
double StepLoss(const ModelWeights& m, const std::vector<float>& x, const std::vector<float>& z) {
  InferenceSession s(m);
  const std::size_t bins = static_cast<std::size_t>(m.arch.input_bins);
  std::vector<double> p, zt(z.begin(), z.end());
  for (std::size_t t = 0; t < z.size(); ++t) {
    std::vector<double> f(x.begin() + t * bins, x.begin() + (t + 1) * bins);
    p.push_back(s.Step(f));
  }
  return BceLoss(zt, p);
}

Outcome GradientSuite() {
  ArchSpec arch;
  arch.input_bins = 12;
  arch.conv = {{3, 2, 3}, {3, 2, 4}};
  arch.gru_units = 5;
  arch.fc_hidden = 4;
  double worst = 0.0;
  std::size_t checked = 0;
  for (int seed = 1; seed <= kGradSeeds; ++seed) {
    ModelWeights m = BuildModel(arch, static_cast<std::uint64_t>(seed));
    Rng rng(DeriveSeed(seed, "grad"));
    for (auto& t : m.tensors) {
      for (double& v : t.values) v += 0.1 * rng.Normal();
    }
    const std::size_t frames = 20;
    std::vector<float> x(frames * 12), z(frames);
    for (auto& v : x) v = static_cast<float>(rng.Normal());
    for (auto& v : z) v = static_cast<float>(rng.Uniform());
    const SequenceExample ex{x, z};
    Gradients g = Gradients::ZerosLike(m);
    ComputeGradients(m, std::span<const SequenceExample>(&ex, 1), g);
    const double h = 1e-6;
    for (std::size_t ti = 0; ti < m.tensors.size(); ++ti) {
      for (std::size_t k = 0; k < m.tensors[ti].size(); ++k) {
        ModelWeights a = m, b = m;
        a.tensors[ti].values[k] += h;
        b.tensors[ti].values[k] -= h;
        const double fd = (StepLoss(a, x, z) - StepLoss(b, x, z)) / (2 * h);
        const double an = g.tensors[ti][k];
        // Relative error with a floor so vanishing gradients compare absolutely.
        const double rel = std::abs(an - fd) / std::max({std::abs(an), std::abs(fd), 1e-5});
        worst = std::max(worst, rel);
        ++checked;
      }
    }
  }
  return {worst < kGradRelTol, std::to_string(checked) + " parameters over " +
                                   std::to_string(kGradSeeds) + " seeds, worst relative error " +
                                   FormatDouble(worst) + " (limit 1e-4)"};
}

// 3 ---------------------------------------------------------------------------

Outcome AucOracle() {
  Rng rng(3);
  double worst = 0.0;
  for (int set = 0; set < kAucSets; ++set) {
    const std::size_t n = 2 + rng.Index(49);
    std::vector<double> s(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = rng.Uniform() < 0.5 ? 1 : 0;
      s[i] = set % 2 ? std::floor(rng.Uniform() * 6) / 6 : rng.Uniform();
    }
    y[0] = 1;
    y[1] = 0;
    double num = 0, den = 0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (y[i] == 1 && y[j] == 0) {
          den += 1;
          num += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
        }
      }
    }
    worst = std::max(worst, std::abs(Auc(s, y) - num / den));
  }
  return {worst <= kAucOracleTol,
          std::to_string(kAucSets) + " sets, worst deviation " + FormatDouble(worst)};
}

// 4 ---------------------------------------------------------------------------

Outcome StreamingEquivalence() {
  double worst = 0.0;
  for (int i = 0; i < kStreamSequences; ++i) {
    const ModelWeights m = BuildModel(i % 2 ? ArchTag::kAir : ArchTag::kBc,
                                      DeriveSeed(4, "stream-model", i));
    Rng rng(DeriveSeed(4, "stream-input", i));
    const std::size_t frames = 20 + rng.Index(80);
    const std::size_t bins = static_cast<std::size_t>(m.arch.input_bins);
    std::vector<float> x(frames * bins);
    for (auto& v : x) v = static_cast<float>(rng.Normal());
    const auto whole = PredictSequence(m, x, frames);
    InferenceSession s(m);
    for (std::size_t t = 0; t < frames; ++t) {
      std::vector<double> f(x.begin() + t * bins, x.begin() + (t + 1) * bins);
      worst = std::max(worst, std::abs(s.Step(f) - whole[t]));
    }
  }
  return {worst <= kStreamTol, std::to_string(kStreamSequences) +
                                   " sequences, worst per-frame difference " + FormatDouble(worst)};
}

// 8 ---------------------------------------------------------------------------

Outcome ParameterCounts() {
  const std::size_t bc = CountParams(BuildModel(ArchTag::kBc, 1));
  const std::size_t air = CountParams(BuildModel(ArchTag::kAir, 1));
  const bool ok = bc >= 4250 && bc <= 5750 && air >= 49300 && air <= 66700;
  return {ok, "bc " + std::to_string(bc) + " in [4250, 5750], air " + std::to_string(air) +
                  " in [49300, 66700]"};
}

// 10 --------------------------------------------------------------------------

Outcome NoiseCorrection() {
  Rng rng(10);
  const double sigma = 0.01;
  AudioBuffer a;
  a.samples.resize(3000 * 160 + 160);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const std::size_t f = i / 160;
    const bool speech = f >= 100 && (f / 50) % 2 == 1;
    // Speech power 9 sigma^2 on top of the noise: 10 dB.
    a.samples[i] = sigma * rng.Normal() + (speech ? 3.0 * sigma * rng.Normal() : 0.0);
  }
  const SpectrogramConfig cfg;
  const auto mag = StftMagnitude(a, cfg);
  double wsum = 0;
  const int n = cfg.frame_samples();
  for (int i = 0; i < n; ++i) {
    wsum += std::pow(0.5 - 0.5 * std::cos(2 * std::numbers::pi * i / n), 2);
  }
  const double truth = sigma * sigma * wsum;
  auto ratio = [&](bool corrected) {
    DspVadParams p;
    p.update_on_silence = corrected;
    const auto track = RunDspVad(mag, p);
    double m = 0;
    const auto& g = track.noise.gamma_n;
    for (std::size_t k = 1; k + 1 < g.size(); ++k) m += g[k];
    return m / static_cast<double>(g.size() - 2) / truth;
  };
  const double good = ratio(true), bad = ratio(false);
  const bool ok = good <= kCorrectedMaxRatio && good >= 1.0 / kCorrectedMaxRatio &&
                  bad > kUncorrectedMinRatio;
  return {ok, "corrected/true " + F(good, 3) + ", uncorrected/true " + F(bad, 3)};
}

// 5, 6, 7, 9 ------------------------------------------------------------------

struct TrainedRun {
  Corpus corpus;
  ModelWeights model;
  ModelWeights int8;
  double seconds = 0.0;
  double initial_loss = 0.0;
  double best_loss = 0.0;
  int epochs = 0;
};

TrainedRun BuildAndTrain(const fs::path& work, std::uint64_t seed, bool reuse) {
  TrainedRun run;
  const auto corpus_dir = work / "corpus";
  const auto model_path = work / "model.bin";
  const auto t0 = Clock::now();
  CorpusConfig cfg;  // standard corpus: 240 train / 30 test clips of 30 s
  cfg.seed = seed;
  if (reuse && fs::exists(corpus_dir / "manifest.jsonl")) {
    Log("reusing corpus in " + corpus_dir.string());
    run.corpus = LoadCorpus(corpus_dir.string());
  } else {
    Log("synthesizing corpus");
    run.corpus = BuildCorpus(cfg);
    WriteCorpus(corpus_dir.string(), run.corpus);
  }
  if (reuse && fs::exists(model_path)) {
    Log("reusing model " + model_path.string());
    run.model = LoadModel(model_path.string());
    run.initial_loss = std::nan("");
    run.best_loss = MeanLoss(run.model, run.corpus.test);
  } else {
    ArchSpec arch = ArchSpec::Bc();
    FitInputStandardization(arch, run.corpus.train);
    TrainSchedule sch = TrainSchedule::Desk();
    sch.seed = seed;
    const auto result = Train(BuildModel(arch, DeriveSeed(seed, "init")), run.corpus.train,
                              run.corpus.test, sch, [](const EpochRecord& e) {
                                Log("epoch " + std::to_string(e.epoch) + " train " +
                                    F(e.train_loss, 6) + " test " + F(e.test_loss, 6));
                              });
    run.model = result.best;
    run.initial_loss = result.initial_test_loss;
    run.best_loss = result.best_test_loss;
    run.epochs = static_cast<int>(result.history.size());
    SaveModel(model_path.string(), run.model);
    std::ofstream(work / "history.csv") << FormatHistory(result.history);
  }
  run.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  // Round-trip the float model through its file so evaluation sees stored weights.
  run.model = LoadModel(model_path.string());
  run.int8 = QuantizeWeights(run.model);
  SaveModel((work / "model_int8.bin").string(), run.int8);
  return run;
}

int Main(int argc, char** argv) {
  CLI::App app{"acceptance checks"};
  std::string work = "acceptance_work";
  std::uint64_t seed = 1;
  bool reuse = false;
  int threads = 1;
  app.add_option("--work", work, "working directory for corpus, model and reports");
  app.add_option("--seed", seed, "corpus and training seed");
  app.add_option("--threads", threads, "evaluation worker threads");
  app.add_flag("--reuse", reuse, "reuse corpus and model already in the working directory");
  CLI11_PARSE(app, argc, argv);
  fs::create_directories(work);

  Report(1, "formula exactness", FormulaExactness());
  Report(2, "gradient suite", GradientSuite());
  Report(3, "auc oracle", AucOracle());
  Report(4, "streaming equivalence", StreamingEquivalence());

  const TrainedRun run = BuildAndTrain(work, seed, reuse);
  Log("corpus + training took " + F(run.seconds, 1) + " s");

  auto dsp = MakeDspDetector(DspVadParams{}, "dsp");
  auto nf = MakeNeuralDetector(std::make_shared<ModelWeights>(run.model), "neural-float");
  auto ni = MakeNeuralDetector(std::make_shared<ModelWeights>(run.int8), "neural-int8");
  const std::vector<const Detector*> dets{dsp.get(), nf.get(), ni.get()};
  EvalPlan plan;
  plan.snr_db = {-5.0, 0.0, 5.0, 10.0, 15.0, 20.0};
  plan.noise_types = {"white", "pink", "babble", "clean"};
  plan.threads = threads;
  Log("evaluating");
  const auto reports = EvaluateDetectors(dets, run.corpus.manifest, run.corpus.config, plan);
  for (const auto& r : reports) {
    std::ofstream(fs::path(work) / ("report_" + r.detector + ".csv")) << r.ToCsv();
  }
  std::ofstream(fs::path(work) / "dcf_table.txt") << FormatDcfTable(reports);
  const EvalReport& rd = reports[0];
  const EvalReport& rf = reports[1];
  const EvalReport& ri = reports[2];

  {
    // Every noisy condition at 15 and 20 dB plus the clean condition.
    bool ok = run.seconds <= kTrainBudgetS;
    std::string detail;
    double min_auc = 1.0, min_acc = 1.0;
    for (const auto& row : rf.rows) {
      if (row.snr_db && *row.snr_db < 15.0) continue;
      min_auc = std::min(min_auc, row.auc);
      min_acc = std::min(min_acc, row.acc);
      detail += row.condition + (row.snr_db ? "@" + F(*row.snr_db, 0) : "") + " auc " +
                F(row.auc) + " acc " + F(row.acc) + "; ";
    }
    ok = ok && min_auc >= kMinAuc15 && min_acc >= kMinAcc15;
    detail += "min auc " + F(min_auc) + " acc " + F(min_acc) + ", corpus+train " +
              F(run.seconds / 60.0, 1) + " min";
    Report(5, "trained bc-vad at >= 15 dB", {ok, detail});
  }
  {
    bool ok = true;
    std::string detail = "babble dcf% bc/dsp:";
    for (double snr : {-5.0, 0.0, 5.0, 10.0, 15.0}) {
      const ReportRow* b = rf.Find("babble", snr);
      const ReportRow* d = rd.Find("babble", snr);
      ok = ok && b && d && b->dcf_pct < d->dcf_pct;
      detail += " " + F(snr, 0) + "dB " + F(b->dcf_pct, 2) + "/" + F(d->dcf_pct, 2);
    }
    const ReportRow* w20 = rd.Find("white", 20.0);
    ok = ok && w20->acc >= kMinDspAccWhite20;
    detail += "; dsp white@20 acc " + F(w20->acc);
    Report(6, "bc-vad beats dsp-vad on babble", {ok, detail});
  }
  {
    bool ok = true;
    std::string detail;
    for (const char* noise : {"white", "pink", "babble"}) {
      const ReportRow* f = rf.Find(noise, 15.0);
      const ReportRow* q = ri.Find(noise, 15.0);
      ok = ok && q->acc >= f->acc - kMaxInt8AccDrop;
      detail += std::string(noise) + " acc float " + F(f->acc) + " int8 " + F(q->acc) + "; ";
    }
    const std::size_t bytes = fs::file_size(fs::path(work) / "model_int8.bin");
    ok = ok && bytes <= kMaxInt8FileBytes;
    detail += "int8 file " + std::to_string(bytes) + " bytes";
    Report(7, "int8 quantization", {ok, detail});
  }
  Report(8, "parameter counts", ParameterCounts());
  {
    StreamingVad vad(MakeNeuralDetector(std::make_shared<ModelWeights>(run.int8), "int8"));
    Rng rng(9);
    const std::size_t hop = SpectrogramConfig{}.hop_samples();
    std::vector<double> chunk(hop);
    std::vector<FrameResult> out;
    for (double& v : chunk) v = 0.05 * rng.Normal();
    vad.Push(chunk, out);
    std::vector<double> times;
    for (int i = 0; i < kLatencyFrames; ++i) {
      for (double& v : chunk) v = 0.05 * rng.Normal();
      const auto t0 = Clock::now();
      vad.Push(chunk, out);
      times.push_back(std::chrono::duration<double, std::milli>(Clock::now() - t0).count());
    }
    const auto s = SummarizeLatency(times);
    Report(9, "int8 per-frame latency",
           {s.p95_ms < kMaxP95Ms, std::to_string(s.frames) + " frames, mean " + F(s.mean_ms, 5) +
                                      " ms, p95 " + F(s.p95_ms, 5) + " ms"});
  }
  Report(10, "noise update correction", NoiseCorrection());

  std::printf("%d of 10 criteria passed\n", 10 - g_failed);
  return g_failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return Main(argc, argv);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "acceptance aborted: %s\n", e.what());
    return 1;
  }
}
