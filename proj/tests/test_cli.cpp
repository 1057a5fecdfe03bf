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

// Drives the command-line tool as a subprocess.

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

Run Cli(const std::string& args, const fs::path& cwd) {
  const fs::path err_path = cwd / "stderr.txt";
  const std::string cmd = "cd '" + cwd.string() + "' && '" BCVAD_CLI_PATH "' " + args + " 2>'" +
                          err_path.string() + "'";
  Run r;
  std::FILE* p = popen(cmd.c_str(), "r");
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream e(err_path);
  r.err.assign(std::istreambuf_iterator<char>(e), std::istreambuf_iterator<char>());
  return r;
}

std::vector<std::string> Lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream is(text);
  for (std::string l; std::getline(is, l);) out.push_back(l);
  return out;
}

std::string LineStarting(const std::string& text, const std::string& prefix) {
  for (const auto& l : Lines(text)) {
    if (l.rfind(prefix, 0) == 0) return l;
  }
  return "";
}

// Minimal 16-bit PCM mono writer.
void WriteWav(const fs::path& path, const std::vector<double>& x, int rate = 16000) {
  std::ofstream f(path, std::ios::binary);
  auto u32 = [&](std::uint32_t v) { f.write(reinterpret_cast<const char*>(&v), 4); };
  auto u16 = [&](std::uint16_t v) { f.write(reinterpret_cast<const char*>(&v), 2); };
  f.write("RIFF", 4);
  u32(36 + 2 * std::uint32_t(x.size()));
  f.write("WAVEfmt ", 8);
  u32(16);
  u16(1);
  u16(1);
  u32(rate);
  u32(rate * 2);
  u16(2);
  u16(16);
  f.write("data", 4);
  u32(2 * std::uint32_t(x.size()));
  for (double v : x) u16(std::uint16_t(std::int16_t(std::lround(v * 32767))));
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("bcvad_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  // A small corpus: 8 s clips keep the whole pipeline under a few seconds.
  void SmallCorpus(const std::string& name, int train, int test, int seed = 3) {
    const auto r = Cli("--seed " + std::to_string(seed) + " --out " + name +
                           " --set clip_len_s=8 --set source_len_s=16 --set train_speakers=2"
                           " --set test_speakers=1 synth --train-clips " +
                           std::to_string(train) + " --test-clips " + std::to_string(test),
                       dir_);
    ASSERT_EQ(r.code, 0) << r.err;
    synth_out_ = r.out;
  }

  fs::path dir_;
  std::string synth_out_;
};

TEST_F(CliTest, SynthBalancedAndReproducible) {
  SmallCorpus("c1", 30, 30);
  EXPECT_NE(LineStarting(synth_out_, "train:").find("low 10 medium 10 high 10"), std::string::npos)
      << synth_out_;
  const auto hash = LineStarting(synth_out_, "manifest hash");
  ASSERT_FALSE(hash.empty());
  const auto train_spk = LineStarting(synth_out_, "train speakers:");
  const auto test_spk = LineStarting(synth_out_, "test speakers:");
  std::istringstream ts(test_spk.substr(test_spk.find(':') + 1));
  for (std::string s; ts >> s;) EXPECT_EQ(train_spk.find(s), std::string::npos) << s;
  SmallCorpus("c2", 30, 30);
  EXPECT_EQ(LineStarting(synth_out_, "manifest hash"), hash);
  EXPECT_TRUE(fs::exists(dir_ / "c1" / "manifest.jsonl"));
}

TEST_F(CliTest, TrainQuantizeEvalStreamBench) {
  SmallCorpus("corpus", 8, 3);
  auto r = Cli("--out run --seed 2 train --steps-per-epoch 15 --max-epochs 3", dir_);
  ASSERT_EQ(r.code, 0) << r.err;
  const auto hist = Lines([&] {
    std::ifstream f(dir_ / "run" / "history.csv");
    return std::string(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());
  }());
  const auto summary = LineStarting(r.out, "epochs ");
  EXPECT_EQ(summary.substr(0, summary.find(',')), "epochs " + std::to_string(hist.size()));

  r = Cli("--out run quantize", dir_);
  ASSERT_EQ(r.code, 0) << r.err;
  ASSERT_TRUE(fs::exists(dir_ / "run" / "model_int8.bin"));
  EXPECT_LE(fs::file_size(dir_ / "run" / "model_int8.bin"), 35u * 1024);

  r = Cli("--out run eval --snr-list 5 --noise-types pink,clean --model-int8 run/model_int8.bin", dir_);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("dsp"), std::string::npos);
  EXPECT_NE(r.out.find("neural-int8"), std::string::npos);
  for (const char* d : {"dsp", "neural-float", "neural-int8"}) {
    std::ifstream f(dir_ / "run" / (std::string("report_") + d + ".csv"));
    const std::string csv((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    const auto lines = Lines(csv);
    ASSERT_EQ(lines.size(), 3u) << d;
    EXPECT_EQ(lines[0], "condition,snr_db,mr,far,dcf_pct,acc,auc,n_speech,n_nonspeech");
    EXPECT_EQ(lines[2].rfind("clean,NA,", 0), 0u);
  }
  const auto first_eval = r.out;
  r = Cli("--out run eval --snr-list 5 --noise-types pink,clean --model-int8 run/model_int8.bin", dir_);
  EXPECT_EQ(r.out, first_eval);

  std::vector<double> tone(16000);
  for (std::size_t i = 0; i < tone.size(); ++i) tone[i] = 0.1 * std::sin(0.05 * double(i));
  WriteWav(dir_ / "tone.wav", tone);
  r = Cli("--out run stream tone.wav", dir_);
  ASSERT_EQ(r.code, 0) << r.err;
  const auto lines = Lines(r.out);
  ASSERT_EQ(lines.size(), 99u);
  EXPECT_EQ(lines[0].rfind("0,0,", 0), 0u);
  EXPECT_EQ(lines[98].rfind("98,980,", 0), 0u);
  EXPECT_NE(r.err.find("frames 99 mean_ms"), std::string::npos) << r.err;
  r = Cli("--out run stream tone.wav --detector dsp --eta 2.0", dir_);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(Lines(r.out).size(), 99u);

  r = Cli("--out run bench --frames 10000", dir_);
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = Lines(r.out);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[1].rfind("float32,", 0), 0u);
  EXPECT_NE(rows[1].find(",4409,"), std::string::npos);
  EXPECT_EQ(rows[2].rfind("int8,", 0), 0u);
}

TEST_F(CliTest, ExitCodes) {
  EXPECT_EQ(Cli("", dir_).code, 2);
  EXPECT_EQ(Cli("fly", dir_).code, 2);
  EXPECT_EQ(Cli("synth --train-clips many", dir_).code, 2);
  EXPECT_EQ(Cli("--config missing.cfg synth", dir_).code, 2);
  EXPECT_EQ(Cli("--set nokeyvalue synth", dir_).code, 2);
  EXPECT_EQ(Cli("train --corpus nowhere", dir_).code, 3);
  EXPECT_EQ(Cli("stream absent.wav --detector dsp", dir_).code, 3);
  EXPECT_EQ(Cli("bench --frames 100", dir_).code, 2);
  {
    std::ofstream f(dir_ / "junk.wav");
    f << "this is not a wav file at all, not even close";
  }
  const auto r = Cli("stream junk.wav --detector dsp", dir_);
  EXPECT_EQ(r.code, 4);
  EXPECT_NE(r.err.find("error"), std::string::npos);
  std::vector<double> x(8000, 0.0);
  WriteWav(dir_ / "rate.wav", x, 8000);
  EXPECT_EQ(Cli("stream rate.wav --detector dsp", dir_).code, 4);
}

TEST_F(CliTest, ConfigFileAndFlagPrecedence) {
  {
    std::ofstream f(dir_ / "run.cfg");
    f << "# small corpus\nclip_len_s = 8\nsource_len_s = 16\ntrain_speakers = 1\n"
         "test_speakers = 1\ntrain_clips = 3\ntest_clips = 3\nseed = 9\n";
  }
  auto r = Cli("--config run.cfg --out a synth", dir_);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("seed 9"), std::string::npos);
  EXPECT_NE(LineStarting(r.out, "train:").find("3 clips"), std::string::npos);
  r = Cli("--config run.cfg --out b --seed 10 synth --train-clips 6", dir_);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("seed 10"), std::string::npos);
  EXPECT_NE(LineStarting(r.out, "train:").find("6 clips"), std::string::npos);
}

}  // namespace
