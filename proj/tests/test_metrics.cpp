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

#include "bcvad/error.hpp"
#include "bcvad/metrics.hpp"
#include "bcvad/rng.hpp"

namespace bcvad {
namespace {

using D = std::vector<double>;
using I = std::vector<int>;

// Probability that a random speech frame outscores a random non-speech frame.
double PairwiseAuc(const D& s, const I& y) {
  double num = 0, den = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[i] != 1 || y[j] != 0) continue;
      den += 1;
      num += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
    }
  }
  return num / den;
}

void RandomCase(Rng& rng, std::size_t n, D& s, I& y, int levels = 0) {
  s.clear();
  y.clear();
  for (std::size_t i = 0; i < n; ++i) {
    y.push_back(rng.Uniform() < 0.4 ? 1 : 0);
    double v = rng.Uniform();
    if (levels > 0) v = std::floor(v * levels) / levels;  // force ties
    s.push_back(std::clamp(v + 0.2 * y.back(), 0.0, 1.0));
  }
  y[0] = 1;
  y[1] = 0;
}

TEST(ErrorRates, Examples) {
  auto r = ComputeErrorRates(D{1, 1, 0, 0}, I{1, 1, 0, 0});
  EXPECT_EQ(r.mr, 0.0);
  EXPECT_EQ(r.far, 0.0);
  r = ComputeErrorRates(D{1, 1, 1, 1}, I{1, 1, 0, 0});
  EXPECT_EQ(r.mr, 0.0);
  EXPECT_EQ(r.far, 1.0);
  r = ComputeErrorRates(D{0.9, 0.2, 0.8, 0.1}, I{1, 1, 0, 0}, 0.5);
  EXPECT_DOUBLE_EQ(r.mr, 0.5);
  EXPECT_DOUBLE_EQ(r.far, 0.5);
  EXPECT_EQ(r.n_speech, 2u);
  EXPECT_EQ(r.n_nonspeech, 2u);
  EXPECT_TRUE(r.warning.empty());
}

TEST(ErrorRates, SingleClassGivesNanWithWarning) {
  const auto r = ComputeErrorRates(D{0.9, 0.2}, I{1, 1});
  EXPECT_DOUBLE_EQ(r.mr, 0.5);
  EXPECT_TRUE(std::isnan(r.far));
  EXPECT_FALSE(r.warning.empty());
  const auto s = ComputeErrorRates(D{0.9, 0.2}, I{0, 0});
  EXPECT_TRUE(std::isnan(s.mr));
  EXPECT_DOUBLE_EQ(s.far, 0.5);
}

TEST(ErrorRates, StrictThreshold) {
  const auto r = ComputeErrorRates(D{0.5, 0.5}, I{1, 0});
  EXPECT_EQ(r.mr, 1.0);
  EXPECT_EQ(r.far, 0.0);
  EXPECT_THROW(ComputeErrorRates(D{0.5}, I{1, 0}), Error);
}

TEST(Dcf, Examples) {
  EXPECT_DOUBLE_EQ(Dcf(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(Dcf(0.1, 0.2), 12.5);
  EXPECT_DOUBLE_EQ(Dcf(1, 1), 100.0);
  try {
    Dcf(1.2, 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kConfig);
  }
  EXPECT_THROW(Dcf(0.0, -0.1), Error);
}

TEST(Accuracy, Examples) {
  EXPECT_DOUBLE_EQ(Accuracy(D{0.9, 0.1}, I{1, 0}), 1.0);
  EXPECT_DOUBLE_EQ(Accuracy(D{0.4, 0.6}, I{1, 0}), 0.0);
  EXPECT_DOUBLE_EQ(Accuracy(D{0.5, 0.5, 0.5, 0.5}, I{1, 0, 1, 0}), 0.5);
  try {
    Accuracy(D{}, I{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyInput);
  }
}

TEST(Auc, Examples) {
  EXPECT_DOUBLE_EQ(Auc(D{0.9, 0.8, 0.2, 0.1}, I{1, 1, 0, 0}), 1.0);
  EXPECT_DOUBLE_EQ(Auc(D{0.3, 0.3, 0.3, 0.3}, I{1, 0, 0, 1}), 0.5);
  try {
    Auc(D{0.1, 0.2}, I{1, 1});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUndefined);
  }
}

TEST(Auc, MatchesPairwiseOracle) {
  Rng rng(3);
  D s;
  I y;
  for (int trial = 0; trial < 200; ++trial) {
    RandomCase(rng, trial < 100 ? 12 : 80, s, y, trial % 3 == 0 ? 5 : 0);
    EXPECT_NEAR(Auc(s, y), PairwiseAuc(s, y), 1e-9) << trial;
  }
}

TEST(Auc, InvariantUnderMonotoneTransform) {
  Rng rng(4);
  D s, t;
  I y;
  for (int trial = 0; trial < 50; ++trial) {
    RandomCase(rng, 60, s, y, trial % 2 ? 7 : 0);
    t.clear();
    for (double v : s) t.push_back(std::exp(3 * v) - 7.0);
    EXPECT_NEAR(Auc(s, y), Auc(t, y), 1e-12);
    D inv;
    for (double v : s) inv.push_back(1.0 - v);
    EXPECT_NEAR(Auc(inv, y), 1.0 - Auc(s, y), 1e-12);
  }
}

TEST(Dcf, ThresholdSweepMinimumNotAboveHalf) {
  Rng rng(5);
  D s;
  I y;
  for (int trial = 0; trial < 50; ++trial) {
    RandomCase(rng, 50, s, y);
    const auto at_half = ComputeErrorRates(s, y, 0.5);
    double best = Dcf(at_half.mr, at_half.far);
    for (double thr = -0.01; thr <= 1.01; thr += 0.01) {
      const auto r = ComputeErrorRates(s, y, thr);
      best = std::min(best, Dcf(r.mr, r.far));
    }
    EXPECT_LE(best, Dcf(at_half.mr, at_half.far));
  }
}

TEST(Report, FieldsInRangeForRandomInputs) {
  Rng rng(6);
  D s;
  I y;
  for (int trial = 0; trial < 100; ++trial) {
    RandomCase(rng, 40, s, y, trial % 4);
    const auto row = ScoreCondition("white", 5.0, s, y);
    for (double v : {row.mr, row.far, row.acc, row.auc}) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
    EXPECT_GE(row.dcf_pct, 0.0);
    EXPECT_LE(row.dcf_pct, 100.0);
    EXPECT_EQ(row.n_speech + row.n_nonspeech, s.size());
    EXPECT_NEAR(row.dcf_pct, Dcf(row.mr, row.far), 1e-12);
  }
}

TEST(Report, CsvLayout) {
  EvalReport rep;
  rep.detector = "dsp";
  rep.rows.push_back(ScoreCondition("white", -5.0, D{0.9, 0.2, 0.8, 0.1}, I{1, 1, 0, 0}));
  rep.rows.push_back(ScoreCondition("clean", std::nullopt, D{0.9, 0.1}, I{1, 0}));
  const auto csv = rep.ToCsv();
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "condition,snr_db,mr,far,dcf_pct,acc,auc,n_speech,n_nonspeech");
  EXPECT_NE(csv.find("\nwhite,-5"), std::string::npos);
  EXPECT_NE(csv.find("\nclean,NA,"), std::string::npos);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
  ASSERT_NE(rep.Find("white", -5.0), nullptr);
  EXPECT_DOUBLE_EQ(rep.Find("white", -5.0)->dcf_pct, 50.0);
  EXPECT_EQ(rep.Find("white", 0.0), nullptr);
  EXPECT_NE(rep.Find("clean", std::nullopt), nullptr);
}

TEST(Report, DcfTableHasOneBlockPerDetector) {
  EvalReport a{"dsp", {}}, b{"neural-float", {}};
  for (double snr : {-5.0, 0.0}) {
    a.rows.push_back(ScoreCondition("pink", snr, D{0.9, 0.1}, I{1, 0}));
    b.rows.push_back(ScoreCondition("pink", snr, D{0.1, 0.9}, I{1, 0}));
  }
  const std::vector<EvalReport> reps{a, b};
  const auto table = FormatDcfTable(reps);
  EXPECT_NE(table.find("dsp"), std::string::npos);
  EXPECT_NE(table.find("neural-float"), std::string::npos);
  EXPECT_NE(table.find("pink"), std::string::npos);
  EXPECT_NE(table.find("100.0"), std::string::npos);
}

}  // namespace
}  // namespace bcvad
