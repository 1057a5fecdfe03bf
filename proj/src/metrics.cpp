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

#include "bcvad/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "bcvad/error.hpp"
#include "bcvad/text.hpp"

namespace bcvad {
namespace {

void CheckPair(std::span<const double> scores, std::span<const int> truth) {
  Require(scores.size() == truth.size(), ErrorCode::kConfig,
          "scores and truth differ in length");
  Require(!scores.empty(), ErrorCode::kEmptyInput, "no frames to score");
}

std::string Num(double v) { return FormatFixed(v, 6); }

}  // namespace

ErrorRates ComputeErrorRates(std::span<const double> scores, std::span<const int> truth,
                             double threshold) {
  CheckPair(scores, truth);
  ErrorRates r;
  std::size_t miss = 0, fa = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool on = scores[i] > threshold;
    if (truth[i] != 0) {
      ++r.n_speech;
      if (!on) ++miss;
    } else {
      ++r.n_nonspeech;
      if (on) ++fa;
    }
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  r.mr = r.n_speech ? static_cast<double>(miss) / r.n_speech : nan;
  r.far = r.n_nonspeech ? static_cast<double>(fa) / r.n_nonspeech : nan;
  if (!r.n_speech) r.warning = "no speech frames: miss rate undefined";
  if (!r.n_nonspeech) r.warning = "no non-speech frames: false alarm rate undefined";
  return r;
}

double Dcf(double mr, double far) {
  Require(mr >= 0.0 && mr <= 1.0 && far >= 0.0 && far <= 1.0, ErrorCode::kConfig,
          "error rates must lie in [0, 1]");
  return 100.0 * (0.75 * mr + 0.25 * far);
}

double Accuracy(std::span<const double> scores, std::span<const int> truth, double threshold) {
  CheckPair(scores, truth);
  std::size_t hit = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if ((scores[i] > threshold) == (truth[i] != 0)) ++hit;
  }
  return static_cast<double>(hit) / static_cast<double>(scores.size());
}

double Auc(std::span<const double> scores, std::span<const int> truth) {
  CheckPair(scores, truth);
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  double pos = 0, neg = 0;
  for (int t : truth) (t ? pos : neg) += 1;
  Require(pos > 0 && neg > 0, ErrorCode::kUndefined, "AUC needs both classes");

  // Walk thresholds from high to low; each group of tied scores adds one
  // trapezoid.
  double tp = 0, fp = 0, area = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    const double s = scores[order[i]];
    double dtp = 0, dfp = 0;
    while (i < order.size() && scores[order[i]] == s) {
      (truth[order[i]] ? dtp : dfp) += 1;
      ++i;
    }
    area += dfp * (tp + 0.5 * dtp);
    tp += dtp;
    fp += dfp;
  }
  return area / (pos * neg);
}

ReportRow ScoreCondition(const std::string& condition, std::optional<double> snr_db,
                         std::span<const double> scores, std::span<const int> truth) {
  ReportRow row;
  row.condition = condition;
  row.snr_db = snr_db;
  const ErrorRates er = ComputeErrorRates(scores, truth, 0.5);
  row.mr = er.mr;
  row.far = er.far;
  row.n_speech = er.n_speech;
  row.n_nonspeech = er.n_nonspeech;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  row.dcf_pct = er.warning.empty() ? Dcf(er.mr, er.far) : nan;
  row.acc = Accuracy(scores, truth, 0.5);
  row.auc = er.warning.empty() ? Auc(scores, truth) : nan;
  return row;
}

std::string EvalReport::ToCsv() const {
  std::string out = "condition,snr_db,mr,far,dcf_pct,acc,auc,n_speech,n_nonspeech\n";
  for (const auto& r : rows) {
    out += r.condition + "," + (r.snr_db ? FormatDouble(*r.snr_db) : std::string("NA")) + "," +
           Num(r.mr) + "," + Num(r.far) + "," + Num(r.dcf_pct) + "," + Num(r.acc) + "," +
           Num(r.auc) + "," + std::to_string(r.n_speech) + "," + std::to_string(r.n_nonspeech) +
           "\n";
  }
  return out;
}

const ReportRow* EvalReport::Find(const std::string& condition,
                                  std::optional<double> snr_db) const {
  for (const auto& r : rows) {
    if (r.condition == condition && r.snr_db == snr_db) return &r;
  }
  return nullptr;
}

std::string FormatDcfTable(std::span<const EvalReport> reports) {
  std::string out;
  for (const auto& rep : reports) {
    std::vector<double> snrs;
    std::vector<std::string> conds;
    for (const auto& r : rep.rows) {
      if (r.snr_db && std::find(snrs.begin(), snrs.end(), *r.snr_db) == snrs.end()) {
        snrs.push_back(*r.snr_db);
      }
      if (std::find(conds.begin(), conds.end(), r.condition) == conds.end()) {
        conds.push_back(r.condition);
      }
    }
    std::sort(snrs.begin(), snrs.end());
    out += "DCF% " + rep.detector + "\n";
    std::string head = "noise     ";
    for (double s : snrs) {
      std::string c = FormatDouble(s) + "dB";
      head += std::string(c.size() < 9 ? 9 - c.size() : 1, ' ') + c;
    }
    out += head + "        NA\n";
    for (const auto& c : conds) {
      std::string line = c;
      line.resize(std::max<std::size_t>(line.size(), 10), ' ');
      for (double s : snrs) {
        const ReportRow* r = rep.Find(c, s);
        std::string v = r ? FormatFixed(r->dcf_pct, 2) : "-";
        line += std::string(v.size() < 9 ? 9 - v.size() : 1, ' ') + v;
      }
      const ReportRow* na = rep.Find(c, std::nullopt);
      std::string v = na ? FormatFixed(na->dcf_pct, 2) : "-";
      line += std::string(v.size() < 10 ? 10 - v.size() : 1, ' ') + v;
      out += line + "\n";
    }
    out += "\n";
  }
  return out;
}

}  // namespace bcvad
