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

// Frame-level detection scores: miss and false-alarm rates, DCF, accuracy
// and ROC area, with the per-condition report table.

#ifndef BCVAD_METRICS_HPP_
#define BCVAD_METRICS_HPP_

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace bcvad {

// Decisions are score > threshold.
struct ErrorRates {
  double mr = 0.0;   // NaN when truth has no speech frames
  double far = 0.0;  // NaN when truth has no non-speech frames
  std::size_t n_speech = 0;
  std::size_t n_nonspeech = 0;
  std::string warning;  // set when a rate is undefined
};

ErrorRates ComputeErrorRates(std::span<const double> scores, std::span<const int> truth,
                             double threshold = 0.5);

// 100 * (0.75 mr + 0.25 far).
double Dcf(double mr, double far);

double Accuracy(std::span<const double> scores, std::span<const int> truth,
                double threshold = 0.5);

// Trapezoidal ROC area; ties between classes count one half.
double Auc(std::span<const double> scores, std::span<const int> truth);

struct ReportRow {
  std::string condition;         // noise type
  std::optional<double> snr_db;  // empty for the clean condition
  double mr = 0.0;
  double far = 0.0;
  double dcf_pct = 0.0;
  double acc = 0.0;
  double auc = 0.0;
  std::size_t n_speech = 0;
  std::size_t n_nonspeech = 0;
};

ReportRow ScoreCondition(const std::string& condition, std::optional<double> snr_db,
                         std::span<const double> scores, std::span<const int> truth);

struct EvalReport {
  std::string detector;
  std::vector<ReportRow> rows;

  // condition,snr_db,mr,far,dcf_pct,acc,auc,n_speech,n_nonspeech
  std::string ToCsv() const;
  const ReportRow* Find(const std::string& condition, std::optional<double> snr_db) const;
};

// DCF% per noise type (rows) and SNR (columns), one block per detector.
std::string FormatDcfTable(std::span<const EvalReport> reports);

}  // namespace bcvad

#endif  // BCVAD_METRICS_HPP_
