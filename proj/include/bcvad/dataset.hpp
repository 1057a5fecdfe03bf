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

// Clip assembly, balanced corpus construction, and the on-disk corpus layout.

#ifndef BCVAD_DATASET_HPP_
#define BCVAD_DATASET_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bcvad/labels.hpp"
#include "bcvad/signal.hpp"
#include "bcvad/synth.hpp"
#include "bcvad/text.hpp"

namespace bcvad {

enum class SpeechClass { kLow, kMedium, kHigh };

const char* SpeechClassName(SpeechClass cls);
SpeechClass ParseSpeechClass(const std::string& name);
// low < 25%, medium in [25%, 60%], high > 60%.
bool InSpeechClass(double speech_fraction, SpeechClass cls);

// One single-speaker source with parallel channels; labels from the air channel.
struct Recording {
  AudioBuffer air;
  AudioBuffer bc;
  LabelTrack labels;  // binary
};

Recording MakeRecording(SpeechPair pair, const SpectrogramConfig& cfg = {});

struct CropRecord {
  std::size_t source = 0;
  std::size_t begin_frame = 0;  // first frame, label 0
  std::size_t end_frame = 0;    // one past the last frame, label[end - 1] == 0
};

struct AssembledClip {
  AudioBuffer air;
  AudioBuffer bc;
  LabelTrack labels;  // binary, one per STFT frame of the clip
  std::vector<CropRecord> crops;
  int attempts = 0;
};

// Crops and concatenates source segments into exactly clip_len_s seconds.
// Crop boundaries only fall on non-speech frames; crops are redrawn until the
// clip's speech fraction lands in the target class (at most 1000 attempts).
AssembledClip AssembleClip(std::span<const Recording> sources, SpeechClass target,
                           double clip_len_s, std::uint64_t seed,
                           const SpectrogramConfig& cfg = {});

enum class Modality { kBc, kAir };

struct CorpusConfig {
  Modality modality = Modality::kBc;
  int train_clips = 240;
  int test_clips = 30;
  int train_speakers = 16;
  int test_speakers = 4;
  double clip_len_s = 30.0;
  double source_len_s = 45.0;
  int sources_per_clip = 2;
  double snr_mean_db = 15.0;
  double snr_std_db = 5.0;
  double level_mean_dbfs = -28.0;
  double level_std_dbfs = 10.0;
  double clean_fraction = 0.1;  // clips mixed without interference
  std::uint64_t seed = 1;

  // Air modality defaults: SNR ~ N(5, 10).
  static CorpusConfig ForModality(Modality m);
  // Reads keys from a flat config; unknown keys are ignored.
  static CorpusConfig FromKeyValue(const KeyValueConfig& kv, Modality fallback = Modality::kBc);
  KeyValueConfig ToKeyValue() const;
  FeatureConfig features() const;
  void Validate() const;
};

struct ClipEntry {
  std::string clip_id;
  std::string split;  // "train" | "test"
  SpeechClass speech_class = SpeechClass::kLow;
  std::uint64_t speaker_seed = 0;
  std::uint64_t assembly_seed = 0;
  std::string interference = "none";  // "none" or "<distractor>+<noise>"
  std::uint64_t interference_seed = 0;
  double interference_mix_db = 0.0;   // noise level relative to the distractor term
  double snr_db = 0.0;
  double level_dbfs = 0.0;
  double speech_fraction = 0.0;
};

struct ClipManifest {
  double clip_len_s = 30.0;
  std::vector<ClipEntry> entries;  // sorted by clip_id

  std::vector<const ClipEntry*> Split(const std::string& split) const;
  std::string ToJsonLines() const;
  static ClipManifest FromJsonLines(const std::string& text, double clip_len_s);
};

// Time-major sequences of equal length, flattened.
struct SequenceSet {
  std::size_t count = 0;
  std::size_t frames = 0;
  std::size_t bins = 0;
  std::vector<float> features;  // count x frames x bins
  std::vector<float> targets;   // count x frames, soft labels

  std::span<const float> Features(std::size_t i) const {
    return {features.data() + i * frames * bins, frames * bins};
  }
  std::span<const float> Targets(std::size_t i) const {
    return {targets.data() + i * frames, frames};
  }
};

struct Corpus {
  CorpusConfig config;
  ClipManifest manifest;
  SequenceSet train;
  SequenceSet test;
};

// Clean signal of one manifest clip in the corpus modality, with its binary
// labels (regenerated deterministically from the entry's seeds).
struct CleanClip {
  AudioBuffer speech;
  LabelTrack labels;
  std::vector<CropRecord> crops;
};
CleanClip MaterializeClip(const ClipEntry& entry, const CorpusConfig& config);

// Source recordings for a clip are talkative in proportion to its class.
std::pair<double, double> PauseDensityRange(SpeechClass cls);

// Interference term e + g * noise for a "<distractor>+<noise>" spec, or a
// single kind ("white", "pink", "babble", "distractor_speech").
AudioBuffer MakeInterference(const std::string& spec, std::uint64_t seed,
                             double duration_s, double mix_db = 0.0,
                             int sample_rate = kDefaultSampleRate);

// speech + interference at snr_db (skipped when interference is empty), then
// rescaled to level_dbfs.
AudioBuffer MixForModel(const AudioBuffer& speech, const LabelTrack& labels,
                        const AudioBuffer* interference, double snr_db,
                        double level_dbfs);

Corpus BuildCorpus(const CorpusConfig& config);

// Features with header: magic, dtype tag, dims, feature config hash.
struct ArrayFile {
  std::vector<std::uint64_t> dims;
  std::uint64_t config_hash = 0;
  std::vector<float> data;
};
void WriteArrayFile(const std::string& path, const ArrayFile& array);
ArrayFile ReadArrayFile(const std::string& path);

// Directory layout: corpus.cfg, manifest.jsonl, {train,test}_{features,labels}.bin
void WriteCorpus(const std::string& dir, const Corpus& corpus);
Corpus LoadCorpus(const std::string& dir);

}  // namespace bcvad

#endif  // BCVAD_DATASET_HPP_
