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

#include "bcvad/dataset.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "bcvad/error.hpp"
#include "bcvad/rng.hpp"
#include "json.hpp"

namespace bcvad {
namespace {

constexpr int kMaxAssemblyAttempts = 1000;
constexpr std::size_t kCandidatesPerCrop = 8;
constexpr std::size_t kMinCropFrames = 50;
constexpr std::size_t kMaxCropFrames = 600;

double ClassCenter(SpeechClass cls) {
  switch (cls) {
    case SpeechClass::kLow: return 0.12;
    case SpeechClass::kMedium: return 0.42;
    case SpeechClass::kHigh: return 0.80;
  }
  return 0.5;
}

struct SourceIndex {
  std::vector<std::size_t> zeros;   // frames with label 0
  std::vector<std::size_t> prefix;  // prefix[i] = speech frames in [0, i)
};

SourceIndex IndexSource(const LabelTrack& labels) {
  SourceIndex idx;
  idx.prefix.assign(labels.size() + 1, 0);
  for (std::size_t t = 0; t < labels.size(); ++t) {
    const bool speech = labels.values[t] >= 0.5;
    idx.prefix[t + 1] = idx.prefix[t] + (speech ? 1 : 0);
    if (!speech) idx.zeros.push_back(t);
  }
  return idx;
}

bool IsZero(const LabelTrack& labels, std::size_t t) { return labels.values[t] < 0.5; }

}  // namespace

const char* SpeechClassName(SpeechClass cls) {
  switch (cls) {
    case SpeechClass::kLow: return "low";
    case SpeechClass::kMedium: return "medium";
    case SpeechClass::kHigh: return "high";
  }
  return "?";
}

SpeechClass ParseSpeechClass(const std::string& name) {
  if (name == "low") return SpeechClass::kLow;
  if (name == "medium") return SpeechClass::kMedium;
  if (name == "high") return SpeechClass::kHigh;
  Fail(ErrorCode::kConfig, "unknown speech class '" + name + "'");
}

bool InSpeechClass(double f, SpeechClass cls) {
  switch (cls) {
    case SpeechClass::kLow: return f < 0.25;
    case SpeechClass::kMedium: return f >= 0.25 && f <= 0.60;
    case SpeechClass::kHigh: return f > 0.60;
  }
  return false;
}

Recording MakeRecording(SpeechPair pair, const SpectrogramConfig& cfg) {
  Recording rec;
  rec.labels = GenerateLabels(StftMagnitude(pair.air, cfg));
  rec.air = std::move(pair.air);
  rec.bc = std::move(pair.bc);
  return rec;
}

AssembledClip AssembleClip(std::span<const Recording> sources, SpeechClass target,
                           double clip_len_s, std::uint64_t seed,
                           const SpectrogramConfig& cfg) {
  Require(!sources.empty(), ErrorCode::kConfig, "no source recordings");
  Require(clip_len_s > 0.0, ErrorCode::kConfig, "clip length must be positive");
  const std::size_t hop = cfg.hop_samples();
  const double hops_exact = clip_len_s * cfg.sample_rate / static_cast<double>(hop);
  const auto clip_hops = static_cast<std::size_t>(std::llround(hops_exact));
  Require(std::abs(hops_exact - static_cast<double>(clip_hops)) < 1e-9 && clip_hops > 0,
          ErrorCode::kConfig, "clip length must be a whole number of hops");

  std::vector<SourceIndex> index;
  std::size_t total_frames = 0;
  for (const auto& src : sources) {
    Require(src.air.size() == src.bc.size(), ErrorCode::kConfig,
            "source channels differ in length");
    Require(src.labels.size() == cfg.NumFrames(src.air.size()), ErrorCode::kConfig,
            "source label track does not match its frame count");
    index.push_back(IndexSource(src.labels));
    total_frames += src.labels.size();
  }
  Require(total_frames >= clip_hops, ErrorCode::kConfig,
          "sources shorter than the requested clip");

  const double center = ClassCenter(target);
  const std::size_t out_frames = cfg.NumFrames(clip_hops * hop);
  Rng rng(seed);

  for (int attempt = 1; attempt <= kMaxAssemblyAttempts; ++attempt) {
    std::vector<CropRecord> crops;
    std::size_t filled = 0, speech = 0;
    bool stuck = false;
    while (filled < clip_hops) {
      const std::size_t remaining = clip_hops - filled;
      bool have = false;
      CropRecord best;
      double best_score = 0.0;
      for (std::size_t c = 0; c < kCandidatesPerCrop; ++c) {
        const std::size_t s = rng.Index(sources.size());
        const auto& labels = sources[s].labels;
        const auto& zeros = index[s].zeros;
        if (zeros.empty()) continue;
        CropRecord cand{s, 0, 0};
        if (remaining <= kMaxCropFrames) {
          // Final crop: exact length, both ends on non-speech frames.
          bool found = false;
          for (int tries = 0; tries < 16 && !found; ++tries) {
            const std::size_t a = zeros[rng.Index(zeros.size())];
            if (a + remaining <= labels.size() && IsZero(labels, a + remaining - 1)) {
              cand.begin_frame = a;
              cand.end_frame = a + remaining;
              found = true;
            }
          }
          if (!found) continue;
        } else {
          const auto len = kMinCropFrames + rng.Index(kMaxCropFrames - kMinCropFrames + 1);
          const std::size_t a = zeros[rng.Index(zeros.size())];
          std::size_t b = std::min(a + len, labels.size());
          while (b > a + 1 && !IsZero(labels, b - 1)) --b;
          cand.begin_frame = a;
          cand.end_frame = b;
        }
        const std::size_t len = cand.end_frame - cand.begin_frame;
        const std::size_t cs = index[s].prefix[cand.end_frame] - index[s].prefix[cand.begin_frame];
        const double frac = static_cast<double>(speech + cs) / static_cast<double>(filled + len);
        const double score = std::abs(frac - center);
        if (!have || score < best_score) {
          best = cand;
          best_score = score;
          have = true;
        }
      }
      if (!have) {
        stuck = true;
        break;
      }
      crops.push_back(best);
      filled += best.end_frame - best.begin_frame;
      speech += index[best.source].prefix[best.end_frame] - index[best.source].prefix[best.begin_frame];
    }
    if (stuck) continue;

    LabelTrack labels;
    labels.frame_hop_ms = 1000.0 * hop / cfg.sample_rate;
    labels.values.reserve(clip_hops);
    for (const auto& c : crops) {
      const auto& src = sources[c.source].labels.values;
      labels.values.insert(labels.values.end(), src.begin() + c.begin_frame,
                           src.begin() + c.end_frame);
    }
    labels.values.resize(out_frames);
    if (!InSpeechClass(labels.SpeechFraction(), target)) continue;

    AssembledClip clip;
    clip.air.sample_rate = clip.bc.sample_rate = cfg.sample_rate;
    clip.air.samples.reserve(clip_hops * hop);
    clip.bc.samples.reserve(clip_hops * hop);
    for (const auto& c : crops) {
      const auto& src = sources[c.source];
      const auto b = src.air.samples.begin() + c.begin_frame * hop;
      const auto e = src.air.samples.begin() + c.end_frame * hop;
      clip.air.samples.insert(clip.air.samples.end(), b, e);
      clip.bc.samples.insert(clip.bc.samples.end(), src.bc.samples.begin() + c.begin_frame * hop,
                             src.bc.samples.begin() + c.end_frame * hop);
    }
    clip.labels = std::move(labels);
    clip.crops = std::move(crops);
    clip.attempts = attempt;
    return clip;
  }
  Fail(ErrorCode::kAssembly, std::string("speech class '") + SpeechClassName(target) +
                                 "' unreachable from the sources");
}

CorpusConfig CorpusConfig::ForModality(Modality m) {
  CorpusConfig c;
  c.modality = m;
  if (m == Modality::kAir) {
    c.snr_mean_db = 5.0;
    c.snr_std_db = 10.0;
  }
  return c;
}

CorpusConfig CorpusConfig::FromKeyValue(const KeyValueConfig& kv, Modality fallback) {
  Modality m = fallback;
  if (const auto v = kv.Get("modality")) {
    if (*v == "bc") {
      m = Modality::kBc;
    } else if (*v == "air") {
      m = Modality::kAir;
    } else {
      Fail(ErrorCode::kConfig, "modality must be 'bc' or 'air'");
    }
  }
  CorpusConfig c = ForModality(m);
  c.train_clips = static_cast<int>(kv.GetInt("train_clips", c.train_clips));
  c.test_clips = static_cast<int>(kv.GetInt("test_clips", c.test_clips));
  c.train_speakers = static_cast<int>(kv.GetInt("train_speakers", c.train_speakers));
  c.test_speakers = static_cast<int>(kv.GetInt("test_speakers", c.test_speakers));
  c.clip_len_s = kv.GetDouble("clip_len_s", c.clip_len_s);
  c.source_len_s = kv.GetDouble("source_len_s", c.source_len_s);
  c.sources_per_clip = static_cast<int>(kv.GetInt("sources_per_clip", c.sources_per_clip));
  c.snr_mean_db = kv.GetDouble("snr_mean_db", c.snr_mean_db);
  c.snr_std_db = kv.GetDouble("snr_std_db", c.snr_std_db);
  c.level_mean_dbfs = kv.GetDouble("level_mean_dbfs", c.level_mean_dbfs);
  c.level_std_dbfs = kv.GetDouble("level_std_dbfs", c.level_std_dbfs);
  c.clean_fraction = kv.GetDouble("clean_fraction", c.clean_fraction);
  c.seed = kv.GetU64("seed", c.seed);
  return c;
}

KeyValueConfig CorpusConfig::ToKeyValue() const {
  KeyValueConfig kv;
  kv.Set("modality", modality == Modality::kBc ? "bc" : "air");
  kv.Set("train_clips", std::to_string(train_clips));
  kv.Set("test_clips", std::to_string(test_clips));
  kv.Set("train_speakers", std::to_string(train_speakers));
  kv.Set("test_speakers", std::to_string(test_speakers));
  kv.Set("clip_len_s", FormatDouble(clip_len_s));
  kv.Set("source_len_s", FormatDouble(source_len_s));
  kv.Set("sources_per_clip", std::to_string(sources_per_clip));
  kv.Set("snr_mean_db", FormatDouble(snr_mean_db));
  kv.Set("snr_std_db", FormatDouble(snr_std_db));
  kv.Set("level_mean_dbfs", FormatDouble(level_mean_dbfs));
  kv.Set("level_std_dbfs", FormatDouble(level_std_dbfs));
  kv.Set("clean_fraction", FormatDouble(clean_fraction));
  kv.Set("seed", std::to_string(seed));
  return kv;
}

FeatureConfig CorpusConfig::features() const {
  return modality == Modality::kBc ? FeatureConfig::Bc() : FeatureConfig::Air();
}

void CorpusConfig::Validate() const {
  Require(train_clips > 0 && test_clips > 0, ErrorCode::kConfig,
          "both splits need at least one clip");
  Require(train_speakers > 0 && test_speakers > 0, ErrorCode::kConfig,
          "both splits need at least one speaker");
  Require(clip_len_s > 0.0, ErrorCode::kConfig, "clip length must be positive");
  Require(sources_per_clip > 0, ErrorCode::kConfig, "need at least one source per clip");
  Require(source_len_s * sources_per_clip >= clip_len_s, ErrorCode::kConfig,
          "source material shorter than a clip");
  Require(snr_std_db >= 0.0 && level_std_dbfs >= 0.0, ErrorCode::kConfig,
          "standard deviations must be non-negative");
  Require(clean_fraction >= 0.0 && clean_fraction <= 1.0, ErrorCode::kConfig,
          "clean fraction must lie in [0, 1]");
}

std::vector<const ClipEntry*> ClipManifest::Split(const std::string& split) const {
  std::vector<const ClipEntry*> out;
  for (const auto& e : entries) {
    if (e.split == split) out.push_back(&e);
  }
  return out;
}

std::string ClipManifest::ToJsonLines() const {
  std::string out;
  for (const auto& e : entries) {
    nlohmann::ordered_json j;
    j["clip_id"] = e.clip_id;
    j["split"] = e.split;
    j["class"] = SpeechClassName(e.speech_class);
    j["speaker_seed"] = e.speaker_seed;
    j["assembly_seed"] = e.assembly_seed;
    j["interference"] = e.interference;
    j["interference_seed"] = e.interference_seed;
    j["interference_mix_db"] = e.interference_mix_db;
    j["snr_db"] = e.snr_db;
    j["level_dbfs"] = e.level_dbfs;
    j["speech_fraction"] = e.speech_fraction;
    j["clip_len_s"] = clip_len_s;
    out += j.dump() + "\n";
  }
  return out;
}

ClipManifest ClipManifest::FromJsonLines(const std::string& text, double clip_len_s) {
  ClipManifest m;
  m.clip_len_s = clip_len_s;
  std::istringstream is(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (Trim(line).empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      ClipEntry e;
      e.clip_id = j.at("clip_id").get<std::string>();
      e.split = j.at("split").get<std::string>();
      e.speech_class = ParseSpeechClass(j.at("class").get<std::string>());
      e.speaker_seed = j.at("speaker_seed").get<std::uint64_t>();
      e.assembly_seed = j.at("assembly_seed").get<std::uint64_t>();
      e.interference = j.at("interference").get<std::string>();
      e.interference_seed = j.at("interference_seed").get<std::uint64_t>();
      e.interference_mix_db = j.at("interference_mix_db").get<double>();
      e.snr_db = j.at("snr_db").get<double>();
      e.level_dbfs = j.at("level_dbfs").get<double>();
      e.speech_fraction = j.at("speech_fraction").get<double>();
      m.entries.push_back(std::move(e));
    } catch (const nlohmann::json::exception& ex) {
      Fail(ErrorCode::kFormat, "manifest line " + std::to_string(line_no) + ": " + ex.what());
    }
  }
  return m;
}

std::pair<double, double> PauseDensityRange(SpeechClass cls) {
  switch (cls) {
    case SpeechClass::kLow: return {0.55, 0.85};
    case SpeechClass::kMedium: return {0.30, 0.60};
    case SpeechClass::kHigh: return {0.10, 0.30};
  }
  return {0.3, 0.6};
}

CleanClip MaterializeClip(const ClipEntry& entry, const CorpusConfig& config) {
  const SpectrogramConfig stft = config.features().stft;
  std::vector<Recording> sources;
  for (int r = 0; r < config.sources_per_clip; ++r) {
    const std::uint64_t rec_seed = DeriveSeed(entry.assembly_seed, "recording", r);
    Rng draw(rec_seed);
    const auto [lo, hi] = PauseDensityRange(entry.speech_class);
    SynthProfile profile =
        SpeakerProfile(entry.speaker_seed, SynthKind::kTargetSpeech, draw.Uniform(lo, hi));
    profile.seed = rec_seed;
    sources.push_back(MakeRecording(SynthSpeechPair(config.source_len_s, profile), stft));
  }
  AssembledClip clip = AssembleClip(sources, entry.speech_class, config.clip_len_s,
                                    DeriveSeed(entry.assembly_seed, "crop"), stft);
  CleanClip out;
  out.speech = config.modality == Modality::kBc ? std::move(clip.bc) : std::move(clip.air);
  out.labels = std::move(clip.labels);
  out.crops = std::move(clip.crops);
  return out;
}

AudioBuffer MakeInterference(const std::string& spec, std::uint64_t seed, double duration_s,
                             double mix_db, int sample_rate) {
  const auto parts = SplitList(spec, '+');
  Require(!parts.empty() && parts.size() <= 2, ErrorCode::kConfig,
          "bad interference spec '" + spec + "'");
  AudioBuffer out;
  out.sample_rate = sample_rate;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    SynthKind kind = ParseSynthKind(parts[i]);
    SynthProfile p;
    if (IsSpeechKind(kind)) {
      kind = SynthKind::kDistractorSpeech;
      p = SpeakerProfile(DeriveSeed(seed, "talker", i), kind, 0.3);
    }
    p.kind = kind;
    p.seed = DeriveSeed(seed, "component", i);
    const AudioBuffer part = SynthNoise(duration_s, p, sample_rate);
    const double g = i == 0 ? 1.0 : std::pow(10.0, mix_db / 20.0);
    if (out.samples.empty()) out.samples.assign(part.size(), 0.0);
    for (std::size_t k = 0; k < part.size(); ++k) out.samples[k] += g * part.samples[k];
  }
  return out;
}

AudioBuffer MixForModel(const AudioBuffer& speech, const LabelTrack& labels,
                        const AudioBuffer* interference, double snr_db, double level_dbfs) {
  AudioBuffer mixed = interference != nullptr
                          ? MixAtSnr(speech, labels.values, *interference, snr_db).mixture
                          : speech;
  return RescaleToDbfs(mixed, level_dbfs).audio;
}

namespace {

void MaterializeFeatures(const AudioBuffer& y, const LabelTrack& labels,
                         const FeatureConfig& fcfg, const MelFilterBank& bank,
                         float* features, float* targets) {
  const auto logmel = LogMelFeatures(StftMagnitude(y, fcfg.stft), bank);
  const auto soft = SmoothLabels(labels);
  Require(logmel.frames.rows == soft.size(), ErrorCode::kConfig,
          "feature and label frame counts differ");
  for (std::size_t i = 0; i < logmel.frames.data.size(); ++i) {
    features[i] = static_cast<float>(logmel.frames.data[i]);
  }
  for (std::size_t t = 0; t < soft.size(); ++t) targets[t] = static_cast<float>(soft.values[t]);
}

}  // namespace

Corpus BuildCorpus(const CorpusConfig& config) {
  config.Validate();
  const FeatureConfig fcfg = config.features();
  const MelFilterBank bank = fcfg.MakeBank();
  const std::size_t frames =
      fcfg.stft.NumFrames(static_cast<std::size_t>(std::llround(config.clip_len_s * fcfg.stft.sample_rate)));

  Corpus corpus;
  corpus.config = config;
  corpus.manifest.clip_len_s = config.clip_len_s;

  std::vector<std::uint64_t> train_speakers, test_speakers;
  std::set<std::uint64_t> used;
  const auto draw_speakers = [&](const char* tag, int n, std::vector<std::uint64_t>& out) {
    for (std::uint64_t i = 0; static_cast<int>(out.size()) < n; ++i) {
      const std::uint64_t s = DeriveSeed(config.seed, tag, i);
      if (used.insert(s).second) out.push_back(s);
    }
  };
  draw_speakers("train-speaker", config.train_speakers, train_speakers);
  draw_speakers("test-speaker", config.test_speakers, test_speakers);

  for (const std::string split : {"test", "train"}) {
    const bool is_train = split == "train";
    const int count = is_train ? config.train_clips : config.test_clips;
    const auto& speakers = is_train ? train_speakers : test_speakers;
    SequenceSet& set = is_train ? corpus.train : corpus.test;
    set.count = static_cast<std::size_t>(count);
    set.frames = frames;
    set.bins = static_cast<std::size_t>(fcfg.n_mels);
    set.features.assign(set.count * frames * set.bins, 0.0f);
    set.targets.assign(set.count * frames, 0.0f);

    for (int i = 0; i < count; ++i) {
      Rng draw(DeriveSeed(config.seed, split + "-clip", static_cast<std::uint64_t>(i)));
      ClipEntry e;
      char id[32];
      std::snprintf(id, sizeof(id), "%s-%05d", split.c_str(), i);
      e.clip_id = id;
      e.split = split;
      e.speech_class = static_cast<SpeechClass>(i % 3);
      e.speaker_seed = speakers[static_cast<std::size_t>(i) % speakers.size()];
      e.assembly_seed = draw.Next();
      e.interference_seed = draw.Next();
      e.snr_db = draw.Normal(config.snr_mean_db, config.snr_std_db);
      e.level_dbfs = draw.Normal(config.level_mean_dbfs, config.level_std_dbfs);
      const bool clean = draw.Uniform() < config.clean_fraction;
      const char* distractor = draw.Uniform() < 0.5 ? "babble" : "distractor_speech";
      const char* noise = draw.Uniform() < 0.5 ? "white" : "pink";
      e.interference_mix_db = draw.Uniform(-20.0, 20.0);
      e.interference = clean ? "none" : std::string(distractor) + "+" + noise;

      // SNR needs at least one speech frame; silent low-class draws are redrawn.
      CleanClip clip = MaterializeClip(e, config);
      for (int retry = 0; clip.labels.SpeechFraction() == 0.0; ++retry) {
        Require(retry < 100, ErrorCode::kAssembly, "no clip with speech for " + e.clip_id);
        e.assembly_seed = draw.Next();
        clip = MaterializeClip(e, config);
      }
      e.speech_fraction = clip.labels.SpeechFraction();
      AudioBuffer interference;
      if (!clean) {
        interference = MakeInterference(e.interference, e.interference_seed, config.clip_len_s,
                                        e.interference_mix_db);
      }
      const AudioBuffer y = MixForModel(clip.speech, clip.labels, clean ? nullptr : &interference,
                                        e.snr_db, e.level_dbfs);
      MaterializeFeatures(y, clip.labels, fcfg, bank,
                          set.features.data() + static_cast<std::size_t>(i) * frames * set.bins,
                          set.targets.data() + static_cast<std::size_t>(i) * frames);
      corpus.manifest.entries.push_back(std::move(e));
    }
  }
  std::sort(corpus.manifest.entries.begin(), corpus.manifest.entries.end(),
            [](const ClipEntry& a, const ClipEntry& b) { return a.clip_id < b.clip_id; });
  return corpus;
}

namespace {

constexpr char kArrayMagic[8] = {'B', 'C', 'V', 'A', 'D', 'A', 'R', 'R'};
constexpr std::uint32_t kArrayVersion = 1;
constexpr std::uint32_t kDtypeFloat32 = 1;

template <typename T>
void PutLe(std::ostream& os, T v) {
  unsigned char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  os.write(reinterpret_cast<const char*>(b), sizeof(T));
}

template <typename T>
T GetLe(std::istream& is) {
  unsigned char b[sizeof(T)];
  is.read(reinterpret_cast<char*>(b), sizeof(T));
  Require(is.good(), ErrorCode::kFormat, "truncated array file");
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  T v;
  std::memcpy(&v, b, sizeof(T));
  return v;
}

}  // namespace

void WriteArrayFile(const std::string& path, const ArrayFile& array) {
  std::uint64_t n = 1;
  for (auto d : array.dims) n *= d;
  Require(n == array.data.size(), ErrorCode::kConfig, "array dims do not match its data");
  std::ofstream os(path, std::ios::binary);
  Require(os.good(), ErrorCode::kIo, "cannot write '" + path + "'");
  os.write(kArrayMagic, sizeof(kArrayMagic));
  PutLe<std::uint32_t>(os, kArrayVersion);
  PutLe<std::uint32_t>(os, kDtypeFloat32);
  PutLe<std::uint32_t>(os, static_cast<std::uint32_t>(array.dims.size()));
  for (auto d : array.dims) PutLe<std::uint64_t>(os, d);
  PutLe<std::uint64_t>(os, array.config_hash);
  for (float v : array.data) PutLe<float>(os, v);
  Require(os.good(), ErrorCode::kIo, "write failed for '" + path + "'");
}

ArrayFile ReadArrayFile(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  Require(is.good(), ErrorCode::kData, "missing array file '" + path + "'");
  char magic[8];
  is.read(magic, sizeof(magic));
  Require(is.good() && std::memcmp(magic, kArrayMagic, sizeof(magic)) == 0,
          ErrorCode::kFormat, "'" + path + "' is not an array file");
  Require(GetLe<std::uint32_t>(is) == kArrayVersion, ErrorCode::kFormat,
          "unsupported array file version");
  Require(GetLe<std::uint32_t>(is) == kDtypeFloat32, ErrorCode::kFormat,
          "unsupported array dtype");
  const auto ndim = GetLe<std::uint32_t>(is);
  Require(ndim >= 1 && ndim <= 8, ErrorCode::kFormat, "bad array rank");
  ArrayFile array;
  std::uint64_t n = 1;
  for (std::uint32_t i = 0; i < ndim; ++i) {
    array.dims.push_back(GetLe<std::uint64_t>(is));
    n *= array.dims.back();
  }
  array.config_hash = GetLe<std::uint64_t>(is);
  Require(n < (1ULL << 34), ErrorCode::kFormat, "array too large");
  array.data.resize(n);
  for (auto& v : array.data) v = GetLe<float>(is);
  return array;
}

void WriteCorpus(const std::string& dir, const Corpus& corpus) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  Require(!ec, ErrorCode::kIo, "cannot create '" + dir + "': " + ec.message());
  {
    std::ofstream os(fs::path(dir) / "corpus.cfg");
    Require(os.good(), ErrorCode::kIo, "cannot write corpus config in '" + dir + "'");
    os << corpus.config.ToKeyValue().Serialize();
  }
  {
    std::ofstream os(fs::path(dir) / "manifest.jsonl");
    Require(os.good(), ErrorCode::kIo, "cannot write manifest in '" + dir + "'");
    os << corpus.manifest.ToJsonLines();
  }
  const std::uint64_t hash = corpus.config.features().Hash();
  for (const std::string split : {"train", "test"}) {
    const SequenceSet& set = split == "train" ? corpus.train : corpus.test;
    WriteArrayFile((fs::path(dir) / (split + "_features.bin")).string(),
                   {{set.count, set.frames, set.bins}, hash, set.features});
    WriteArrayFile((fs::path(dir) / (split + "_labels.bin")).string(),
                   {{set.count, set.frames}, hash, set.targets});
  }
}

Corpus LoadCorpus(const std::string& dir) {
  namespace fs = std::filesystem;
  Require(fs::is_directory(dir), ErrorCode::kData, "corpus directory '" + dir + "' not found");
  const auto cfg_path = fs::path(dir) / "corpus.cfg";
  Require(fs::exists(cfg_path), ErrorCode::kData, "missing corpus.cfg in '" + dir + "'");
  Corpus corpus;
  corpus.config = CorpusConfig::FromKeyValue(KeyValueConfig::Load(cfg_path.string()));
  corpus.config.Validate();
  {
    std::ifstream is(fs::path(dir) / "manifest.jsonl");
    Require(is.good(), ErrorCode::kData, "missing manifest.jsonl in '" + dir + "'");
    std::stringstream ss;
    ss << is.rdbuf();
    corpus.manifest = ClipManifest::FromJsonLines(ss.str(), corpus.config.clip_len_s);
  }
  const std::uint64_t hash = corpus.config.features().Hash();
  for (const std::string split : {"train", "test"}) {
    SequenceSet& set = split == "train" ? corpus.train : corpus.test;
    auto feats = ReadArrayFile((fs::path(dir) / (split + "_features.bin")).string());
    auto labels = ReadArrayFile((fs::path(dir) / (split + "_labels.bin")).string());
    Require(feats.config_hash == hash && labels.config_hash == hash, ErrorCode::kFormat,
            "feature files were written with a different feature config");
    Require(feats.dims.size() == 3 && labels.dims.size() == 2 &&
                feats.dims[0] == labels.dims[0] && feats.dims[1] == labels.dims[1],
            ErrorCode::kFormat, "inconsistent feature/label dims");
    set.count = feats.dims[0];
    set.frames = feats.dims[1];
    set.bins = feats.dims[2];
    set.features = std::move(feats.data);
    set.targets = std::move(labels.data);
    Require(set.count == corpus.manifest.Split(split).size(), ErrorCode::kData,
            "manifest and feature file disagree on the " + split + " clip count");
  }
  return corpus;
}

}  // namespace bcvad
