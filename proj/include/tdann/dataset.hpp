#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "tdann/network.hpp"
#include "tdann/signal.hpp"

namespace tdann {

enum class Rhythm { kNormal, kVentricularFlutter, kSynthetic };
enum class Role { kTraining, kValidation, kTesting };

const char* to_string(Rhythm r);
const char* to_string(Role r);
Rhythm rhythm_from_string(const std::string& s);
Role role_from_string(const std::string& s);

struct ManifestEntry {
  std::string recording_id;
  Rhythm rhythm = Rhythm::kSynthetic;
  std::string input_channel;
  std::string output_channel;
  SegmentBounds bounds{1, 1};
  Role role = Role::kTraining;
  std::filesystem::path source_file;
};

// Table-1-style experiment declaration: which recordings, which segment of
// each, and what each segment is used for.
struct ExperimentManifest {
  int schema_version = 1;
  std::vector<ManifestEntry> entries;

  // Structural checks only; files are touched at resolve time.
  void validate() const;
};

ExperimentManifest load_manifest(const std::filesystem::path& path);
void save_manifest(const ExperimentManifest& m, const std::filesystem::path& path);

struct ResolvedPair {
  TimeSeries input;
  TimeSeries output;
  std::string recording_id;
  SegmentBounds bounds{1, 1};
};

struct ResolvedData {
  std::vector<ResolvedPair> training;
  std::vector<ResolvedPair> validation;
  std::vector<ResolvedPair> testing;
  std::vector<std::string> warnings;  // e.g. overlapping train/test bounds
};

struct ResolveOptions {
  // Restrict to entries of one rhythm (Table 1 mixes two experiment groups).
  std::optional<Rhythm> rhythm;
  // Restrict testing entries to one recording id.
  std::optional<std::string> test_id;
  // Paths in the manifest resolve relative to this directory when relative.
  std::filesystem::path base_dir;
};

ResolvedData resolve(const ExperimentManifest& m, const ResolveOptions& opts = {});

// Reads one channel of a comma-separated recording file: one header row of
// channel names, one row per sample. Optional leading "# key=value" lines
// may carry sample_rate_hz metadata. Values parse exactly as written.
TimeSeries load_recording(const std::filesystem::path& path, const std::string& channel);

// Writes channels side by side with round-trip precision. All series must
// have equal length.
void write_recording(const std::filesystem::path& path,
                     const std::vector<std::pair<std::string, const TimeSeries*>>& channels);

enum class SyntheticKind { kFirLinear, kTeacherTdann, kPseudoCardiac };

const char* to_string(SyntheticKind k);
SyntheticKind synthetic_kind_from_string(const std::string& s);

// Replaces the proprietary patient recordings with deterministic generators.
struct SyntheticSpec {
  SyntheticKind kind = SyntheticKind::kFirLinear;
  std::size_t length = 2000;
  double noise_rms = 0.0;  // additive Gaussian noise on the output
  std::uint64_t seed = 0;

  // fir_linear: tap k (1-based) multiplies the input delayed by k samples,
  // so taps {0, 0, 0.8} is a pure lag-3 system. Input is band-limited
  // pseudo-noise normalized to unit RMS.
  std::vector<double> taps{0.0, 0.0, 0.8};

  // teacher_tdann
  std::size_t teacher_n = 3;
  std::size_t teacher_d = 2;
  double teacher_scale = 1.0;  // multiplies the initialized teacher weights

  // pseudo_cardiac: periodic beat train through a fixed smoothing-plus-delay
  // transfer. The flutter variant runs at an elevated rate with sinusoidal
  // morphology.
  std::size_t beat_period = 160;
  double beat_amplitude = 1.0;
  bool flutter = false;

  void validate() const;
};

struct SyntheticData {
  TimeSeries input;
  TimeSeries output;
  nlohmann::json ground_truth;
};

SyntheticData generate(const SyntheticSpec& spec);

}  // namespace tdann
