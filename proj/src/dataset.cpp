#include "tdann/dataset.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <system_error>

#include <nlohmann/json.hpp>

#include "rng_util.hpp"
#include "tdann/errors.hpp"

namespace tdann {

namespace {

constexpr int kManifestSchemaVersion = 1;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  std::stringstream ss(line);
  while (std::getline(ss, cur, ',')) fields.push_back(trim(cur));
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double parse_double(const std::string& field, std::size_t row) {
  double v = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    throw ParseError("sample row " + std::to_string(row) + ": cannot parse value '" + field + "'",
                     row);
  }
  return v;
}

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

// Gaussian white noise through a short moving average, normalized to unit
// RMS. Used as the stand-in BSP excitation for the fir and teacher kinds.
std::vector<double> bandlimited_noise(std::mt19937_64& rng, std::size_t n) {
  constexpr std::size_t kWidth = 5;
  std::vector<double> raw(n + kWidth - 1);
  for (double& v : raw) v = detail::gaussian(rng);
  std::vector<double> out(n);
  double acc = 0.0;
  for (std::size_t i = 0; i < kWidth; ++i) acc += raw[i];
  out[0] = acc / kWidth;
  for (std::size_t t = 1; t < n; ++t) {
    acc += raw[t + kWidth - 1] - raw[t - 1];
    out[t] = acc / kWidth;
  }
  double sq = 0.0;
  for (double v : out) sq += v * v;
  const double rms = std::sqrt(sq / static_cast<double>(n));
  if (rms > 0.0) {
    for (double& v : out) v /= rms;
  }
  return out;
}

SyntheticData generate_fir(const SyntheticSpec& spec) {
  std::mt19937_64 rng(detail::mix64(spec.seed));
  const std::size_t lag = spec.taps.size();
  std::vector<double> x = bandlimited_noise(rng, spec.length + lag);
  std::vector<double> input(x.begin() + static_cast<std::ptrdiff_t>(lag), x.end());
  std::vector<double> output(spec.length);
  for (std::size_t t = 0; t < spec.length; ++t) {
    double y = 0.0;
    for (std::size_t k = 1; k <= lag; ++k) {
      y += spec.taps[k - 1] * x[lag + t - k];
    }
    output[t] = y + spec.noise_rms * detail::gaussian(rng);
  }
  nlohmann::json truth{{"kind", "fir_linear"},
                       {"taps", spec.taps},
                       {"tap_lag_convention", "tap k (1-based) multiplies u(t-k)"},
                       {"noise_rms", spec.noise_rms},
                       {"length", spec.length},
                       {"seed", spec.seed}};
  return {TimeSeries(std::move(input), std::nullopt, "bsp"),
          TimeSeries(std::move(output), std::nullopt, "hsp"), std::move(truth)};
}

SyntheticData generate_teacher(const SyntheticSpec& spec) {
  std::mt19937_64 rng(detail::mix64(spec.seed));
  TdannModel teacher =
      init_model(spec.teacher_d, spec.teacher_n, detail::mix64(spec.seed ^ 0x7eacbe11ULL));
  teacher.w_in *= spec.teacher_scale;
  teacher.w_out *= spec.teacher_scale;

  std::vector<double> x = bandlimited_noise(rng, spec.length);
  TimeSeries input(std::move(x), std::nullopt, "bsp");
  TimeSeries clean =
      predict_series(teacher, input, DelayState::from_input_head(input, teacher.d));
  std::vector<double> output(clean.samples());
  for (double& v : output) v += spec.noise_rms * detail::gaussian(rng);

  nlohmann::json truth{{"kind", "teacher_tdann"},
                       {"teacher", model_to_json(teacher, nlohmann::json::object())},
                       {"noise_rms", spec.noise_rms},
                       {"length", spec.length},
                       {"seed", spec.seed}};
  return {std::move(input), TimeSeries(std::move(output), std::nullopt, "hsp"),
          std::move(truth)};
}

SyntheticData generate_pseudo_cardiac(const SyntheticSpec& spec) {
  std::mt19937_64 rng(detail::mix64(spec.seed));

  // Fixed BSP -> HSP transfer: a smoothing kernel applied after a pure
  // delay, shared by every morphology.
  constexpr std::size_t kTransferLag = 5;
  constexpr std::size_t kKernelWidth = 9;
  std::array<double, kKernelWidth> kernel{};
  {
    double sum = 0.0;
    for (std::size_t k = 0; k < kKernelWidth; ++k) {
      const double u = (static_cast<double>(k) - 4.0) / 2.0;
      kernel[k] = std::exp(-0.5 * u * u);
      sum += kernel[k];
    }
    for (double& v : kernel) v /= sum;
  }
  const std::size_t pad = kTransferLag + kKernelWidth;

  const std::size_t period =
      spec.flutter ? std::max<std::size_t>(10, (spec.beat_period * 2) / 5) : spec.beat_period;

  std::vector<double> bsp(spec.length + pad);
  if (spec.flutter) {
    for (std::size_t t = 0; t < bsp.size(); ++t) {
      bsp[t] = spec.beat_amplitude *
               std::sin(2.0 * M_PI * static_cast<double>(t) / static_cast<double>(period));
    }
  } else {
    const double qrs_width = static_cast<double>(period) / 12.0;
    const double t_width = static_cast<double>(period) / 6.0;
    const std::size_t beats = bsp.size() / period + 2;
    for (std::size_t b = 0; b < beats; ++b) {
      const double center = static_cast<double>(b * period);
      const double amp = spec.beat_amplitude * (1.0 + 0.1 * detail::uniform_in(rng, 1.0));
      const double lo = center - 4.0 * t_width;
      const double hi = center + static_cast<double>(period) / 3.0 + 4.0 * t_width;
      for (std::size_t t = static_cast<std::size_t>(std::max(0.0, lo));
           t < bsp.size() && static_cast<double>(t) <= hi; ++t) {
        const double dt = static_cast<double>(t) - center;
        bsp[t] += amp * std::exp(-0.5 * (dt / qrs_width) * (dt / qrs_width));
        const double dt2 = dt - static_cast<double>(period) / 3.0;
        bsp[t] += 0.3 * amp * std::exp(-0.5 * (dt2 / t_width) * (dt2 / t_width));
      }
    }
  }

  std::vector<double> input(spec.length);
  std::vector<double> output(spec.length);
  for (std::size_t t = 0; t < spec.length; ++t) {
    input[t] = bsp[pad + t];
    double y = 0.0;
    for (std::size_t k = 0; k < kKernelWidth; ++k) {
      y += kernel[k] * bsp[pad + t - kTransferLag - k];
    }
    output[t] = y + spec.noise_rms * detail::gaussian(rng);
  }

  nlohmann::json truth{{"kind", "pseudo_cardiac"},
                       {"beat_period", spec.beat_period},
                       {"effective_period", period},
                       {"beat_amplitude", spec.beat_amplitude},
                       {"flutter", spec.flutter},
                       {"transfer", {{"lag", kTransferLag}, {"kernel_width", kKernelWidth}}},
                       {"noise_rms", spec.noise_rms},
                       {"length", spec.length},
                       {"seed", spec.seed}};
  return {TimeSeries(std::move(input), std::nullopt, "bsp"),
          TimeSeries(std::move(output), std::nullopt, "hsp"), std::move(truth)};
}

}  // namespace

const char* to_string(Rhythm r) {
  switch (r) {
    case Rhythm::kNormal: return "normal";
    case Rhythm::kVentricularFlutter: return "ventricular_flutter";
    case Rhythm::kSynthetic: return "synthetic";
  }
  return "unknown";
}

const char* to_string(Role r) {
  switch (r) {
    case Role::kTraining: return "training";
    case Role::kValidation: return "validation";
    case Role::kTesting: return "testing";
  }
  return "unknown";
}

Rhythm rhythm_from_string(const std::string& s) {
  if (s == "normal") return Rhythm::kNormal;
  if (s == "ventricular_flutter") return Rhythm::kVentricularFlutter;
  if (s == "synthetic") return Rhythm::kSynthetic;
  throw SchemaError("unknown rhythm tag: " + s);
}

Role role_from_string(const std::string& s) {
  if (s == "training") return Role::kTraining;
  if (s == "validation") return Role::kValidation;
  if (s == "testing") return Role::kTesting;
  throw SchemaError("unknown role tag: " + s);
}

void ExperimentManifest::validate() const {
  if (schema_version != kManifestSchemaVersion) {
    throw SchemaError("unsupported manifest schema_version " + std::to_string(schema_version));
  }
  if (entries.empty()) {
    throw InvalidInputError("manifest has no entries");
  }
  bool has_training = false;
  bool has_testing = false;
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& e : entries) {
    if (e.recording_id.empty()) {
      throw InvalidInputError("manifest entry has an empty recording_id");
    }
    if (e.input_channel.empty() || e.output_channel.empty()) {
      throw InvalidInputError("manifest entry " + e.recording_id + " needs channel names");
    }
    if (e.source_file.empty()) {
      throw InvalidInputError("manifest entry " + e.recording_id + " needs a source_file");
    }
    has_training = has_training || e.role == Role::kTraining;
    has_testing = has_testing || e.role == Role::kTesting;
    if (!seen.insert({e.recording_id, to_string(e.role)}).second) {
      throw InvalidInputError("duplicate (recording_id, role) pair: " + e.recording_id + "/" +
                              to_string(e.role));
    }
  }
  if (!has_training) {
    throw InvalidInputError("manifest needs at least one training entry");
  }
  if (!has_testing) {
    throw InvalidInputError("manifest needs at least one testing entry");
  }
}

ExperimentManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw FileError("cannot open manifest: " + path.string());
  }
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError("manifest " + path.string() + " is not valid JSON: " + e.what());
  }
  ExperimentManifest m;
  try {
    m.schema_version = doc.at("schema_version").get<int>();
    for (const auto& je : doc.at("entries")) {
      ManifestEntry e;
      e.recording_id = je.at("recording_id").get<std::string>();
      e.rhythm = rhythm_from_string(je.at("rhythm").get<std::string>());
      e.input_channel = je.at("input_channel").get<std::string>();
      e.output_channel = je.at("output_channel").get<std::string>();
      e.bounds = SegmentBounds(je.at("bounds").at("start").get<std::size_t>(),
                               je.at("bounds").at("end").get<std::size_t>());
      e.role = role_from_string(je.at("role").get<std::string>());
      e.source_file = je.at("source_file").get<std::string>();
      m.entries.push_back(std::move(e));
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError("malformed manifest " + path.string() + ": " + e.what());
  }
  m.validate();
  return m;
}

void save_manifest(const ExperimentManifest& m, const std::filesystem::path& path) {
  m.validate();
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : m.entries) {
    entries.push_back({{"recording_id", e.recording_id},
                       {"rhythm", to_string(e.rhythm)},
                       {"input_channel", e.input_channel},
                       {"output_channel", e.output_channel},
                       {"bounds", {{"start", e.bounds.start}, {"end", e.bounds.end}}},
                       {"role", to_string(e.role)},
                       {"source_file", e.source_file.generic_string()}});
  }
  nlohmann::json doc{{"schema_version", m.schema_version}, {"entries", std::move(entries)}};
  std::ofstream out(path);
  if (!out) {
    throw FileError("cannot open manifest for writing: " + path.string());
  }
  out << doc.dump(2) << "\n";
}

ResolvedData resolve(const ExperimentManifest& m, const ResolveOptions& opts) {
  m.validate();
  ResolvedData data;
  std::vector<const ManifestEntry*> selected;
  for (const auto& e : m.entries) {
    if (opts.rhythm && e.rhythm != *opts.rhythm) continue;
    if (opts.test_id && e.role == Role::kTesting && e.recording_id != *opts.test_id) continue;
    selected.push_back(&e);
  }

  for (const ManifestEntry* e : selected) {
    std::filesystem::path path = e->source_file;
    if (path.is_relative() && !opts.base_dir.empty()) path = opts.base_dir / path;
    TimeSeries input_full = load_recording(path, e->input_channel);
    TimeSeries output_full = load_recording(path, e->output_channel);
    if (e->bounds.end > input_full.size() || e->bounds.end > output_full.size()) {
      throw RangeError("entry " + e->recording_id + "/" + to_string(e->role) + ": bounds [" +
                       std::to_string(e->bounds.start) + ", " + std::to_string(e->bounds.end) +
                       "] exceed recording length " + std::to_string(input_full.size()));
    }
    ResolvedPair pair{slice(input_full, e->bounds), slice(output_full, e->bounds),
                      e->recording_id, e->bounds};
    switch (e->role) {
      case Role::kTraining: data.training.push_back(std::move(pair)); break;
      case Role::kValidation: data.validation.push_back(std::move(pair)); break;
      case Role::kTesting: data.testing.push_back(std::move(pair)); break;
    }
  }

  // Same recording feeding both sides with overlapping segments is legal but
  // suspicious; flag it.
  for (const ManifestEntry* a : selected) {
    if (a->role != Role::kTraining) continue;
    for (const ManifestEntry* b : selected) {
      if (b->role != Role::kTesting) continue;
      if (a->recording_id == b->recording_id && a->source_file == b->source_file &&
          a->bounds.overlaps(b->bounds)) {
        data.warnings.push_back("training and testing segments overlap on recording " +
                                a->recording_id);
      }
    }
  }

  if (data.training.empty()) {
    throw InvalidInputError("no training entries remain after filtering");
  }
  if (data.testing.empty()) {
    throw InvalidInputError("no testing entries remain after filtering");
  }
  return data;
}

TimeSeries load_recording(const std::filesystem::path& path, const std::string& channel) {
  std::ifstream in(path);
  if (!in) {
    throw FileError("cannot open recording: " + path.string());
  }

  std::optional<double> sample_rate;
  std::string line;
  // Optional "# key=value" metadata lines precede the header.
  while (std::getline(in, line)) {
    if (!line.empty() && line.front() == '#') {
      const auto eq = line.find('=');
      if (eq != std::string::npos) {
        const std::string key = trim(line.substr(1, eq - 1));
        if (key == "sample_rate_hz") {
          sample_rate = parse_double(trim(line.substr(eq + 1)), 0);
        }
      }
      continue;
    }
    break;
  }
  if (line.empty() && in.eof()) {
    throw ParseError("recording " + path.string() + " has no header row", 0);
  }

  const std::vector<std::string> header = split_csv(line);
  std::size_t col = header.size();
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == channel) {
      col = i;
      break;
    }
  }
  if (col == header.size()) {
    std::string available;
    for (const auto& h : header) {
      if (!available.empty()) available += ", ";
      available += "'" + h + "'";
    }
    throw UnknownChannelError("recording " + path.string() + " has no channel '" + channel +
                              "' (available: " + available + ")");
  }

  std::vector<double> samples;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++row;
    const std::vector<std::string> fields = split_csv(line);
    if (fields.size() != header.size()) {
      throw ParseError("sample row " + std::to_string(row) + ": expected " +
                           std::to_string(header.size()) + " fields, got " +
                           std::to_string(fields.size()),
                       row);
    }
    const double v = parse_double(fields[col], row);
    if (!std::isfinite(v)) {
      throw NonFiniteValueError(
          "sample row " + std::to_string(row) + ": non-finite value in channel '" + channel + "'",
          row);
    }
    samples.push_back(v);
  }
  if (samples.empty()) {
    throw ParseError("recording " + path.string() + " has no sample rows", 0);
  }
  return TimeSeries(std::move(samples), sample_rate, channel);
}

void write_recording(const std::filesystem::path& path,
                     const std::vector<std::pair<std::string, const TimeSeries*>>& channels) {
  if (channels.empty()) {
    throw InvalidInputError("write_recording needs at least one channel");
  }
  const std::size_t n = channels.front().second->size();
  for (const auto& [name, ts] : channels) {
    if (ts->size() != n) {
      throw DimensionError("all channels must have equal length");
    }
  }
  std::ofstream out(path);
  if (!out) {
    throw FileError("cannot open recording for writing: " + path.string());
  }
  if (auto rate = channels.front().second->sample_rate_hz()) {
    out << "# sample_rate_hz=" << format_double(*rate) << "\n";
  }
  for (std::size_t i = 0; i < channels.size(); ++i) {
    out << (i ? "," : "") << channels[i].first;
  }
  out << "\n";
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t i = 0; i < channels.size(); ++i) {
      out << (i ? "," : "") << format_double((*channels[i].second)[r]);
    }
    out << "\n";
  }
}

const char* to_string(SyntheticKind k) {
  switch (k) {
    case SyntheticKind::kFirLinear: return "fir_linear";
    case SyntheticKind::kTeacherTdann: return "teacher_tdann";
    case SyntheticKind::kPseudoCardiac: return "pseudo_cardiac";
  }
  return "unknown";
}

SyntheticKind synthetic_kind_from_string(const std::string& s) {
  if (s == "fir_linear") return SyntheticKind::kFirLinear;
  if (s == "teacher_tdann") return SyntheticKind::kTeacherTdann;
  if (s == "pseudo_cardiac") return SyntheticKind::kPseudoCardiac;
  throw SchemaError("unknown synthetic kind: " + s);
}

void SyntheticSpec::validate() const {
  if (!(noise_rms >= 0.0) || !std::isfinite(noise_rms)) {
    throw InvalidInputError("noise_rms must be finite and non-negative");
  }
  std::size_t max_delay = 1;
  switch (kind) {
    case SyntheticKind::kFirLinear:
      if (taps.empty()) throw InvalidInputError("fir_linear needs at least one tap");
      max_delay = taps.size();
      break;
    case SyntheticKind::kTeacherTdann:
      if (teacher_n < 1) throw InvalidInputError("teacher_tdann needs teacher_n >= 1");
      max_delay = std::max<std::size_t>(1, teacher_d);
      break;
    case SyntheticKind::kPseudoCardiac:
      if (beat_period < 8) throw InvalidInputError("beat_period must be at least 8 samples");
      max_delay = 14;  // transfer lag plus kernel width
      break;
  }
  if (length < 10 * max_delay) {
    throw InvalidInputError("length must be at least 10x the maximum delay used");
  }
}

SyntheticData generate(const SyntheticSpec& spec) {
  spec.validate();
  switch (spec.kind) {
    case SyntheticKind::kFirLinear: return generate_fir(spec);
    case SyntheticKind::kTeacherTdann: return generate_teacher(spec);
    case SyntheticKind::kPseudoCardiac: return generate_pseudo_cardiac(spec);
  }
  throw InvalidInputError("unknown synthetic kind");
}

}  // namespace tdann
