#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "myotext/errors.hpp"
#include "myotext/keymap.hpp"
#include "myotext/rng.hpp"

namespace myotext {

struct Keystroke {
  double time = 0.0;  // seconds from recording start
  char key = ' ';
  FingerId finger;
};

/// Multichannel sEMG in microvolts, stored channel-major:
/// samples[c * n_samples + t].
struct Recording {
  int channels = 32;
  double sample_rate = 2000.0;
  std::size_t n_samples = 0;
  std::vector<float> samples;
  std::vector<Keystroke> keystrokes;

  float at(int channel, std::size_t t) const { return samples[channel * n_samples + t]; }

  void validate() const {
    if (channels <= 0) throw DataError("recording needs at least one channel");
    if (!(sample_rate > 0.0)) throw DataError("sample rate must be positive");
    if (samples.size() != static_cast<std::size_t>(channels) * n_samples) {
      throw DataError("sample buffer size does not match channels x samples");
    }
    for (std::size_t i = 1; i < keystrokes.size(); ++i) {
      if (!(keystrokes[i].time > keystrokes[i - 1].time)) {
        throw DataError("keystroke timestamps must be strictly increasing (index " + std::to_string(i) + ")");
      }
    }
    for (const auto& k : keystrokes) {
      if (!k.finger.valid()) throw DataError("keystroke finger out of range");
    }
  }
};

/// Window of every channel around one keystroke.
struct Segment {
  char key = ' ';
  FingerId finger;
  double sample_rate = 0.0;
  int channels = 0;
  std::size_t length = 0;     // samples per channel
  std::vector<float> samples; // channel-major
  bool padded = false;        // part of the window fell outside the recording
  std::size_t pad_before = 0;
  std::size_t pad_after = 0;
};

struct Extraction {
  std::vector<Segment> segments;
  std::vector<std::string> warnings;
};

/// One segment per keystroke covering [t - pre, t + post). Samples outside
/// the recording are zero and the segment is flagged as padded.
inline Extraction extract_segments(const Recording& rec, double pre = 1.0, double post = 1.0) {
  if (!(pre > 0.0) || !(post > 0.0)) throw DomainError("segment pre/post must be positive");
  rec.validate();
  Extraction out;
  if (rec.keystrokes.empty()) {
    out.warnings.push_back("recording has no keystrokes");
    return out;
  }
  const auto pre_n = static_cast<std::int64_t>(std::llround(pre * rec.sample_rate));
  const auto post_n = static_cast<std::int64_t>(std::llround(post * rec.sample_rate));
  const auto len = static_cast<std::size_t>(pre_n + post_n);
  const auto total = static_cast<std::int64_t>(rec.n_samples);
  for (const auto& k : rec.keystrokes) {
    Segment s;
    s.key = k.key;
    s.finger = k.finger;
    s.sample_rate = rec.sample_rate;
    s.channels = rec.channels;
    s.length = len;
    s.samples.assign(len * rec.channels, 0.0f);
    const std::int64_t start = std::llround(k.time * rec.sample_rate) - pre_n;
    const std::int64_t lo = std::clamp<std::int64_t>(start, 0, total);
    const std::int64_t hi = std::clamp<std::int64_t>(start + static_cast<std::int64_t>(len), 0, total);
    s.pad_before = static_cast<std::size_t>(std::clamp<std::int64_t>(lo - start, 0, len));
    s.pad_after = static_cast<std::size_t>(
        std::clamp<std::int64_t>(start + static_cast<std::int64_t>(len) - std::max(hi, lo), 0, len - s.pad_before));
    s.padded = s.pad_before > 0 || s.pad_after > 0;
    for (int c = 0; c < rec.channels; ++c) {
      for (std::int64_t t = lo; t < hi; ++t) {
        s.samples[c * len + static_cast<std::size_t>(t - start)] = rec.at(c, static_cast<std::size_t>(t));
      }
    }
    out.segments.push_back(std::move(s));
  }
  return out;
}

/// Root mean square over every channel and sample.
inline double rms(std::span<const float> samples) {
  if (samples.empty()) throw DomainError("rms of an empty segment");
  double ss = 0.0;
  for (float v : samples) ss += static_cast<double>(v) * static_cast<double>(v);
  return std::sqrt(ss / static_cast<double>(samples.size()));
}

inline double rms(const Segment& s) { return rms(s.samples); }

struct RmsSummary {
  std::size_t count = 0;
  double median_rms = 0.0;
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation of per-segment RMS
  double cv = 0.0;   // std / mean
  std::optional<double> snr;  // mean / std; empty when std == 0
};

struct FingerSummary : RmsSummary {
  FingerId finger;
};

struct FingerStats {
  std::vector<FingerSummary> fingers;  // ascending finger id
  std::optional<RmsSummary> all;       // every segment, regardless of finger
  std::vector<std::string> notes;
};

inline double median(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

/// Needs at least two values.
inline RmsSummary summarize_rms(std::span<const double> values) {
  if (values.size() < 2) throw DomainError("need at least two RMS values");
  RmsSummary s;
  s.count = values.size();
  s.median_rms = median(std::vector<double>(values.begin(), values.end()));
  for (double v : values) s.mean += v;
  s.mean /= static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  s.cv = s.mean > 0.0 ? s.std / s.mean : 0.0;
  if (s.std > 0.0) s.snr = s.mean / s.std;
  return s;
}

/// Per-finger statistics of segment RMS. Fingers with fewer than two
/// segments are left out with a note.
inline FingerStats finger_stats(std::span<const Segment> segments) {
  std::map<int, std::vector<double>> by_finger;
  std::vector<double> every;
  for (const auto& s : segments) {
    every.push_back(rms(s));
    by_finger[s.finger.value()].push_back(every.back());
  }
  FingerStats out;
  for (auto& [f, values] : by_finger) {
    if (values.size() < 2) {
      out.notes.push_back("finger " + std::to_string(f) + " omitted: " + std::to_string(values.size()) +
                          " segment(s), need at least 2");
      continue;
    }
    FingerSummary s;
    static_cast<RmsSummary&>(s) = summarize_rms(values);
    s.finger = FingerId{f};
    if (!s.snr) out.notes.push_back("finger " + std::to_string(f) + ": zero spread, SNR undefined");
    out.fingers.push_back(s);
  }
  if (every.size() >= 2) out.all = summarize_rms(every);
  return out;
}

namespace detail {

inline nlohmann::json summary_json(const RmsSummary& f) {
  return {{"count", f.count},
          {"median_rms_uv", f.median_rms},
          {"mean_rms_uv", f.mean},
          {"std_rms_uv", f.std},
          {"cv", f.cv},
          {"snr", f.snr ? nlohmann::json(*f.snr) : nlohmann::json(nullptr)},
          {"snr_defined", f.snr.has_value()}};
}

}  // namespace detail

inline nlohmann::json to_json(const FingerStats& st) {
  nlohmann::json fingers = nlohmann::json::array();
  for (const auto& f : st.fingers) {
    nlohmann::json j = {{"finger", f.finger.value()}};
    j.update(detail::summary_json(f));
    fingers.push_back(std::move(j));
  }
  return {{"fingers", std::move(fingers)},
          {"all", st.all ? detail::summary_json(*st.all) : nlohmann::json(nullptr)},
          {"notes", st.notes}};
}

inline void write_table(std::ostream& os, const FingerStats& st) {
  char buf[200];
  auto row = [&](const char* label, const RmsSummary& f) {
    char snr[16] = "   inf";
    if (f.snr) std::snprintf(snr, sizeof snr, "%6.3f", *f.snr);
    std::snprintf(buf, sizeof buf, "%6s %6zu %10.3f %8.3f %7.3f %6.3f %s\n", label, f.count, f.median_rms, f.mean,
                  f.std, f.cv, snr);
    os << buf;
  };
  os << "finger  count  median_uV  mean_uV  std_uV     CV    SNR\n";
  for (const auto& f : st.fingers) row(std::to_string(f.finger.value()).c_str(), f);
  if (st.all) row("all", *st.all);
  for (const auto& n : st.notes) os << "note: " << n << '\n';
}

// ---------------------------------------------------------------------------
// Synthetic recordings

struct BurstProfile {
  double duration_ms = 40.0;
  double peak_uv = 30.0;
};

/// Per-finger burst shapes loosely following observed single-press
/// waveforms: short and small for the right ring finger, long for the left
/// middle finger, largest for the right pinky.
inline std::array<BurstProfile, 10> default_burst_profiles() {
  return {{
      {60.0, 35.0},   // 0
      {50.0, 30.0},   // 1
      {110.0, 30.0},  // 2
      {40.0, 30.0},   // 3
      {40.0, 25.0},   // 4
      {40.0, 25.0},   // 5
      {35.0, 30.0},   // 6
      {45.0, 30.0},   // 7
      {15.0, 20.0},   // 8
      {70.0, 50.0},   // 9
  }};
}

struct SynthConfig {
  double sample_rate = 2000.0;
  int channels = 32;
  double noise_floor_uv = 0.0;  // white noise std on every channel
  std::array<BurstProfile, 10> bursts = default_burst_profiles();
  /// Slow activation around each keystroke: a flat-topped envelope spanning
  /// activity_span_s, centred on the keystroke, on that hand's channels.
  /// Its level is drawn per keystroke from a gamma distribution such that
  /// the pooled RMS over the span has this mean and standard deviation.
  double activity_rms_mean_uv = 0.0;
  double activity_rms_std_uv = 0.0;
  double activity_span_s = 2.0;
  double tail_s = 1.0;  // recording continues this long after the last keystroke
  std::vector<Keystroke> schedule;
};

/// Keystrokes typing text at a fixed interval, starting at start_s.
inline std::vector<Keystroke> typing_schedule(std::string_view text, const KeyMap& km, double interval_s,
                                              double start_s = 1.0) {
  const FingerEvents ev = fingers_for_text(text, km);
  std::vector<Keystroke> out;
  for (std::size_t i = 0; i < ev.size(); ++i) {
    out.push_back({start_s + interval_s * static_cast<double>(i), text[i], ev[i]});
  }
  return out;
}

namespace detail {

/// Tukey window with cosine tapers over fraction `taper` of its length.
inline double tukey(double x, double taper) {
  if (x < 0.0 || x > 1.0) return 0.0;
  const double half = taper / 2.0;
  if (x < half) return 0.5 * (1.0 - std::cos(std::numbers::pi * x / half));
  if (x > 1.0 - half) return 0.5 * (1.0 - std::cos(std::numbers::pi * (1.0 - x) / half));
  return 1.0;
}

inline constexpr double kActivityTaper = 0.1;

inline std::pair<int, int> hand_channels(FingerId f, int channels) {
  const int half = channels / 2;
  return f.is_left() ? std::pair{0, half} : std::pair{half, channels};
}

}  // namespace detail

/// Renders the schedule into a recording. Every keystroke adds an activation
/// envelope and a Hann-shaped broadband burst on its hand's channels, on top
/// of a global noise floor. Overlapping contributions add.
inline Recording synthesize(const SynthConfig& cfg, std::uint64_t seed) {
  if (!(cfg.sample_rate > 0.0)) throw ConfigError("sample_rate must be positive");
  if (cfg.channels < 2 || cfg.channels % 2) throw ConfigError("channels must be even and >= 2");
  for (const auto& b : cfg.bursts) {
    if (!(b.duration_ms > 0.0) || b.duration_ms >= 2000.0) throw ConfigError("burst duration outside (0, 2000) ms");
  }
  if (cfg.activity_rms_mean_uv < 0.0 || cfg.activity_rms_std_uv < 0.0) {
    throw ConfigError("activity level must be non-negative");
  }

  Recording rec;
  rec.channels = cfg.channels;
  rec.sample_rate = cfg.sample_rate;
  rec.keystrokes = cfg.schedule;
  const double end_s = cfg.schedule.empty() ? cfg.tail_s : cfg.schedule.back().time + cfg.tail_s;
  rec.n_samples = static_cast<std::size_t>(std::ceil(end_s * cfg.sample_rate));
  rec.samples.assign(rec.n_samples * cfg.channels, 0.0f);
  rec.validate();

  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  // Levels are drawn first so bursts and envelopes do not shift the stream.
  const double mu = cfg.activity_rms_mean_uv, sigma = cfg.activity_rms_std_uv;
  std::vector<double> levels(cfg.schedule.size(), mu);
  if (mu > 0.0 && sigma > 0.0) {
    std::gamma_distribution<double> gamma((mu / sigma) * (mu / sigma), sigma * sigma / mu);
    for (auto& l : levels) l = gamma(rng);
  }

  // Activity lives on half the channels, and the flat-top envelope has mean
  // square 1 - 0.625 * taper; scale so pooled RMS over the span equals the level.
  const double activity_scale = std::sqrt(2.0 / (1.0 - 0.625 * detail::kActivityTaper));
  const auto n = static_cast<std::int64_t>(rec.n_samples);
  for (std::size_t k = 0; k < cfg.schedule.size(); ++k) {
    const Keystroke& ks = cfg.schedule[k];
    const auto [c0, c1] = detail::hand_channels(ks.finger, cfg.channels);
    const double gain = mu > 0.0 ? levels[k] / mu : 1.0;

    if (levels[k] > 0.0) {
      const double span = cfg.activity_span_s;
      const auto t0 = static_cast<std::int64_t>(std::llround((ks.time - span / 2) * cfg.sample_rate));
      const auto len = static_cast<std::int64_t>(std::llround(span * cfg.sample_rate));
      for (std::int64_t i = 0; i < len; ++i) {
        const std::int64_t t = t0 + i;
        const double env = detail::tukey((static_cast<double>(i) + 0.5) / static_cast<double>(len),
                                         detail::kActivityTaper);
        for (int c = c0; c < c1; ++c) {
          const double v = levels[k] * activity_scale * env * normal(rng);
          if (t >= 0 && t < n) rec.samples[c * rec.n_samples + t] += static_cast<float>(v);
        }
      }
    }

    const BurstProfile& b = cfg.bursts[ks.finger.value()];
    const auto len = std::max<std::int64_t>(1, std::llround(b.duration_ms / 1000.0 * cfg.sample_rate));
    const auto t0 = std::llround(ks.time * cfg.sample_rate) - len / 2;
    for (std::int64_t i = 0; i < len; ++i) {
      const std::int64_t t = t0 + i;
      const double env = std::sin(std::numbers::pi * (static_cast<double>(i) + 0.5) / static_cast<double>(len));
      // Peak excursions near +-peak_uv: noise std is half the peak at the crest.
      const double amp = gain * 0.5 * b.peak_uv * env * env;
      for (int c = c0; c < c1; ++c) {
        const double v = amp * normal(rng);
        if (t >= 0 && t < n) rec.samples[c * rec.n_samples + t] += static_cast<float>(v);
      }
    }
  }

  if (cfg.noise_floor_uv > 0.0) {
    for (auto& s : rec.samples) s += static_cast<float>(cfg.noise_floor_uv * normal(rng));
  }
  return rec;
}

// ---------------------------------------------------------------------------
// Files

namespace detail {

inline void write_f32le(std::ostream& os, std::span<const float> xs) {
  if constexpr (std::endian::native == std::endian::little) {
    os.write(reinterpret_cast<const char*>(xs.data()), static_cast<std::streamsize>(xs.size_bytes()));
  } else {
    for (float f : xs) {
      auto u = std::bit_cast<std::uint32_t>(f);
      char b[4] = {char(u), char(u >> 8), char(u >> 16), char(u >> 24)};
      os.write(b, 4);
    }
  }
}

inline std::vector<float> read_f32le(const std::filesystem::path& path, std::size_t count) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::vector<unsigned char> raw(count * 4);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (static_cast<std::size_t>(in.gcount()) != raw.size()) {
    throw DataError(path.string() + ": expected " + std::to_string(count) + " float32 samples");
  }
  std::vector<float> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint32_t u = raw[4 * i] | (raw[4 * i + 1] << 8) | (raw[4 * i + 2] << 16) |
                            (static_cast<std::uint32_t>(raw[4 * i + 3]) << 24);
    out[i] = std::bit_cast<float>(u);
  }
  return out;
}

inline std::string key_token(char key) { return key == ' ' ? "space" : std::string(1, key); }

inline char parse_key_token(const std::string& tok, std::size_t lineno) {
  if (tok == "space" || tok == "SPACE" || tok == " ") return ' ';
  if (tok.size() == 1) return tok[0];
  throw ParseError(lineno, "bad key '" + tok + "'");
}

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace detail

/// Keystroke CSV: header `timestamp,key,finger`, space written as `space`.
inline void write_keystrokes_csv(std::ostream& os, std::span<const Keystroke> ks) {
  os << "timestamp,key,finger\n";
  char buf[64];
  for (const auto& k : ks) {
    std::snprintf(buf, sizeof buf, "%.6f", k.time);
    os << buf << ',' << detail::key_token(k.key) << ',' << k.finger.value() << '\n';
  }
}

inline std::vector<Keystroke> read_keystrokes_csv(std::istream& is) {
  std::vector<Keystroke> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (lineno == 1 && line.rfind("timestamp", 0) == 0) continue;
    const auto cells = detail::split_csv(line);
    if (cells.size() != 3) throw ParseError(lineno, "expected timestamp,key,finger");
    Keystroke k;
    try {
      k.time = std::stod(cells[0]);
      k.finger = FingerId{std::stoi(cells[2])};
    } catch (const std::exception&) {
      throw ParseError(lineno, "bad number");
    }
    k.key = detail::parse_key_token(cells[1], lineno);
    out.push_back(k);
  }
  return out;
}

/// Recording container: `manifest.json`, `samples.f32` (float32 LE,
/// channel-major) and `keystrokes.csv`.
inline void write_recording(const std::filesystem::path& dir, const Recording& rec,
                            const nlohmann::json& metadata = nlohmann::json::object()) {
  rec.validate();
  std::filesystem::create_directories(dir);
  nlohmann::json manifest = {{"format", "myotext-recording"}, {"version", 1},
                             {"channels", rec.channels},     {"sample_rate", rec.sample_rate},
                             {"n_samples", rec.n_samples},   {"units", "uV"},
                             {"layout", "channel-major"},    {"dtype", "float32le"},
                             {"samples_file", "samples.f32"}, {"keystrokes_file", "keystrokes.csv"},
                             {"metadata", metadata}};
  std::ofstream m(dir / "manifest.json");
  if (!m) throw IoError("cannot write " + (dir / "manifest.json").string());
  m << manifest.dump(2) << '\n';
  std::ofstream s(dir / "samples.f32", std::ios::binary);
  if (!s) throw IoError("cannot write " + (dir / "samples.f32").string());
  detail::write_f32le(s, rec.samples);
  std::ofstream k(dir / "keystrokes.csv");
  if (!k) throw IoError("cannot write " + (dir / "keystrokes.csv").string());
  write_keystrokes_csv(k, rec.keystrokes);
}

inline Recording read_recording(const std::filesystem::path& dir) {
  std::ifstream m(dir / "manifest.json");
  if (!m) throw IoError("cannot read " + (dir / "manifest.json").string());
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(m);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("manifest.json: " + std::string(e.what()));
  }
  Recording rec;
  try {
    rec.channels = manifest.at("channels").get<int>();
    rec.sample_rate = manifest.at("sample_rate").get<double>();
    rec.n_samples = manifest.at("n_samples").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError("manifest.json: " + std::string(e.what()));
  }
  if (manifest.value("layout", std::string("channel-major")) != "channel-major") {
    throw DataError("only channel-major recordings are supported");
  }
  rec.samples = detail::read_f32le(dir / manifest.value("samples_file", std::string("samples.f32")),
                                   rec.n_samples * static_cast<std::size_t>(rec.channels));
  std::ifstream k(dir / manifest.value("keystrokes_file", std::string("keystrokes.csv")));
  if (!k) throw IoError("cannot read keystroke file in " + dir.string());
  rec.keystrokes = read_keystrokes_csv(k);
  rec.validate();
  return rec;
}

/// Small hand-made recordings: one CSV row per time step, one column per channel.
inline Recording read_recording_csv(std::istream& samples_csv, std::istream& keystrokes_csv, double sample_rate) {
  std::vector<std::vector<float>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(samples_csv, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<float> row;
    for (const auto& cell : detail::split_csv(line)) {
      try {
        row.push_back(std::stof(cell));
      } catch (const std::exception&) {
        throw ParseError(lineno, "bad sample '" + cell + "'");
      }
    }
    if (!rows.empty() && row.size() != rows.front().size()) throw ParseError(lineno, "ragged sample row");
    rows.push_back(std::move(row));
  }
  Recording rec;
  rec.sample_rate = sample_rate;
  rec.n_samples = rows.size();
  rec.channels = rows.empty() ? 1 : static_cast<int>(rows.front().size());
  rec.samples.assign(rec.n_samples * rec.channels, 0.0f);
  for (std::size_t t = 0; t < rows.size(); ++t) {
    for (int c = 0; c < rec.channels; ++c) rec.samples[c * rec.n_samples + t] = rows[t][c];
  }
  rec.keystrokes = read_keystrokes_csv(keystrokes_csv);
  rec.validate();
  return rec;
}

/// Writes seg_NNNNNN.json sidecars with seg_NNNNNN.f32 sample files.
inline void write_segments(const std::filesystem::path& dir, std::span<const Segment> segments) {
  std::filesystem::create_directories(dir);
  for (std::size_t i = 0; i < segments.size(); ++i) {
    char stem[32];
    std::snprintf(stem, sizeof stem, "seg_%06zu", i);
    const auto& s = segments[i];
    nlohmann::json side = {{"key", detail::key_token(s.key)}, {"finger", s.finger.value()},
                           {"rate", s.sample_rate},           {"channels", s.channels},
                           {"length", s.length},              {"padded", s.padded},
                           {"samples_file", std::string(stem) + ".f32"}};
    std::ofstream j(dir / (std::string(stem) + ".json"));
    if (!j) throw IoError("cannot write segment sidecar in " + dir.string());
    j << side.dump() << '\n';
    std::ofstream f(dir / (std::string(stem) + ".f32"), std::ios::binary);
    detail::write_f32le(f, s.samples);
  }
}

inline Segment read_segment(const std::filesystem::path& sidecar) {
  std::ifstream in(sidecar);
  if (!in) throw IoError("cannot read " + sidecar.string());
  Segment s;
  try {
    const auto j = nlohmann::json::parse(in);
    s.key = detail::parse_key_token(j.at("key").get<std::string>(), 1);
    s.finger = FingerId{j.at("finger").get<int>()};
    s.sample_rate = j.at("rate").get<double>();
    s.channels = j.at("channels").get<int>();
    s.length = j.at("length").get<std::size_t>();
    s.padded = j.value("padded", false);
    s.samples = detail::read_f32le(sidecar.parent_path() / j.at("samples_file").get<std::string>(),
                                   s.length * static_cast<std::size_t>(s.channels));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(sidecar.string() + ": " + e.what());
  }
  return s;
}

}  // namespace myotext
