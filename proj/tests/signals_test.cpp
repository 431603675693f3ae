#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "myotext/signals.hpp"

using namespace myotext;
namespace fs = std::filesystem;

namespace {

/// Recording whose sample at time step t on every channel is f(t).
template <class F>
Recording ramp_recording(double rate, std::size_t n, int channels, std::vector<Keystroke> ks, F f) {
  Recording rec;
  rec.channels = channels;
  rec.sample_rate = rate;
  rec.n_samples = n;
  rec.samples.resize(n * channels);
  for (int c = 0; c < channels; ++c) {
    for (std::size_t t = 0; t < n; ++t) rec.samples[c * n + t] = static_cast<float>(f(t));
  }
  rec.keystrokes = std::move(ks);
  return rec;
}

Keystroke key_at(double t, char key = 'e') {
  const KeyMap km = canonical_keymap();
  return {t, key, key == ' ' ? km.space_finger() : km.finger_of(key)};
}

Segment segment_of(std::vector<float> samples, int finger = 2) {
  Segment s;
  s.finger = FingerId{finger};
  s.channels = 1;
  s.length = samples.size();
  s.samples = std::move(samples);
  return s;
}

fs::path temp_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("myotext_signals_" + name);
  fs::remove_all(p);
  return p;
}

SynthConfig quiet_config() {
  SynthConfig cfg;
  cfg.channels = 4;
  cfg.sample_rate = 1000.0;
  return cfg;
}

}  // namespace

TEST(ExtractTest, WindowIndices) {
  const auto rec = ramp_recording(1000.0, 10000, 2, {key_at(5.0)}, [](std::size_t t) { return double(t); });
  const auto ex = extract_segments(rec);
  ASSERT_EQ(ex.segments.size(), 1u);
  const Segment& s = ex.segments[0];
  EXPECT_EQ(s.length, 2000u);
  EXPECT_FALSE(s.padded);
  EXPECT_EQ(s.samples.front(), 4000.0f);
  EXPECT_EQ(s.samples[1999], 5999.0f);
  EXPECT_EQ(s.samples[2000], 4000.0f);  // second channel starts over
  EXPECT_EQ(s.finger, FingerId{2});
}

TEST(ExtractTest, LeadingPadding) {
  const auto rec = ramp_recording(1000.0, 5000, 1, {key_at(0.2)}, [](std::size_t) { return 1.0; });
  const Segment s = extract_segments(rec).segments.at(0);
  EXPECT_TRUE(s.padded);
  EXPECT_EQ(s.pad_before, 800u);
  EXPECT_EQ(s.pad_after, 0u);
  EXPECT_EQ(s.length, 2000u);
  for (std::size_t i = 0; i < 800; ++i) ASSERT_EQ(s.samples[i], 0.0f);
  EXPECT_EQ(s.samples[800], 1.0f);
}

TEST(ExtractTest, TrailingPadding) {
  const auto rec = ramp_recording(1000.0, 3000, 1, {key_at(2.5)}, [](std::size_t) { return 1.0; });
  const Segment s = extract_segments(rec).segments.at(0);
  EXPECT_TRUE(s.padded);
  EXPECT_EQ(s.pad_after, 500u);
  EXPECT_EQ(s.samples[1499], 1.0f);
  EXPECT_EQ(s.samples[1500], 0.0f);
}

TEST(ExtractTest, OneSegmentPerKeystroke) {
  std::vector<Keystroke> ks;
  for (int i = 0; i < 37; ++i) ks.push_back(key_at(0.1 + 0.3 * i, "qwertyuiop"[i % 10]));
  const auto rec = ramp_recording(500.0, 6000, 3, ks, [](std::size_t) { return 0.5; });
  const auto ex = extract_segments(rec, 0.5, 0.25);
  ASSERT_EQ(ex.segments.size(), 37u);
  for (std::size_t i = 0; i < ks.size(); ++i) {
    EXPECT_EQ(ex.segments[i].length, 375u);
    EXPECT_EQ(ex.segments[i].key, ks[i].key);
    EXPECT_EQ(ex.segments[i].finger, ks[i].finger);
  }
}

TEST(ExtractTest, NoKeystrokesWarns) {
  const auto rec = ramp_recording(1000.0, 100, 1, {}, [](std::size_t) { return 0.0; });
  const auto ex = extract_segments(rec);
  EXPECT_TRUE(ex.segments.empty());
  EXPECT_EQ(ex.warnings.size(), 1u);
}

TEST(ExtractTest, RejectsBadInput) {
  const auto rec = ramp_recording(1000.0, 100, 1, {key_at(0.05)}, [](std::size_t) { return 0.0; });
  EXPECT_THROW(extract_segments(rec, 0.0, 1.0), DomainError);
  auto unordered = ramp_recording(1000.0, 100, 1, {key_at(0.05), key_at(0.05)}, [](std::size_t) { return 0.0; });
  EXPECT_THROW(extract_segments(unordered), DataError);
}

TEST(RmsTest, Constant) { EXPECT_DOUBLE_EQ(rms(segment_of(std::vector<float>(100, 3.0f))), 3.0); }

TEST(RmsTest, SineOverWholePeriods) {
  const double a = 7.5;
  std::vector<float> xs;
  for (int i = 0; i < 4000; ++i) xs.push_back(static_cast<float>(a * std::sin(2 * std::numbers::pi * i / 400.0)));
  EXPECT_NEAR(rms(segment_of(xs)), a / std::sqrt(2.0), 1e-6);
}

TEST(RmsTest, HalfPadded) {
  std::vector<float> xs(1000, 0.0f);
  std::fill(xs.begin() + 500, xs.end(), 4.0f);
  EXPECT_DOUBLE_EQ(rms(segment_of(xs)), 4.0 / std::sqrt(2.0));
}

TEST(RmsTest, EmptyThrows) { EXPECT_THROW(rms(segment_of({})), DomainError); }

TEST(StatsTest, ZeroSpreadHasNoSnr) {
  std::vector<Segment> segs = {segment_of({1, 1}), segment_of({1, 1}), segment_of({1, 1})};
  const auto st = finger_stats(segs);
  ASSERT_EQ(st.fingers.size(), 1u);
  EXPECT_EQ(st.fingers[0].std, 0.0);
  EXPECT_FALSE(st.fingers[0].snr.has_value());
  EXPECT_FALSE(st.notes.empty());
  EXPECT_TRUE(to_json(st)["fingers"][0]["snr"].is_null());
}

TEST(StatsTest, SingleSegmentFingerOmitted) {
  std::vector<Segment> segs = {segment_of({1, 2}, 2), segment_of({3, 4}, 2), segment_of({1, 1}, 8)};
  const auto st = finger_stats(segs);
  ASSERT_EQ(st.fingers.size(), 1u);
  EXPECT_EQ(st.fingers[0].finger, FingerId{2});
  EXPECT_EQ(st.notes.size(), 1u);
  ASSERT_TRUE(st.all.has_value());
  EXPECT_EQ(st.all->count, 3u);
}

TEST(StatsTest, HandComputedSummary) {
  // RMS values 1, 2, 3, 6
  std::vector<Segment> segs = {segment_of({1}), segment_of({2}), segment_of({3}), segment_of({6})};
  const auto st = finger_stats(segs);
  const auto& f = st.fingers.at(0);
  EXPECT_EQ(f.count, 4u);
  EXPECT_DOUBLE_EQ(f.mean, 3.0);
  EXPECT_DOUBLE_EQ(f.median_rms, 2.5);
  EXPECT_DOUBLE_EQ(f.std, std::sqrt(14.0 / 3.0));
  EXPECT_DOUBLE_EQ(f.cv, std::sqrt(14.0 / 3.0) / 3.0);
}

TEST(StatsTest, SnrTimesCvIsOne) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<float> u(-10.0f, 10.0f);
  std::vector<Segment> segs;
  for (int i = 0; i < 300; ++i) {
    std::vector<float> xs(1 + rng() % 50);
    for (auto& x : xs) x = u(rng);
    segs.push_back(segment_of(xs, static_cast<int>(rng() % 10)));
  }
  for (const auto& f : finger_stats(segs).fingers) {
    ASSERT_TRUE(f.snr.has_value());
    EXPECT_NEAR(*f.snr * f.cv, 1.0, 1e-9);
  }
}

TEST(StatsTest, ScalingIsLinear) {
  SynthConfig cfg = quiet_config();
  cfg.noise_floor_uv = 1.0;
  cfg.activity_rms_mean_uv = 10.8;
  cfg.activity_rms_std_uv = 4.8;
  cfg.schedule = typing_schedule("quickbrownfox", canonical_keymap(), 2.5);
  Recording rec = synthesize(cfg, 5);
  const auto base = extract_segments(rec);
  const auto before = finger_stats(base.segments);
  for (auto& s : rec.samples) s *= -2.0f;
  const auto scaled = extract_segments(rec);
  for (std::size_t i = 0; i < base.segments.size(); ++i) {
    EXPECT_NEAR(rms(scaled.segments[i]), 2.0 * rms(base.segments[i]), 1e-9 * rms(base.segments[i]));
  }
  const auto after = finger_stats(scaled.segments);
  ASSERT_EQ(before.fingers.size(), after.fingers.size());
  for (std::size_t i = 0; i < before.fingers.size(); ++i) {
    EXPECT_NEAR(before.fingers[i].cv, after.fingers[i].cv, 1e-9);
  }
}

TEST(SynthTest, SilentOutsideBurst) {
  SynthConfig cfg = quiet_config();
  cfg.schedule = {key_at(1.0, 'o')};
  const Recording rec = synthesize(cfg, 1);
  const auto len = static_cast<std::size_t>(std::llround(cfg.bursts[8].duration_ms));  // 1 kHz: 1 sample per ms
  const std::size_t t0 = 1000 - len / 2;
  double inside = 0.0;
  for (int c = 0; c < rec.channels; ++c) {
    for (std::size_t t = 0; t < rec.n_samples; ++t) {
      const bool in = t >= t0 && t < t0 + len;
      if (in) {
        inside += std::abs(rec.at(c, t));
      } else {
        ASSERT_EQ(rec.at(c, t), 0.0f) << c << " " << t;
      }
    }
  }
  EXPECT_GT(inside, 0.0);
}

TEST(SynthTest, BurstStaysOnTypingHand) {
  SynthConfig cfg = quiet_config();
  cfg.schedule = {key_at(1.0, 'e')};
  const Recording rec = synthesize(cfg, 1);
  for (int c = 2; c < 4; ++c) {
    for (std::size_t t = 0; t < rec.n_samples; ++t) ASSERT_EQ(rec.at(c, t), 0.0f);
  }
}

TEST(SynthTest, LongBurstCarriesMoreEnergy) {
  SynthConfig cfg = quiet_config();
  cfg.bursts[2] = {110.0, 30.0};
  cfg.bursts[8] = {15.0, 30.0};
  std::string text;
  for (int i = 0; i < 40; ++i) text += i % 2 ? 'o' : 'e';
  cfg.schedule = typing_schedule(text, canonical_keymap(), 2.5);
  const auto st = finger_stats(extract_segments(synthesize(cfg, 9)).segments);
  ASSERT_EQ(st.fingers.size(), 2u);
  EXPECT_EQ(st.fingers[0].finger, FingerId{2});
  EXPECT_GT(st.fingers[0].mean, 2.0 * st.fingers[1].mean);
}

TEST(SynthTest, SameSeedSameBytes) {
  SynthConfig cfg = quiet_config();
  cfg.noise_floor_uv = 2.0;
  cfg.activity_rms_mean_uv = 10.8;
  cfg.activity_rms_std_uv = 4.8;
  cfg.schedule = typing_schedule("hello", canonical_keymap(), 0.3);
  const auto a = synthesize(cfg, 77), b = synthesize(cfg, 77), c = synthesize(cfg, 78);
  EXPECT_EQ(a.samples, b.samples);
  EXPECT_NE(a.samples, c.samples);
}

TEST(SynthTest, RejectsBadConfig) {
  SynthConfig cfg = quiet_config();
  cfg.channels = 3;
  EXPECT_THROW(synthesize(cfg, 0), ConfigError);
  cfg = quiet_config();
  cfg.bursts[0].duration_ms = 0.0;
  EXPECT_THROW(synthesize(cfg, 0), ConfigError);
  cfg = quiet_config();
  cfg.sample_rate = 0.0;
  EXPECT_THROW(synthesize(cfg, 0), ConfigError);
}

TEST(SynthTest, CalibratedSpreadReproduced) {
  // Reduced rate keeps the run short; pooled statistics do not depend on it.
  SynthConfig cfg;
  cfg.sample_rate = 500.0;
  cfg.activity_rms_mean_uv = 10.8;
  cfg.activity_rms_std_uv = 4.8;
  std::mt19937_64 rng(2);
  std::string text;
  for (int i = 0; i < 2000; ++i) text += static_cast<char>('a' + rng() % 26);
  cfg.schedule = typing_schedule(text, canonical_keymap(), 2.5);
  const auto st = finger_stats(extract_segments(synthesize(cfg, 2)).segments);
  ASSERT_TRUE(st.all.has_value());
  EXPECT_EQ(st.all->count, 2000u);
  EXPECT_GE(st.all->cv, 0.42);
  EXPECT_LE(st.all->cv, 0.47);
  EXPECT_GE(*st.all->snr, 2.12);
  EXPECT_LE(*st.all->snr, 2.37);
}

TEST(FilesTest, RecordingRoundTrip) {
  SynthConfig cfg = quiet_config();
  cfg.noise_floor_uv = 1.5;
  cfg.schedule = typing_schedule("a b", canonical_keymap(), 0.4);
  const Recording rec = synthesize(cfg, 3);
  const fs::path dir = temp_dir("rec");
  write_recording(dir, rec, {{"seed", 3}});
  const Recording back = read_recording(dir);
  EXPECT_EQ(back.samples, rec.samples);
  EXPECT_EQ(back.channels, rec.channels);
  EXPECT_EQ(back.sample_rate, rec.sample_rate);
  ASSERT_EQ(back.keystrokes.size(), 3u);
  EXPECT_EQ(back.keystrokes[1].key, ' ');
  EXPECT_EQ(back.keystrokes[1].finger, rec.keystrokes[1].finger);
  EXPECT_DOUBLE_EQ(back.keystrokes[2].time, rec.keystrokes[2].time);
  fs::remove_all(dir);
}

TEST(FilesTest, MissingRecordingIsIoError) {
  EXPECT_THROW(read_recording(temp_dir("missing")), IoError);
}

TEST(FilesTest, TruncatedSamplesRejected) {
  SynthConfig cfg = quiet_config();
  cfg.schedule = {key_at(0.5)};
  const fs::path dir = temp_dir("trunc");
  write_recording(dir, synthesize(cfg, 1));
  fs::resize_file(dir / "samples.f32", 100);
  EXPECT_ANY_THROW(read_recording(dir));
  fs::remove_all(dir);
}

TEST(FilesTest, SegmentRoundTrip) {
  const auto rec = ramp_recording(100.0, 500, 2, {key_at(0.5, 'p'), key_at(2.0, ' ')},
                                  [](std::size_t t) { return 0.25 * double(t); });
  const auto ex = extract_segments(rec);
  const fs::path dir = temp_dir("segs");
  write_segments(dir, ex.segments);
  for (std::size_t i = 0; i < ex.segments.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "seg_%06zu.json", i);
    const Segment back = read_segment(dir / name);
    EXPECT_EQ(back.samples, ex.segments[i].samples);
    EXPECT_EQ(back.key, ex.segments[i].key);
    EXPECT_EQ(back.finger, ex.segments[i].finger);
    EXPECT_EQ(back.padded, ex.segments[i].padded);
  }
  fs::remove_all(dir);
}

TEST(FilesTest, CsvImport) {
  std::istringstream samples("1,2\n3,4\n5,6\n7,8\n");
  std::istringstream keys("timestamp,key,finger\n0.02,a,0\n");
  const Recording rec = read_recording_csv(samples, keys, 100.0);
  EXPECT_EQ(rec.channels, 2);
  EXPECT_EQ(rec.n_samples, 4u);
  EXPECT_EQ(rec.at(1, 2), 6.0f);
  const Segment s = extract_segments(rec, 0.01, 0.02).segments.at(0);
  EXPECT_EQ(s.samples, (std::vector<float>{3, 5, 7, 4, 6, 8}));
  std::istringstream ragged("1,2\n3\n");
  std::istringstream keys2("timestamp,key,finger\n");
  EXPECT_THROW(read_recording_csv(ragged, keys2, 100.0), ParseError);
}
