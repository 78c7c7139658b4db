#include <cmath>
#include <functional>
#include <numbers>
#include <random>

#include "test_util.hpp"
#include "unitrhythm/signal.hpp"

using namespace unitrhythm;
using testutil::error_kind;

namespace {

Waveform tone(double seconds, double sr, const std::function<double(double)>& f) {
  Waveform w;
  w.sample_rate = sr;
  const auto n = static_cast<std::size_t>(seconds * sr);
  for (std::size_t i = 0; i < n; ++i) w.samples.push_back(f(static_cast<double>(i) / sr));
  return w;
}

double sawtooth(double t, double f0) { return 2.0 * (t * f0 - std::floor(t * f0 + 0.5)); }

}  // namespace

TEST_CASE("frame counts and energies") {
  CHECK(num_frames(16000, 320) == 50);
  CHECK(num_frames(16001, 320) == 51);
  CHECK(num_frames(0, 320) == 0);

  Waveform zeros{std::vector<double>(3200, 0.0), 16000};
  for (double e : frame_energy(zeros, 400, 320)) CHECK(e == 0.0);

  Waveform flat{std::vector<double>(3200, 0.25), 16000};
  const auto e = frame_energy(flat, 400, 320);
  REQUIRE(e.size() == 10);
  for (std::size_t t = 0; t + 2 < e.size(); ++t) CHECK(e[t] == doctest::Approx(0.25).epsilon(1e-12));
  // The last frame is zero-padded past the end of the signal.
  CHECK(e.back() == doctest::Approx(0.25 * std::sqrt(320.0 / 400.0)).epsilon(1e-12));

  // 400 samples at 16 kHz hold exactly 10 periods of 400 Hz.
  const Waveform sine = tone(1.0, 16000, [](double t) { return std::sin(2 * std::numbers::pi * 400 * t); });
  const auto es = frame_energy(sine, 400, 320);
  for (std::size_t t = 0; t + 2 < es.size(); ++t) {
    CHECK(std::abs(es[t] - std::sqrt(0.5)) < 1e-3);
  }
}

TEST_CASE("silence detection") {
  const auto all = detect_silence(std::vector<double>(20, 0.0));
  for (bool s : all) CHECK(s);
  const auto none = detect_silence(std::vector<double>(20, 0.3));
  for (bool s : none) CHECK_FALSE(s);

  Waveform burst{std::vector<double>(16000, 0.0), 16000};
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (std::size_t i = 6400; i < 9600; ++i) burst.samples[i] = u(rng);
  const auto energy = frame_energy(burst, 400, 320);
  const auto silent = detect_silence(energy);
  for (std::size_t t = 0; t < silent.size(); ++t) {
    if (t < 19 || t > 30) CHECK(silent[t]);
    if (t >= 21 && t <= 28) CHECK_FALSE(silent[t]);
  }
}

TEST_CASE("silence detection is gain invariant") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> e(200);
  for (double& v : e) v = std::pow(10.0, -4 * u(rng));
  std::vector<double> scaled = e;
  for (double& v : scaled) v *= 8.0;
  CHECK(detect_silence(e) == detect_silence(scaled));
}

TEST_CASE("voicing on periodic and noise signals") {
  const Waveform saw = tone(1.0, 16000, [](double t) { return 0.5 * sawtooth(t, 120.0); });
  const FrameConfig fc;
  const UtteranceFlags flags = compute_frame_flags(saw, fc);
  std::size_t voiced = 0, interior = 0;
  for (std::size_t t = 1; t + 2 < flags.voiced.size(); ++t, ++interior) voiced += flags.voiced[t];
  CHECK(static_cast<double>(voiced) >= 0.95 * static_cast<double>(interior));

  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  const Waveform noise = tone(1.0, 16000, [&](double) { return u(rng); });
  const UtteranceFlags nf = compute_frame_flags(noise, fc);
  std::size_t unvoiced = 0;
  for (bool v : nf.voiced) unvoiced += !v;
  CHECK(static_cast<double>(unvoiced) >= 0.9 * static_cast<double>(nf.voiced.size()));

  Waveform zeros{std::vector<double>(16000, 0.0), 16000};
  for (bool v : compute_frame_flags(zeros, fc).voiced) CHECK_FALSE(v);

  CHECK(error_kind([&] { periodicity(saw, 200, 160); }) == ErrorKind::WindowTooShort);
  CHECK(error_kind([&] { compute_frame_flags(Waveform{{}, 16000}, fc); }) ==
        ErrorKind::EmptyWaveform);
}

TEST_CASE("wav round trip") {
  testutil::TempDir dir("wav");
  Waveform w{{0.0, 0.5, -0.5, 0.999, -1.0}, 16000};
  write_wav(dir / "a.wav", w);
  const Waveform back = read_wav(dir / "a.wav");
  CHECK(back.sample_rate == 16000);
  REQUIRE(back.samples.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) CHECK(std::abs(back.samples[i] - w.samples[i]) < 1.0 / 32767);
  CHECK(error_kind([&] { read_wav(dir / "missing.wav"); }) == ErrorKind::IoError);
}

TEST_CASE("frame config follows the rates") {
  const FrameConfig fc = FrameConfig::for_rates(16000, 50);
  CHECK(fc.hop == 320);
  CHECK(fc.window == 400);
  const FrameConfig fast = FrameConfig::for_rates(16000, 25);
  CHECK(fast.hop == 640);
  CHECK(fast.window == 640);
}
