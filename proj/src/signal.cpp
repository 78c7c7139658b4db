#include "unitrhythm/signal.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <sstream>
#include <string>

#include "unitrhythm/error.hpp"
#include "unitrhythm/fileio.hpp"

namespace unitrhythm {

namespace {

std::uint32_t u32le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t u16le(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

}  // namespace

Waveform read_wav(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::string name = path.string();
  if (bytes.size() < 12 || bytes.compare(0, 4, "RIFF") != 0 || bytes.compare(8, 4, "WAVE") != 0) {
    throw Error(ErrorKind::UnsupportedWav, name + " is not a RIFF/WAVE file");
  }
  bool have_fmt = false;
  std::uint16_t channels = 0, bits = 0, format = 0;
  std::uint32_t rate = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::string id = bytes.substr(pos, 4);
    const std::size_t size = u32le(p + pos + 4);
    const std::size_t body = pos + 8;
    if (body + size > bytes.size() && id != "data") {
      throw Error(ErrorKind::TruncatedPayload, name + ": chunk '" + id + "' is truncated");
    }
    if (id == "fmt ") {
      if (size < 16) throw Error(ErrorKind::UnsupportedWav, name + ": short fmt chunk");
      format = u16le(p + body);
      channels = u16le(p + body + 2);
      rate = u32le(p + body + 4);
      bits = u16le(p + body + 14);
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) throw Error(ErrorKind::UnsupportedWav, name + ": data chunk before fmt");
      if (format != 1 || bits != 16) {
        throw Error(ErrorKind::UnsupportedWav, name + ": only PCM16 is supported");
      }
      if (channels != 1) {
        throw Error(ErrorKind::UnsupportedWav,
                    name + ": " + std::to_string(channels) + " channels, expected mono");
      }
      if (rate == 0) throw Error(ErrorKind::UnsupportedWav, name + ": zero sample rate");
      if (body + size > bytes.size()) {
        throw Error(ErrorKind::TruncatedPayload, name + ": data chunk is truncated");
      }
      Waveform w;
      w.sample_rate = static_cast<double>(rate);
      w.samples.resize(size / 2);
      for (std::size_t i = 0; i < w.samples.size(); ++i) {
        const auto raw = static_cast<std::int16_t>(u16le(p + body + 2 * i));
        w.samples[i] = static_cast<double>(raw) / 32768.0;
      }
      return w;
    }
    pos = body + size + (size & 1);
  }
  throw Error(ErrorKind::UnsupportedWav, name + ": no data chunk");
}

void write_wav(const std::filesystem::path& path, const Waveform& wave) {
  if (!(wave.sample_rate > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "sample rate must be positive");
  }
  const auto rate = static_cast<std::uint32_t>(std::lround(wave.sample_rate));
  const auto data_size = static_cast<std::uint32_t>(wave.samples.size() * 2);
  std::string out;
  out.reserve(44 + data_size);
  out.append("RIFF");
  put_u32(out, 36 + data_size);
  out.append("WAVEfmt ");
  put_u32(out, 16);
  put_u16(out, 1);
  put_u16(out, 1);
  put_u32(out, rate);
  put_u32(out, rate * 2);
  put_u16(out, 2);
  put_u16(out, 16);
  out.append("data");
  put_u32(out, data_size);
  for (double s : wave.samples) {
    const double clipped = std::clamp(s, -1.0, 1.0);
    const long v = std::clamp(std::lround(clipped * 32768.0), -32768L, 32767L);
    put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(v)));
  }
  write_file_atomic(path, out);
}

FrameConfig FrameConfig::for_rates(double sample_rate, double frame_rate) {
  if (!(sample_rate > 0.0) || !(frame_rate > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "sample and frame rates must be positive");
  }
  FrameConfig c;
  c.hop = static_cast<std::size_t>(std::lround(sample_rate / frame_rate));
  c.window = std::max(c.hop, static_cast<std::size_t>(std::lround(0.025 * sample_rate)));
  return c;
}

std::size_t num_frames(std::size_t num_samples, std::size_t hop) {
  return (num_samples + hop - 1) / hop;
}

std::vector<double> frame_energy(const Waveform& wave, std::size_t window, std::size_t hop) {
  if (wave.samples.empty()) throw Error(ErrorKind::EmptyWaveform, "waveform has no samples");
  if (hop < 1 || window < hop) {
    throw Error(ErrorKind::InvalidArgument, "frame energy needs window >= hop >= 1");
  }
  const std::size_t n = wave.samples.size();
  std::vector<double> rms(num_frames(n, hop));
  for (std::size_t t = 0; t < rms.size(); ++t) {
    const std::size_t begin = t * hop;
    const std::size_t end = std::min(n, begin + window);
    double sum = 0.0;
    for (std::size_t i = begin; i < end; ++i) sum += wave.samples[i] * wave.samples[i];
    rms[t] = std::sqrt(sum / static_cast<double>(window));
  }
  return rms;
}

std::vector<bool> detect_silence(const std::vector<double>& energies, double threshold_db) {
  std::vector<bool> silent(energies.size(), false);
  if (energies.empty()) return silent;

  std::vector<double> sorted = energies;
  std::sort(sorted.begin(), sorted.end());
  // nearest-rank percentile so that the reference scales exactly with gain
  const auto rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(sorted.size())));
  const double reference = sorted[std::max<std::size_t>(rank, 1) - 1];
  const double floor = reference * std::pow(10.0, -threshold_db / 20.0);

  std::vector<bool> raw(energies.size());
  for (std::size_t t = 0; t < energies.size(); ++t) {
    raw[t] = energies[t] == 0.0 || energies[t] < floor;
  }
  for (std::size_t t = 0; t < raw.size(); ++t) {
    if (t == 0 || t + 1 == raw.size()) {
      silent[t] = raw[t];
    } else {
      silent[t] = (static_cast<int>(raw[t - 1]) + raw[t] + raw[t + 1]) >= 2;
    }
  }
  return silent;
}

std::vector<double> periodicity(const Waveform& wave, std::size_t window, std::size_t hop) {
  if (wave.samples.empty()) throw Error(ErrorKind::EmptyWaveform, "waveform has no samples");
  if (hop < 1 || window < hop) {
    throw Error(ErrorKind::InvalidArgument, "periodicity needs window >= hop >= 1");
  }
  const auto min_lag = static_cast<std::size_t>(std::ceil(wave.sample_rate / kMaxPitchHz));
  const auto max_lag = static_cast<std::size_t>(std::floor(wave.sample_rate / kMinPitchHz));
  if (window <= max_lag) {
    throw Error(ErrorKind::WindowTooShort,
                "window of " + std::to_string(window) + " samples cannot hold a " +
                    std::to_string(max_lag) + "-sample pitch lag");
  }

  const std::size_t n = wave.samples.size();
  std::vector<double> peaks(num_frames(n, hop), 0.0);
  std::vector<double> frame(window);
  std::vector<double> energy(window + 1);
  for (std::size_t t = 0; t < peaks.size(); ++t) {
    const std::size_t begin = t * hop;
    double mean = 0.0;
    for (std::size_t i = 0; i < window; ++i) {
      frame[i] = begin + i < n ? wave.samples[begin + i] : 0.0;
      mean += frame[i];
    }
    mean /= static_cast<double>(window);
    for (double& v : frame) v -= mean;

    // energy[i] = sum of frame[j]^2 for j < i
    energy[0] = 0.0;
    for (std::size_t i = 0; i < window; ++i) energy[i + 1] = energy[i] + frame[i] * frame[i];

    double best = 0.0;
    for (std::size_t lag = min_lag; lag <= max_lag; ++lag) {
      const std::size_t span = window - lag;
      double cross = 0.0;
      for (std::size_t i = 0; i < span; ++i) cross += frame[i] * frame[i + lag];
      const double head = energy[span];
      const double tail = energy[window] - energy[lag];
      const double denom = std::sqrt(head * tail);
      if (denom > 0.0) best = std::max(best, cross / denom);
    }
    peaks[t] = best;
  }
  return peaks;
}

std::vector<bool> detect_voicing(const Waveform& wave, std::size_t window, std::size_t hop,
                                 const std::vector<bool>& silent, double threshold) {
  const std::vector<double> peaks = periodicity(wave, window, hop);
  if (silent.size() != peaks.size()) {
    throw Error(ErrorKind::FlagLengthMismatch, "silence flags do not match the frame count");
  }
  std::vector<bool> voiced(peaks.size());
  for (std::size_t t = 0; t < peaks.size(); ++t) voiced[t] = !silent[t] && peaks[t] > threshold;
  return voiced;
}

UtteranceFlags compute_frame_flags(const Waveform& wave, const FrameConfig& config) {
  UtteranceFlags flags;
  flags.silent = detect_silence(frame_energy(wave, config.window, config.hop),
                                config.vad_threshold_db);
  flags.voiced = detect_voicing(wave, config.window, config.hop, flags.silent,
                                config.voicing_threshold);
  return flags;
}

void write_flags(const std::filesystem::path& path, const UtteranceFlags& flags) {
  std::ostringstream out;
  out << "# frame_index\tsilent\tvoiced\n";
  for (std::size_t t = 0; t < flags.silent.size(); ++t) {
    out << t << '\t' << (flags.silent[t] ? 1 : 0) << '\t' << (flags.voiced[t] ? 1 : 0) << '\n';
  }
  write_file_atomic(path, out.str());
}

}  // namespace unitrhythm
