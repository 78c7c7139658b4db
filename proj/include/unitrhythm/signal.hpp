#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

#include "unitrhythm/clusterer.hpp"

namespace unitrhythm {

inline constexpr double kDefaultSampleRate = 16000.0;
inline constexpr double kDefaultVadThresholdDb = 40.0;
inline constexpr double kDefaultVoicingThreshold = 0.45;
inline constexpr double kMinPitchHz = 60.0;
inline constexpr double kMaxPitchHz = 400.0;

struct Waveform {
  std::vector<double> samples;  // mono, in [-1, 1]
  double sample_rate = kDefaultSampleRate;
};

/// PCM16 mono RIFF/WAVE only; anything else is UnsupportedWav.
Waveform read_wav(const std::filesystem::path& path);
void write_wav(const std::filesystem::path& path, const Waveform& wave);

struct FrameConfig {
  std::size_t window = 400;  // 25 ms at 16 kHz
  std::size_t hop = 320;     // 20 ms at 16 kHz, one flag per 50 Hz feature frame
  double vad_threshold_db = kDefaultVadThresholdDb;
  double voicing_threshold = kDefaultVoicingThreshold;

  /// 25 ms window and a hop matching the feature frame rate.
  static FrameConfig for_rates(double sample_rate, double frame_rate);
};

/// Frame t covers samples [t*hop, t*hop + window), zero-padded past the end.
/// There are ceil(num_samples / hop) frames.
std::size_t num_frames(std::size_t num_samples, std::size_t hop);

std::vector<double> frame_energy(const Waveform& wave, std::size_t window, std::size_t hop);

/// Silent iff the frame's RMS is zero or lies more than `threshold_db` below the
/// 95th-percentile (nearest-rank) frame energy; then a 3-frame majority pass.
std::vector<bool> detect_silence(const std::vector<double>& energies,
                                 double threshold_db = kDefaultVadThresholdDb);

/// Peak of the mean-removed normalized autocorrelation over 60-400 Hz lags, per frame.
std::vector<double> periodicity(const Waveform& wave, std::size_t window, std::size_t hop);

/// Voiced iff the periodicity peak exceeds `threshold` and the frame is not silent.
std::vector<bool> detect_voicing(const Waveform& wave, std::size_t window, std::size_t hop,
                                 const std::vector<bool>& silent,
                                 double threshold = kDefaultVoicingThreshold);

UtteranceFlags compute_frame_flags(const Waveform& wave, const FrameConfig& config);

/// Flags TSV: frame_index, silent, voiced (0/1).
void write_flags(const std::filesystem::path& path, const UtteranceFlags& flags);

}  // namespace unitrhythm
