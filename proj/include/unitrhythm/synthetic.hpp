#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "unitrhythm/metrics.hpp"
#include "unitrhythm/rhythm.hpp"
#include "unitrhythm/segmenter.hpp"
#include "unitrhythm/signal.hpp"
#include "unitrhythm/units.hpp"

namespace unitrhythm {

/// Codebook with `units_per_class` noisy copies of three orthogonal class prototypes.
struct SyntheticCodebook {
  Codebook codebook;
  std::vector<SoundClass> unit_class;  // ground-truth class of every unit
};

SyntheticCodebook make_synthetic_codebook(std::uint64_t seed, std::size_t dim = 16,
                                          std::size_t units_per_class = 4);

struct SyntheticSpeaker {
  std::map<SoundClass, GammaParams> durations;  // seconds
  double f0 = 120.0;
  std::uint64_t seed = 1;
};

struct SyntheticConfig {
  std::size_t utterances = 20;
  std::uint64_t script_seed = 7;  // shared across speakers so corpora are parallel
  double frame_rate = kDefaultFrameRate;
  double sample_rate = kDefaultSampleRate;
  double feature_noise = 0.1;
  bool with_audio = true;
};

struct SyntheticUtterance {
  std::string name;
  FeatureMatrix features;
  Waveform wave;
  Segmentation truth;  // class-level segments with ground-truth sound classes
  Alignment alignment;
};

std::vector<SyntheticUtterance> generate_speaker(const SyntheticCodebook& codebook,
                                                 const SyntheticSpeaker& speaker,
                                                 const SyntheticConfig& config);

}  // namespace unitrhythm
