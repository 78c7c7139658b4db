#include "unitrhythm/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "unitrhythm/error.hpp"

namespace unitrhythm {

namespace {

constexpr double kPrototypeScale = 4.0;
constexpr double kUnitSpread = 0.15;

struct ScriptPhone {
  SoundClass sound_class;
  std::string label;
  int word;  // -1 for pauses
};

std::vector<ScriptPhone> make_script(std::mt19937_64& rng) {
  static const char* const kSonorants[] = {"AA", "IY", "EH", "UW", "L", "R", "N", "M"};
  static const char* const kObstruents[] = {"S", "T", "K", "F", "P", "Z", "D", "SH"};
  std::uniform_int_distribution<int> n_words(3, 6);
  std::uniform_int_distribution<int> n_phones(2, 5);
  std::uniform_int_distribution<int> pick(0, 7);
  std::bernoulli_distribution coin(0.5);

  std::vector<ScriptPhone> script;
  script.push_back({SoundClass::Silence, "sil", -1});
  const int words = n_words(rng);
  for (int w = 0; w < words; ++w) {
    bool sonorant = coin(rng);
    const int phones = n_phones(rng);
    for (int p = 0; p < phones; ++p) {
      const int k = pick(rng);
      script.push_back(sonorant ? ScriptPhone{SoundClass::Sonorant, kSonorants[k], w}
                                : ScriptPhone{SoundClass::Obstruent, kObstruents[k], w});
      sonorant = !sonorant;
    }
    script.push_back({SoundClass::Silence, "sil", -1});
  }
  return script;
}

std::size_t class_index(SoundClass c) {
  switch (c) {
    case SoundClass::Sonorant: return 0;
    case SoundClass::Obstruent: return 1;
    case SoundClass::Silence: return 2;
    default: throw Error(ErrorKind::Internal, "unlabeled synthetic class");
  }
}

}  // namespace

SyntheticCodebook make_synthetic_codebook(std::uint64_t seed, std::size_t dim,
                                          std::size_t units_per_class) {
  if (dim < 3 || units_per_class < 1) {
    throw Error(ErrorKind::InvalidArgument, "synthetic codebook needs dim >= 3 and units >= 1");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> spread(0.0, kUnitSpread);
  SyntheticCodebook out;
  out.codebook.embeddings = Matrix(3 * units_per_class, dim);
  for (SoundClass c : kLabeledClasses) {
    const std::size_t ci = class_index(c);
    for (std::size_t u = 0; u < units_per_class; ++u) {
      auto row = out.codebook.embeddings.row(ci * units_per_class + u);
      for (std::size_t d = 0; d < dim; ++d) row[d] = spread(rng);
      row[ci] += kPrototypeScale;
      out.unit_class.push_back(c);
    }
  }
  return out;
}

std::vector<SyntheticUtterance> generate_speaker(const SyntheticCodebook& codebook,
                                                 const SyntheticSpeaker& speaker,
                                                 const SyntheticConfig& config) {
  for (SoundClass c : kLabeledClasses) {
    if (!speaker.durations.count(c)) {
      throw Error(ErrorKind::MissingClassModel,
                  "synthetic speaker lacks a " + std::string(to_long_name(c)) + " distribution");
    }
    validate(speaker.durations.at(c));
  }
  const double hop_exact = config.sample_rate / config.frame_rate;
  const auto hop = static_cast<std::size_t>(std::lround(hop_exact));
  if (std::fabs(hop_exact - static_cast<double>(hop)) > 1e-9 || hop == 0) {
    throw Error(ErrorKind::InvalidArgument, "sample rate must be a multiple of the frame rate");
  }

  std::vector<std::vector<std::size_t>> units_of(3);
  for (std::size_t u = 0; u < codebook.unit_class.size(); ++u) {
    units_of[class_index(codebook.unit_class[u])].push_back(u);
  }

  std::mt19937_64 script_rng(config.script_seed);
  std::mt19937_64 rng(speaker.seed);
  std::normal_distribution<double> noise(0.0, config.feature_noise);
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  const std::size_t dim = codebook.codebook.dim();

  std::vector<SyntheticUtterance> out;
  double phase = 0.0;
  for (std::size_t n = 0; n < config.utterances; ++n) {
    const auto script = make_script(script_rng);
    SyntheticUtterance utt;
    char name[32];
    std::snprintf(name, sizeof(name), "utt%04zu", n);
    utt.name = name;
    utt.features.frame_rate = config.frame_rate;
    utt.wave.sample_rate = config.sample_rate;
    utt.truth.gamma = kDefaultGamma;

    std::vector<std::size_t> frame_units;
    std::size_t cursor = 0;
    int current_word = -1;
    double word_start = 0.0;
    for (std::size_t i = 0; i < script.size(); ++i) {
      const ScriptPhone& ph = script[i];
      const GammaParams& g = speaker.durations.at(ph.sound_class);
      std::gamma_distribution<double> duration(g.shape, 1.0 / g.rate);
      const double seconds = duration(rng);
      const auto frames = static_cast<std::size_t>(
          std::max(1.0, std::round(seconds * config.frame_rate)));

      const auto& pool = units_of[class_index(ph.sound_class)];
      std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
      const std::size_t first_unit = pool[pick(rng)];
      const std::size_t second_unit = pool[pick(rng)];
      const std::size_t split = frames >= 2 && coin(rng) ? frames / 2 : frames;
      for (std::size_t f = 0; f < frames; ++f) frame_units.push_back(f < split ? first_unit : second_unit);

      Segment seg{cursor, cursor + frames, first_unit, static_cast<int>(class_index(ph.sound_class)),
                  ph.sound_class};
      utt.truth.segments.push_back(seg);

      const double start = static_cast<double>(cursor) / config.frame_rate;
      const double end = static_cast<double>(cursor + frames) / config.frame_rate;
      utt.alignment.intervals.push_back(Interval{Tier::Phone, start, end, ph.label});
      if (ph.word != current_word) {
        if (current_word >= 0) {
          utt.alignment.intervals.push_back(
              Interval{Tier::Word, word_start, start, "w" + std::to_string(current_word)});
        }
        current_word = ph.word;
        word_start = start;
      }
      cursor += frames;
    }
    const double total_seconds = static_cast<double>(cursor) / config.frame_rate;
    utt.alignment.duration = total_seconds;
    // words are always closed by a pause, so current_word is -1 here
    std::stable_sort(utt.alignment.intervals.begin(), utt.alignment.intervals.end(),
                     [](const Interval& a, const Interval& b) { return a.tier < b.tier; });

    utt.features.frames = Matrix(cursor, dim);
    for (std::size_t t = 0; t < cursor; ++t) {
      auto row = utt.features.frames.row(t);
      auto unit = codebook.codebook.embeddings.row(frame_units[t]);
      for (std::size_t d = 0; d < dim; ++d) row[d] = unit[d] + noise(rng);
    }

    if (config.with_audio) {
      utt.wave.samples.resize(cursor * hop);
      for (const Segment& seg : utt.truth.segments) {
        for (std::size_t i = seg.start * hop; i < seg.end * hop; ++i) {
          double v = 0.0;
          switch (seg.sound_class) {
            case SoundClass::Sonorant:
              phase += speaker.f0 / config.sample_rate;
              phase -= std::floor(phase);
              v = 0.5 * (2.0 * phase - 1.0);
              break;
            case SoundClass::Obstruent:
              v = 0.3 * uniform(rng);
              break;
            default:
              v = 3e-4 * uniform(rng);
              break;
          }
          utt.wave.samples[i] = v;
        }
      }
    }
    out.push_back(std::move(utt));
  }
  return out;
}

}  // namespace unitrhythm
