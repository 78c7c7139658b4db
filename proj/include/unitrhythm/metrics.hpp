#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace unitrhythm {

enum class Tier { Phone, Word };

struct Interval {
  Tier tier = Tier::Phone;
  double start = 0.0;
  double end = 0.0;
  std::string label;

  double duration() const noexcept { return end - start; }
};

struct Alignment {
  std::vector<Interval> intervals;
  double duration = 0.0;

  std::vector<Interval> tier(Tier t) const;
};

/// Intervals within [0, duration]; per tier non-overlapping and time-ordered.
void validate(const Alignment& aln);

// Alignment TSV: tier (phone|word), start_sec, end_sec, label. An optional
// "# duration=<sec>" comment sets the utterance duration; otherwise the last end time.
Alignment parse_alignment_tsv(std::string_view text, std::string_view context = "alignment");
std::string format_alignment_tsv(const Alignment& aln);
Alignment read_alignment(const std::filesystem::path& path);
void write_alignment(const std::filesystem::path& path, const Alignment& aln);

enum class SoundType { Vowel, Approximant, Nasal, Fricative, Stop, Silence };

inline constexpr SoundType kSoundTypes[] = {SoundType::Vowel,     SoundType::Approximant,
                                            SoundType::Nasal,     SoundType::Fricative,
                                            SoundType::Stop,      SoundType::Silence};

std::string_view to_string(SoundType t) noexcept;
SoundType sound_type_from_string(std::string_view s);

/// Phone label -> sound type. Lookups ignore case and trailing stress digits.
class SoundTypeTable {
 public:
  /// English ARPAbet inventory, affricates folded into stops, plus silence markers.
  static SoundTypeTable english();
  /// TSV of label, type lines.
  static SoundTypeTable from_file(const std::filesystem::path& path);

  void set(std::string_view label, SoundType type);
  bool contains(std::string_view label) const;
  /// Throws UnknownPhoneLabel.
  SoundType at(std::string_view label) const;
  bool is_silence(std::string_view label) const;

 private:
  static std::string normalize(std::string_view label);
  std::map<std::string, SoundType> table_;
};

struct Correlation {
  double r = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

/// Sample Pearson r with a 95% Fisher-z confidence interval.
Correlation pearson_r(std::span<const double> xs, std::span<const double> ys);

struct LengthErrors {
  double tle = 0.0;  // seconds, silences included
  double wle = 0.0;  // mean absolute word-duration difference, seconds
  double ple = 0.0;  // mean absolute non-silence phone-duration difference, seconds
  std::size_t words = 0;
  std::size_t phones = 0;
};

/// Requires identical word and non-silence phone label sequences.
LengthErrors length_errors(const Alignment& converted, const Alignment& target,
                           const SoundTypeTable& table = SoundTypeTable::english());

/// Exact 1-Wasserstein distance between two empirical distributions, in the
/// units of the samples.
double wasserstein1(std::span<const double> a, std::span<const double> b);

/// Phone-tier durations (seconds) bucketed by sound type; every type is present.
std::map<SoundType, std::vector<double>> durations_by_sound_type(const Alignment& aln,
                                                                 const SoundTypeTable& table);

}  // namespace unitrhythm
