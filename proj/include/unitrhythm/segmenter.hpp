#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "unitrhythm/units.hpp"

namespace unitrhythm {

inline constexpr double kDefaultGamma = 2.0;

enum class SoundClass { Sonorant, Obstruent, Silence, Unknown };

std::string_view to_string(SoundClass c) noexcept;       // "SON" | "OBS" | "SIL" | "UNK"
std::string_view to_long_name(SoundClass c) noexcept;    // "sonorant" | ...
SoundClass sound_class_from_string(std::string_view s);  // accepts either spelling

inline constexpr SoundClass kLabeledClasses[] = {SoundClass::Sonorant, SoundClass::Obstruent,
                                                 SoundClass::Silence};

/// Frames [start, end) represented by one discrete unit.
struct Segment {
  std::size_t start = 0;
  std::size_t end = 0;
  std::size_t unit = 0;
  int cluster = -1;
  SoundClass sound_class = SoundClass::Unknown;

  std::size_t length() const noexcept { return end - start; }
  friend bool operator==(const Segment&, const Segment&) = default;
};

struct Segmentation {
  std::vector<Segment> segments;
  double gamma = kDefaultGamma;

  std::size_t num_frames() const noexcept { return segments.empty() ? 0 : segments.back().end; }
  friend bool operator==(const Segmentation&, const Segmentation&) = default;
};

/// Throws CoverageGap unless segments tile [0, num_frames) in order.
void check_coverage(const Segmentation& seg, std::size_t num_frames);

/// Sum over segments of the in-segment log probabilities of the segment unit plus
/// gamma * (length - 1).
double segment_score(const LogProbMatrix& logprobs, const Segmentation& seg);

struct SegmenterOptions {
  double gamma = kDefaultGamma;
  /// Longest allowed segment in frames; 0 means unlimited.
  std::size_t max_segment_length = 0;
};

/// Exact maximiser of segment_score by dynamic programming, O(T^2 K).
/// Ties: higher score, then fewer segments, then lexicographically smallest
/// boundary list, then smallest unit index.
Segmentation best_segmentation(const LogProbMatrix& logprobs, const SegmenterOptions& options = {});

// Segmentation TSV: start_frame, end_frame, unit_id, cluster_id, sound_class.
// Lines starting with '#' are comments and are preserved as header text on write.
std::string format_segmentation_tsv(const Segmentation& seg,
                                    const std::vector<std::string>& header_comments = {});
Segmentation parse_segmentation_tsv(std::string_view text, std::string_view context = "segmentation");
void write_segmentation(const std::filesystem::path& path, const Segmentation& seg,
                        const std::vector<std::string>& header_comments = {});
Segmentation read_segmentation(const std::filesystem::path& path);

/// Value of a "# key=value" comment in a segmentation TSV, if present.
std::optional<std::string> header_value(std::string_view text, std::string_view key);

}  // namespace unitrhythm
