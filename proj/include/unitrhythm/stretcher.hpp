#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "unitrhythm/matrix.hpp"
#include "unitrhythm/rhythm.hpp"
#include "unitrhythm/segmenter.hpp"
#include "unitrhythm/units.hpp"

namespace unitrhythm {

/// Linear interpolation onto an endpoint-preserving grid: output row j samples
/// input coordinate j * (T_in - 1) / (target_len - 1). A single output row takes
/// the temporal midpoint.
Matrix interpolate(const Matrix& frames, std::size_t target_len);

/// round-half-away-from-zero, floored at one frame.
std::size_t stretched_length(std::size_t length, double factor);

/// Stretches the whole utterance by src_rate / tgt_rate.
FeatureMatrix global_stretch(const FeatureMatrix& features, double src_rate, double tgt_rate);

struct PlanEntry {
  std::size_t start = 0;
  std::size_t end = 0;
  SoundClass sound_class = SoundClass::Unknown;
  double factor = 1.0;
  std::size_t target_frames = 1;

  std::size_t length() const noexcept { return end - start; }
};

struct StretchPlan {
  std::vector<PlanEntry> entries;
  std::size_t total_frames = 0;
};

struct PlanOptions {
  /// Clamp every factor into [1/4, 4].
  bool clamp = false;
};

inline constexpr double kClampLow = 0.25;
inline constexpr double kClampHigh = 4.0;

/// Inverse-transform duration mapping per segment: x = len / frame_rate,
/// u = F_src,c(x), y = F_tgt,c^{-1}(u), factor = y / x. Above the median the
/// same map is evaluated through the survival functions.
StretchPlan build_fine_plan(const Segmentation& seg, const RhythmModel& src,
                            const RhythmModel& tgt, double frame_rate,
                            const PlanOptions& options = {});

/// One entry spanning the whole utterance with the global rate factor.
StretchPlan build_global_plan(std::size_t num_frames, double src_rate, double tgt_rate);

FeatureMatrix apply_plan(const FeatureMatrix& features, const StretchPlan& plan);

/// Maps a time in seconds on the source timeline to the stretched timeline
/// (piecewise linear through the plan's segment boundaries).
double warp_time(const StretchPlan& plan, double seconds, double frame_rate);

/// Plan TSV: start, end, class, factor, target_frames.
std::string format_plan_tsv(const StretchPlan& plan,
                            const std::vector<std::string>& header_comments = {});
void write_plan(const std::filesystem::path& path, const StretchPlan& plan,
                const std::vector<std::string>& header_comments = {});

}  // namespace unitrhythm
