#include "unitrhythm/stretcher.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "unitrhythm/error.hpp"
#include "unitrhythm/fileio.hpp"

namespace unitrhythm {

Matrix interpolate(const Matrix& frames, std::size_t target_len) {
  const std::size_t n = frames.rows();
  const std::size_t d = frames.cols();
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "cannot interpolate an empty sequence");
  if (target_len < 1) throw Error(ErrorKind::InvalidArgument, "target length must be positive");

  Matrix out(target_len, d);
  auto sample = [&](std::size_t j, double pos) {
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, n - 1);
    const double w = pos - static_cast<double>(lo);
    auto a = frames.row(lo);
    auto b = frames.row(hi);
    auto dst = out.row(j);
    for (std::size_t k = 0; k < d; ++k) dst[k] = w == 0.0 ? a[k] : (1.0 - w) * a[k] + w * b[k];
  };

  if (target_len == 1) {
    sample(0, 0.5 * static_cast<double>(n - 1));
    return out;
  }
  const double step = static_cast<double>(n - 1) / static_cast<double>(target_len - 1);
  for (std::size_t j = 0; j < target_len; ++j) {
    double pos = static_cast<double>(j) * step;
    if (j + 1 == target_len) pos = static_cast<double>(n - 1);
    sample(j, pos);
  }
  return out;
}

std::size_t stretched_length(std::size_t length, double factor) {
  const double target = std::round(static_cast<double>(length) * factor);
  return target < 1.0 ? 1 : static_cast<std::size_t>(target);
}

FeatureMatrix global_stretch(const FeatureMatrix& features, double src_rate, double tgt_rate) {
  if (!(src_rate > 0.0) || !(tgt_rate > 0.0) || !std::isfinite(src_rate) ||
      !std::isfinite(tgt_rate)) {
    throw Error(ErrorKind::NonPositiveRate, "speaking rates must be positive");
  }
  validate(features);
  const double factor = src_rate / tgt_rate;
  return FeatureMatrix{interpolate(features.frames, stretched_length(features.num_frames(), factor)),
                       features.frame_rate};
}

StretchPlan build_global_plan(std::size_t num_frames, double src_rate, double tgt_rate) {
  if (!(src_rate > 0.0) || !(tgt_rate > 0.0)) {
    throw Error(ErrorKind::NonPositiveRate, "speaking rates must be positive");
  }
  if (num_frames == 0) throw Error(ErrorKind::InvalidArgument, "empty utterance");
  const double factor = src_rate / tgt_rate;
  StretchPlan plan;
  plan.entries.push_back(
      PlanEntry{0, num_frames, SoundClass::Unknown, factor, stretched_length(num_frames, factor)});
  plan.total_frames = plan.entries.back().target_frames;
  return plan;
}

StretchPlan build_fine_plan(const Segmentation& seg, const RhythmModel& src, const RhythmModel& tgt,
                            double frame_rate, const PlanOptions& options) {
  if (!(frame_rate > 0.0)) throw Error(ErrorKind::InvalidArgument, "frame rate must be positive");
  check_coverage(seg, seg.num_frames());

  StretchPlan plan;
  for (const Segment& s : seg.segments) {
    if (s.sound_class == SoundClass::Unknown) {
      throw Error(ErrorKind::MissingClassModel,
                  "segment at frame " + std::to_string(s.start) + " has no sound class");
    }
    const GammaParams& from = src.at(s.sound_class).params;
    const GammaParams& to = tgt.at(s.sound_class).params;
    const double x = static_cast<double>(s.length()) / frame_rate;
    // Upper-tail durations go through the survival function: cdf rounds to 1
    // long before the quantile map stops being informative.
    const double u = gamma_cdf(from, x);
    double y;
    if (u <= 0.5) {
      y = gamma_quantile(to, u);
    } else {
      const double q = std::max(gamma_sf(from, x), std::numeric_limits<double>::denorm_min());
      y = gamma_isf(to, q);
    }
    double factor = y / x;
    if (options.clamp) factor = std::clamp(factor, kClampLow, kClampHigh);
    if (!(factor > 0.0)) {
      // u underflowed to zero; keep the segment at its minimum length
      factor = 1.0 / static_cast<double>(s.length());
    }
    PlanEntry e{s.start, s.end, s.sound_class, factor, stretched_length(s.length(), factor)};
    plan.total_frames += e.target_frames;
    plan.entries.push_back(e);
  }
  return plan;
}

FeatureMatrix apply_plan(const FeatureMatrix& features, const StretchPlan& plan) {
  validate(features);
  std::size_t cursor = 0;
  std::size_t total = 0;
  for (const PlanEntry& e : plan.entries) {
    if (e.start != cursor || e.end <= e.start || e.target_frames < 1) {
      throw Error(ErrorKind::PlanCoverageMismatch,
                  "plan entry [" + std::to_string(e.start) + ", " + std::to_string(e.end) +
                      ") does not continue at frame " + std::to_string(cursor));
    }
    cursor = e.end;
    total += e.target_frames;
  }
  if (cursor != features.num_frames() || total != plan.total_frames) {
    throw Error(ErrorKind::PlanCoverageMismatch,
                "plan covers " + std::to_string(cursor) + " of " +
                    std::to_string(features.num_frames()) + " frames");
  }

  FeatureMatrix out{Matrix(), features.frame_rate};
  for (const PlanEntry& e : plan.entries) {
    out.frames.append_rows(interpolate(features.frames.slice_rows(e.start, e.end), e.target_frames));
  }
  return out;
}

double warp_time(const StretchPlan& plan, double seconds, double frame_rate) {
  if (plan.entries.empty()) throw Error(ErrorKind::InvalidArgument, "empty plan");
  const double frame = seconds * frame_rate;
  double out_start = 0.0;
  for (const PlanEntry& e : plan.entries) {
    const auto a = static_cast<double>(e.start);
    const auto b = static_cast<double>(e.end);
    const auto len_out = static_cast<double>(e.target_frames);
    if (frame <= b || &e == &plan.entries.back()) {
      const double within = std::max(0.0, frame - a);
      return (out_start + within * len_out / (b - a)) / frame_rate;
    }
    out_start += len_out;
  }
  return out_start / frame_rate;
}

std::string format_plan_tsv(const StretchPlan& plan,
                            const std::vector<std::string>& header_comments) {
  std::ostringstream out;
  for (const auto& line : header_comments) out << "# " << line << '\n';
  out << "# total_frames=" << plan.total_frames
      << " rounding=half_away_from_zero min_frames=1 grid=endpoint_preserving\n";
  out << "# start\tend\tclass\tfactor\ttarget_frames\n";
  for (const PlanEntry& e : plan.entries) {
    out << e.start << '\t' << e.end << '\t' << to_string(e.sound_class) << '\t'
        << format_double(e.factor) << '\t' << e.target_frames << '\n';
  }
  return out.str();
}

void write_plan(const std::filesystem::path& path, const StretchPlan& plan,
                const std::vector<std::string>& header_comments) {
  write_file_atomic(path, format_plan_tsv(plan, header_comments));
}

}  // namespace unitrhythm
