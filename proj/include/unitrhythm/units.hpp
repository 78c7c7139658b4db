#pragma once

#include <cstdint>
#include <filesystem>

#include "unitrhythm/matrix.hpp"

namespace unitrhythm {

inline constexpr double kDefaultFrameRate = 50.0;
inline constexpr double kDefaultTemperature = 0.1;

/// Frame-level soft units (or any features), one row per frame.
struct FeatureMatrix {
  Matrix frames;
  double frame_rate = kDefaultFrameRate;

  std::size_t num_frames() const noexcept { return frames.rows(); }
  std::size_t dim() const noexcept { return frames.cols(); }
  double duration_seconds() const noexcept {
    return static_cast<double>(frames.rows()) / frame_rate;
  }
};

/// Discrete-unit dictionary: K embeddings of dimension D plus the softmax temperature.
struct Codebook {
  Matrix embeddings;
  double temperature = kDefaultTemperature;

  std::size_t size() const noexcept { return embeddings.rows(); }
  std::size_t dim() const noexcept { return embeddings.cols(); }
};

/// T x K log probabilities; each row log-sum-exps to zero.
struct LogProbMatrix {
  Matrix values;

  std::size_t num_frames() const noexcept { return values.rows(); }
  std::size_t num_units() const noexcept { return values.cols(); }
};

void validate(const FeatureMatrix& features);
void validate(const Codebook& codebook);

/// log p(i | s_t): log-softmax over units of cosine(s_t, e_i) / temperature.
/// Throws ZeroNormRow for an all-zero frame and DimensionMismatch when D differs.
LogProbMatrix unit_log_probs(const FeatureMatrix& features, const Codebook& codebook);

// URMX matrix files: "URMX", u32 version=1, u32 dtype=1 (f32), u64 rows, u64 cols,
// then rows*cols little-endian f32 in row-major order.
inline constexpr std::uint32_t kMatrixFormatVersion = 1;
inline constexpr std::uint32_t kMatrixDtypeF32 = 1;

Matrix read_matrix_file(const std::filesystem::path& path);
void write_matrix_file(const std::filesystem::path& path, const Matrix& matrix);

FeatureMatrix read_matrix(const std::filesystem::path& path,
                          double frame_rate = kDefaultFrameRate);
void write_matrix(const std::filesystem::path& path, const FeatureMatrix& features);

Codebook read_codebook(const std::filesystem::path& path,
                       double temperature = kDefaultTemperature);

}  // namespace unitrhythm
