#include "unitrhythm/units.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <limits>
#include <string>

#include "unitrhythm/error.hpp"
#include "unitrhythm/fileio.hpp"

namespace unitrhythm {

namespace {

void check_finite(const Matrix& m, const char* what) {
  for (double v : m.data()) {
    if (!std::isfinite(v)) {
      throw Error(ErrorKind::InvalidArgument, std::string(what) + " contains a non-finite entry");
    }
  }
}

double row_norm(std::span<const double> row) {
  double sum = 0.0;
  for (double v : row) sum += v * v;
  return std::sqrt(sum);
}

template <typename T>
void put_le(std::string& out, T value) {
  static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(bytes[i], bytes[sizeof(T) - 1 - i]);
  }
  out.append(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get_le(const char* p) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, p, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(bytes[i], bytes[sizeof(T) - 1 - i]);
  }
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

constexpr std::size_t kHeaderSize = 4 + 4 + 4 + 8 + 8;

}  // namespace

void validate(const FeatureMatrix& features) {
  if (features.frames.rows() < 1 || features.frames.cols() < 1) {
    throw Error(ErrorKind::InvalidArgument, "feature matrix must have at least one row and column");
  }
  if (!(features.frame_rate > 0.0) || !std::isfinite(features.frame_rate)) {
    throw Error(ErrorKind::InvalidArgument, "frame rate must be positive");
  }
  check_finite(features.frames, "feature matrix");
}

void validate(const Codebook& codebook) {
  if (codebook.size() < 2 || codebook.dim() < 1) {
    throw Error(ErrorKind::InvalidArgument, "codebook needs at least two units");
  }
  if (!(codebook.temperature > 0.0) || !std::isfinite(codebook.temperature)) {
    throw Error(ErrorKind::InvalidArgument, "temperature must be positive");
  }
  check_finite(codebook.embeddings, "codebook");
  for (std::size_t k = 0; k < codebook.size(); ++k) {
    if (!(row_norm(codebook.embeddings.row(k)) > 0.0)) {
      throw Error(ErrorKind::ZeroNormRow, "codebook row " + std::to_string(k) + " has zero norm");
    }
  }
}

LogProbMatrix unit_log_probs(const FeatureMatrix& features, const Codebook& codebook) {
  validate(features);
  validate(codebook);
  if (features.dim() != codebook.dim()) {
    throw Error(ErrorKind::DimensionMismatch,
                "feature dimension " + std::to_string(features.dim()) +
                    " != codebook dimension " + std::to_string(codebook.dim()));
  }
  const std::size_t T = features.num_frames();
  const std::size_t K = codebook.size();
  const std::size_t D = codebook.dim();

  std::vector<double> unit_norms(K);
  for (std::size_t k = 0; k < K; ++k) unit_norms[k] = row_norm(codebook.embeddings.row(k));

  LogProbMatrix out{Matrix(T, K)};
  for (std::size_t t = 0; t < T; ++t) {
    auto frame = features.frames.row(t);
    const double frame_norm = row_norm(frame);
    if (!(frame_norm > 0.0)) {
      throw Error(ErrorKind::ZeroNormRow, "frame " + std::to_string(t) + " has zero norm");
    }
    auto logits = out.values.row(t);
    double peak = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < K; ++k) {
      auto unit = codebook.embeddings.row(k);
      double dot = 0.0;
      for (std::size_t d = 0; d < D; ++d) dot += frame[d] * unit[d];
      logits[k] = dot / (frame_norm * unit_norms[k]) / codebook.temperature;
      peak = std::max(peak, logits[k]);
    }
    double sum = 0.0;
    for (double v : logits) sum += std::exp(v - peak);
    const double log_norm = peak + std::log(sum);
    for (double& v : logits) v -= log_norm;
  }
  return out;
}

Matrix read_matrix_file(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  if (bytes.size() < 4 || bytes.compare(0, 4, "URMX") != 0) {
    throw Error(ErrorKind::BadMagic, path.string() + " is not a URMX matrix file");
  }
  if (bytes.size() < kHeaderSize) {
    throw Error(ErrorKind::TruncatedPayload, path.string() + ": header is truncated");
  }
  const auto version = get_le<std::uint32_t>(bytes.data() + 4);
  if (version != kMatrixFormatVersion) {
    throw Error(ErrorKind::UnsupportedVersion,
                path.string() + ": matrix format version " + std::to_string(version));
  }
  const auto dtype = get_le<std::uint32_t>(bytes.data() + 8);
  if (dtype != kMatrixDtypeF32) {
    throw Error(ErrorKind::UnsupportedVersion, path.string() + ": dtype " + std::to_string(dtype));
  }
  const auto rows = get_le<std::uint64_t>(bytes.data() + 12);
  const auto cols = get_le<std::uint64_t>(bytes.data() + 20);
  const std::size_t payload = bytes.size() - kHeaderSize;
  if (cols != 0 && rows > payload / sizeof(float) / cols) {
    throw Error(ErrorKind::TruncatedPayload,
                path.string() + ": header declares " + std::to_string(rows) + "x" +
                    std::to_string(cols) + " but payload holds " +
                    std::to_string(payload / sizeof(float)) + " floats");
  }
  const std::size_t count = static_cast<std::size_t>(rows * cols);
  if (payload != count * sizeof(float)) {
    throw Error(ErrorKind::BadFormat, path.string() + ": trailing bytes after payload");
  }
  std::vector<double> values(count);
  const char* p = bytes.data() + kHeaderSize;
  for (std::size_t i = 0; i < count; ++i, p += sizeof(float)) {
    values[i] = static_cast<double>(get_le<float>(p));
  }
  return Matrix(static_cast<std::size_t>(rows), static_cast<std::size_t>(cols), std::move(values));
}

void write_matrix_file(const std::filesystem::path& path, const Matrix& matrix) {
  std::string out;
  out.reserve(kHeaderSize + matrix.rows() * matrix.cols() * sizeof(float));
  out.append("URMX");
  put_le<std::uint32_t>(out, kMatrixFormatVersion);
  put_le<std::uint32_t>(out, kMatrixDtypeF32);
  put_le<std::uint64_t>(out, matrix.rows());
  put_le<std::uint64_t>(out, matrix.cols());
  for (double v : matrix.data()) put_le<float>(out, static_cast<float>(v));
  write_file_atomic(path, out);
}

FeatureMatrix read_matrix(const std::filesystem::path& path, double frame_rate) {
  FeatureMatrix features{read_matrix_file(path), frame_rate};
  validate(features);
  return features;
}

void write_matrix(const std::filesystem::path& path, const FeatureMatrix& features) {
  validate(features);
  write_matrix_file(path, features.frames);
}

Codebook read_codebook(const std::filesystem::path& path, double temperature) {
  Codebook codebook{read_matrix_file(path), temperature};
  validate(codebook);
  return codebook;
}

}  // namespace unitrhythm
