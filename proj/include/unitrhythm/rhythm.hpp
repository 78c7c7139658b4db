#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "unitrhythm/clusterer.hpp"
#include "unitrhythm/segmenter.hpp"

namespace unitrhythm {

/// Gamma distribution over durations in seconds: shape alpha, rate beta.
struct GammaParams {
  double shape = 1.0;
  double rate = 1.0;

  double mean() const noexcept { return shape / rate; }
  friend bool operator==(const GammaParams&, const GammaParams&) = default;
};

void validate(const GammaParams& p);

double gamma_pdf(const GammaParams& p, double x);
double gamma_cdf(const GammaParams& p, double x);
/// Inverse CDF; u = 0 maps to 0 and u = 1 is UAtOne. |cdf(x) - u| < 1e-8.
double gamma_quantile(const GammaParams& p, double u);
/// Upper tail 1 - cdf, computed directly so it keeps relative precision near zero.
double gamma_sf(const GammaParams& p, double x);
/// Inverse of gamma_sf; q = 1 maps to 0 and q = 0 is UAtOne.
double gamma_isf(const GammaParams& p, double q);

double gamma_log_likelihood(const GammaParams& p, std::span<const double> xs);
/// (d/d shape, d/d rate) of the log-likelihood.
std::pair<double, double> gamma_log_likelihood_gradient(const GammaParams& p,
                                                        std::span<const double> xs);

inline constexpr std::size_t kDefaultMinSamples = 10;

/// Maximum-likelihood fit. Newton iteration on ln a - psi(a) = ln(mean) - mean(ln x)
/// from the closed-form initializer; rate = shape / mean.
GammaParams fit_gamma(std::span<const double> durations,
                      std::size_t min_samples = kDefaultMinSamples);

struct RateOptions {
  /// Drop Silence-class frames from the duration denominator.
  bool exclude_silence = false;
};

/// Sonorant segments per second over the whole corpus.
double estimate_speaking_rate(const std::vector<Segmentation>& corpus, double frame_rate,
                              const RateOptions& options = {});

struct Provenance {
  double gamma = 2.0;
  double tau = 0.1;
  std::string linkage = "ward";
  double vad_threshold_db = 40.0;
  double voicing_threshold = 0.45;

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct ClassModel {
  GammaParams params;
  std::size_t n_samples = 0;

  friend bool operator==(const ClassModel&, const ClassModel&) = default;
};

inline constexpr int kModelFormatVersion = 1;

struct RhythmModel {
  double frame_rate = 50.0;
  double speaking_rate = 0.0;
  std::map<SoundClass, ClassModel> classes;
  std::optional<std::array<SoundClass, 3>> sound_class_map;
  Provenance provenance;

  const ClassModel& at(SoundClass c) const;
  friend bool operator==(const RhythmModel&, const RhythmModel&) = default;
};

/// Per-class segment durations (seconds) across a labeled corpus.
std::map<SoundClass, std::vector<double>> class_durations(const std::vector<Segmentation>& corpus,
                                                          double frame_rate);

struct FitOptions {
  std::size_t min_samples = kDefaultMinSamples;
  RateOptions rate;
};

/// Speaking rate plus one gamma per labeled class. Errors name the failing class.
RhythmModel fit_rhythm_model(const std::vector<Segmentation>& corpus, double frame_rate,
                             const FitOptions& options = {});

std::string model_to_json(const RhythmModel& model);
RhythmModel model_from_json(const std::string& text, const std::string& context = "model");
void save_model(const RhythmModel& model, const std::filesystem::path& path);
RhythmModel load_model(const std::filesystem::path& path);

/// Standalone cluster-to-class map with its overlap report.
void save_sound_class_map(const SoundClassMap& map, const std::filesystem::path& path);
SoundClassMap load_sound_class_map(const std::filesystem::path& path);

}  // namespace unitrhythm
