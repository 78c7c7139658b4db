#include "unitrhythm/rhythm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <json.hpp>

#include "unitrhythm/error.hpp"
#include "unitrhythm/fileio.hpp"
#include "unitrhythm/special.hpp"

namespace unitrhythm {

using json = nlohmann::ordered_json;

void validate(const GammaParams& p) {
  if (!(p.shape > 0.0) || !(p.rate > 0.0) || !std::isfinite(p.shape) || !std::isfinite(p.rate)) {
    throw Error(ErrorKind::InvalidArgument, "gamma shape and rate must be finite and positive");
  }
  const double mean = p.mean();
  if (mean < 1e-3 || mean > 60.0) {
    throw Error(ErrorKind::InvalidArgument,
                "gamma mean " + format_double(mean) + " s is outside [1 ms, 60 s]");
  }
}

double gamma_pdf(const GammaParams& p, double x) {
  if (x <= 0.0) return 0.0;
  return std::exp(p.shape * std::log(p.rate) + (p.shape - 1.0) * std::log(x) - p.rate * x -
                  std::lgamma(p.shape));
}

double gamma_cdf(const GammaParams& p, double x) {
  validate(p);
  if (std::isnan(x) || x < 0.0) {
    throw Error(ErrorKind::InvalidArgument, "gamma_cdf needs x >= 0");
  }
  return special::gamma_p(p.shape, p.rate * x);
}

double gamma_sf(const GammaParams& p, double x) {
  validate(p);
  if (std::isnan(x) || x < 0.0) {
    throw Error(ErrorKind::InvalidArgument, "gamma_sf needs x >= 0");
  }
  return special::gamma_q(p.shape, p.rate * x);
}

namespace {

// Root of cdf(x) = u (lower tail) or sf(x) = q (upper tail): doubling bracket,
// then Newton steps that fall back to bisection whenever they leave the bracket.
double invert_tail(const GammaParams& p, double level, bool upper) {
  // g(x) increases in x for both tails
  auto g = [&](double x) {
    return upper ? level - special::gamma_q(p.shape, p.rate * x)
                 : special::gamma_p(p.shape, p.rate * x) - level;
  };
  double lo = 0.0;
  double hi = p.mean();
  while (g(hi) < 0.0) {
    lo = hi;
    hi *= 2.0;
    if (!std::isfinite(hi)) throw Error(ErrorKind::NoConvergence, "quantile bracket overflow");
  }

  double x = 0.5 * (lo + hi);
  for (int iter = 0; iter < 500; ++iter) {
    const double f = g(x);
    if (f == 0.0) return x;
    if (f < 0.0) {
      lo = x;
    } else {
      hi = x;
    }
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) break;
    const double density = gamma_pdf(p, x);
    double next = density > 0.0 ? x - f / density : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::fabs(next - x) <= 1e-15 * x) {
      x = next;
      break;
    }
    x = next;
  }
  return x;
}

}  // namespace

double gamma_quantile(const GammaParams& p, double u) {
  validate(p);
  if (std::isnan(u) || u < 0.0 || u > 1.0) {
    throw Error(ErrorKind::InvalidArgument, "quantile level must lie in [0, 1)");
  }
  if (u == 1.0) throw Error(ErrorKind::UAtOne, "u = 1 has no finite quantile");
  if (u == 0.0) return 0.0;
  return invert_tail(p, u, false);
}

double gamma_isf(const GammaParams& p, double q) {
  validate(p);
  if (std::isnan(q) || q < 0.0 || q > 1.0) {
    throw Error(ErrorKind::InvalidArgument, "survival level must lie in (0, 1]");
  }
  if (q == 0.0) throw Error(ErrorKind::UAtOne, "survival level 0 has no finite quantile");
  if (q == 1.0) return 0.0;
  return invert_tail(p, q, true);
}

double gamma_log_likelihood(const GammaParams& p, std::span<const double> xs) {
  double sum = 0.0;
  for (double x : xs) {
    sum += p.shape * std::log(p.rate) + (p.shape - 1.0) * std::log(x) - p.rate * x -
           std::lgamma(p.shape);
  }
  return sum;
}

std::pair<double, double> gamma_log_likelihood_gradient(const GammaParams& p,
                                                        std::span<const double> xs) {
  const double n = static_cast<double>(xs.size());
  double sum_log = 0.0, sum = 0.0;
  for (double x : xs) {
    sum_log += std::log(x);
    sum += x;
  }
  return {n * std::log(p.rate) - n * special::digamma(p.shape) + sum_log,
          n * p.shape / p.rate - sum};
}

GammaParams fit_gamma(std::span<const double> durations, std::size_t min_samples) {
  if (durations.size() < std::max<std::size_t>(min_samples, 2)) {
    throw Error(ErrorKind::TooFewSamples, std::to_string(durations.size()) +
                                              " durations, need at least " +
                                              std::to_string(std::max<std::size_t>(min_samples, 2)));
  }
  for (double d : durations) {
    if (!(d > 0.0) || !std::isfinite(d)) {
      throw Error(ErrorKind::NonPositiveDuration, "duration " + format_double(d) + " is not positive");
    }
  }
  if (std::all_of(durations.begin(), durations.end(),
                  [&](double d) { return d == durations.front(); })) {
    throw Error(ErrorKind::DegenerateData, "all durations are equal");
  }

  const double n = static_cast<double>(durations.size());
  const double mean = std::accumulate(durations.begin(), durations.end(), 0.0) / n;
  double mean_log = 0.0;
  for (double d : durations) mean_log += std::log(d);
  mean_log /= n;
  const double s = std::log(mean) - mean_log;
  if (!(s > 0.0)) {
    throw Error(ErrorKind::DegenerateData, "log-moment gap is not positive");
  }

  double shape = (3.0 - s + std::sqrt((s - 3.0) * (s - 3.0) + 24.0 * s)) / (12.0 * s);
  for (int iter = 0; iter < 100; ++iter) {
    const double f = std::log(shape) - special::digamma(shape) - s;
    const double df = 1.0 / shape - special::trigamma(shape);
    double next = shape - f / df;
    if (!(next > 0.0)) next = 0.5 * shape;
    const double step = std::fabs(next - shape);
    shape = next;
    if (step < 1e-10 * shape) {
      return GammaParams{shape, shape / mean};
    }
  }
  throw Error(ErrorKind::NoConvergence, "gamma shape Newton iteration did not converge");
}

double estimate_speaking_rate(const std::vector<Segmentation>& corpus, double frame_rate,
                              const RateOptions& options) {
  if (!(frame_rate > 0.0)) throw Error(ErrorKind::InvalidArgument, "frame rate must be positive");
  std::size_t sonorants = 0;
  std::size_t frames = 0;
  for (const Segmentation& seg : corpus) {
    for (const Segment& s : seg.segments) {
      if (s.sound_class == SoundClass::Sonorant) ++sonorants;
      if (!(options.exclude_silence && s.sound_class == SoundClass::Silence)) frames += s.length();
    }
  }
  if (frames == 0) {
    throw Error(ErrorKind::EmptyCorpus, "corpus has no frames to measure a speaking rate over");
  }
  return static_cast<double>(sonorants) / (static_cast<double>(frames) / frame_rate);
}

const ClassModel& RhythmModel::at(SoundClass c) const {
  auto it = classes.find(c);
  if (it == classes.end()) {
    throw Error(ErrorKind::MissingClassModel,
                "rhythm model has no " + std::string(to_long_name(c)) + " entry");
  }
  return it->second;
}

std::map<SoundClass, std::vector<double>> class_durations(const std::vector<Segmentation>& corpus,
                                                          double frame_rate) {
  std::map<SoundClass, std::vector<double>> out;
  for (SoundClass c : kLabeledClasses) out[c];
  for (const Segmentation& seg : corpus) {
    for (const Segment& s : seg.segments) {
      if (s.sound_class == SoundClass::Unknown) continue;
      out[s.sound_class].push_back(static_cast<double>(s.length()) / frame_rate);
    }
  }
  return out;
}

RhythmModel fit_rhythm_model(const std::vector<Segmentation>& corpus, double frame_rate,
                             const FitOptions& options) {
  if (corpus.empty()) throw Error(ErrorKind::EmptyCorpus, "no utterances to fit");
  for (const Segmentation& seg : corpus) {
    for (const Segment& s : seg.segments) {
      if (s.sound_class == SoundClass::Unknown) {
        throw Error(ErrorKind::InvalidArgument, "corpus contains unlabeled segments");
      }
    }
  }
  RhythmModel model;
  model.frame_rate = frame_rate;
  model.speaking_rate = estimate_speaking_rate(corpus, frame_rate, options.rate);
  for (auto& [c, durations] : class_durations(corpus, frame_rate)) {
    try {
      model.classes[c] = ClassModel{fit_gamma(durations, options.min_samples), durations.size()};
    } catch (const Error& e) {
      throw Error(e.kind(), std::string(to_long_name(c)) + " class (" +
                                std::to_string(durations.size()) + " segments from " +
                                std::to_string(corpus.size()) + " utterances): " + e.detail());
    }
  }
  return model;
}

namespace {

[[noreturn]] void schema_error(const std::string& context, const std::string& what) {
  throw Error(ErrorKind::SchemaMismatch, context + ": " + what);
}

double number_field(const json& obj, const char* key, const std::string& context) {
  if (!obj.is_object() || !obj.contains(key) || !obj.at(key).is_number()) {
    schema_error(context, std::string("missing numeric field '") + key + "'");
  }
  return obj.at(key).get<double>();
}

json class_map_json(const std::array<SoundClass, 3>& classes) {
  json out = json::object();
  for (std::size_t k = 0; k < classes.size(); ++k) {
    out[std::to_string(k)] = std::string(to_long_name(classes[k]));
  }
  return out;
}

std::array<SoundClass, 3> class_map_from_json(const json& j, const std::string& context) {
  if (!j.is_object()) schema_error(context, "sound_class_map must be an object");
  std::array<SoundClass, 3> classes{SoundClass::Unknown, SoundClass::Unknown, SoundClass::Unknown};
  for (std::size_t k = 0; k < 3; ++k) {
    const std::string key = std::to_string(k);
    if (!j.contains(key) || !j.at(key).is_string()) {
      schema_error(context, "sound_class_map lacks cluster " + key);
    }
    try {
      classes[k] = sound_class_from_string(j.at(key).get<std::string>());
    } catch (const Error&) {
      schema_error(context, "sound_class_map has an unknown class for cluster " + key);
    }
  }
  for (SoundClass c : kLabeledClasses) {
    if (std::count(classes.begin(), classes.end(), c) != 1) {
      schema_error(context, "sound_class_map is not a bijection onto the three classes");
    }
  }
  return classes;
}

}  // namespace

std::string model_to_json(const RhythmModel& model) {
  json j;
  j["format_version"] = kModelFormatVersion;
  j["frame_rate"] = model.frame_rate;
  j["speaking_rate"] = model.speaking_rate;
  json classes = json::object();
  for (SoundClass c : kLabeledClasses) {
    auto it = model.classes.find(c);
    if (it == model.classes.end()) continue;
    classes[std::string(to_long_name(c))] = {{"shape", it->second.params.shape},
                                             {"rate", it->second.params.rate},
                                             {"n_samples", it->second.n_samples}};
  }
  j["classes"] = classes;
  j["sound_class_map"] = model.sound_class_map ? class_map_json(*model.sound_class_map) : json();
  j["provenance"] = {{"gamma", model.provenance.gamma},
                     {"tau", model.provenance.tau},
                     {"linkage", model.provenance.linkage},
                     {"vad_threshold_db", model.provenance.vad_threshold_db},
                     {"voicing_threshold", model.provenance.voicing_threshold}};
  return j.dump(2) + "\n";
}

RhythmModel model_from_json(const std::string& text, const std::string& context) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    schema_error(context, std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) schema_error(context, "top level must be an object");
  if (!j.contains("format_version") || !j.at("format_version").is_number_integer() ||
      j.at("format_version").get<int>() != kModelFormatVersion) {
    schema_error(context, "format_version must be " + std::to_string(kModelFormatVersion));
  }
  RhythmModel model;
  model.frame_rate = number_field(j, "frame_rate", context);
  model.speaking_rate = number_field(j, "speaking_rate", context);
  if (!(model.frame_rate > 0.0)) schema_error(context, "frame_rate must be positive");
  if (!(model.speaking_rate >= 0.0)) schema_error(context, "speaking_rate must be non-negative");

  if (!j.contains("classes") || !j.at("classes").is_object()) {
    schema_error(context, "missing 'classes' object");
  }
  const json& classes = j.at("classes");
  for (SoundClass c : kLabeledClasses) {
    const std::string name(to_long_name(c));
    if (!classes.contains(name)) schema_error(context, "missing class entry '" + name + "'");
    const json& entry = classes.at(name);
    ClassModel cm;
    cm.params.shape = number_field(entry, "shape", context + " " + name);
    cm.params.rate = number_field(entry, "rate", context + " " + name);
    if (entry.contains("n_samples")) {
      if (!entry.at("n_samples").is_number_unsigned()) {
        schema_error(context, name + ".n_samples must be a non-negative integer");
      }
      cm.n_samples = entry.at("n_samples").get<std::size_t>();
    }
    try {
      validate(cm.params);
    } catch (const Error& e) {
      schema_error(context, name + ": " + e.detail());
    }
    model.classes[c] = cm;
  }

  if (j.contains("sound_class_map") && !j.at("sound_class_map").is_null()) {
    model.sound_class_map = class_map_from_json(j.at("sound_class_map"), context);
  }
  if (j.contains("provenance") && !j.at("provenance").is_null()) {
    const json& p = j.at("provenance");
    if (!p.is_object()) schema_error(context, "provenance must be an object");
    model.provenance.gamma = number_field(p, "gamma", context + " provenance");
    model.provenance.tau = number_field(p, "tau", context + " provenance");
    model.provenance.vad_threshold_db = number_field(p, "vad_threshold_db", context + " provenance");
    model.provenance.voicing_threshold =
        number_field(p, "voicing_threshold", context + " provenance");
    if (!p.contains("linkage") || !p.at("linkage").is_string()) {
      schema_error(context, "provenance.linkage must be a string");
    }
    model.provenance.linkage = p.at("linkage").get<std::string>();
  }
  return model;
}

void save_model(const RhythmModel& model, const std::filesystem::path& path) {
  write_file_atomic(path, model_to_json(model));
}

RhythmModel load_model(const std::filesystem::path& path) {
  return model_from_json(read_file(path), path.string());
}

void save_sound_class_map(const SoundClassMap& map, const std::filesystem::path& path) {
  json j;
  j["sound_class_map"] = class_map_json(map.classes);
  json report = json::object();
  for (std::size_t k = 0; k < 3; ++k) {
    const ClusterOverlap& o = map.overlap[k];
    report[std::to_string(k)] = {{"frames", o.frames},
                                 {"silent_frames", o.silent_frames},
                                 {"voiced_frames", o.voiced_frames},
                                 {"silent_fraction", o.silent_fraction()},
                                 {"voiced_fraction", o.voiced_fraction()}};
  }
  j["overlap_report"] = report;
  write_file_atomic(path, j.dump(2) + "\n");
}

SoundClassMap load_sound_class_map(const std::filesystem::path& path) {
  const std::string context = path.string();
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    schema_error(context, std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("sound_class_map")) {
    schema_error(context, "missing 'sound_class_map'");
  }
  SoundClassMap map;
  map.classes = class_map_from_json(j.at("sound_class_map"), context);
  if (j.contains("overlap_report") && j.at("overlap_report").is_object()) {
    for (std::size_t k = 0; k < 3; ++k) {
      const std::string key = std::to_string(k);
      if (!j.at("overlap_report").contains(key)) continue;
      const json& o = j.at("overlap_report").at(key);
      map.overlap[k].frames = o.value("frames", std::size_t{0});
      map.overlap[k].silent_frames = o.value("silent_frames", std::size_t{0});
      map.overlap[k].voiced_frames = o.value("voiced_frames", std::size_t{0});
    }
  }
  return map;
}

}  // namespace unitrhythm
