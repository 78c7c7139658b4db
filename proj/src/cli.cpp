#include "unitrhythm/cli.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "unitrhythm/clusterer.hpp"
#include "unitrhythm/error.hpp"
#include "unitrhythm/fileio.hpp"
#include "unitrhythm/metrics.hpp"
#include "unitrhythm/rhythm.hpp"
#include "unitrhythm/segmenter.hpp"
#include "unitrhythm/signal.hpp"
#include "unitrhythm/stretcher.hpp"
#include "unitrhythm/synthetic.hpp"
#include "unitrhythm/units.hpp"

namespace unitrhythm {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

void validate(const PipelineConfig& c) {
  auto bad = [](const std::string& what) { throw Error(ErrorKind::InvalidArgument, what); };
  if (!(c.gamma >= 0.0) || !std::isfinite(c.gamma)) bad("gamma must be finite and >= 0");
  if (!(c.tau > 0.0) || !std::isfinite(c.tau)) bad("tau must be positive");
  if (!(c.frame_rate > 0.0) || !std::isfinite(c.frame_rate)) bad("frame rate must be positive");
  if (!(c.vad_threshold_db > 0.0)) bad("VAD threshold must be positive (dB below the reference)");
  if (!(c.voicing_threshold > 0.0 && c.voicing_threshold < 1.0)) {
    bad("voicing threshold must lie in (0, 1)");
  }
  if (c.min_samples < 2) bad("min-samples must be at least 2");
  if (c.jobs < 1) bad("jobs must be at least 1");
}

namespace {

void log(const std::string& msg) { std::cerr << "[unitrhythm] " << msg << '\n'; }

/// Runs fn(i) for i in [0, n) on up to `jobs` threads; rethrows the failure
/// with the lowest index so error reporting does not depend on scheduling.
void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& fn) {
  std::vector<std::exception_ptr> errors(n);
  std::mutex mu;
  std::size_t next = 0;
  auto worker = [&] {
    while (true) {
      std::size_t i;
      {
        std::lock_guard<std::mutex> lock(mu);
        if (next >= n) return;
        i = next++;
      }
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned threads = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(n)));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

/// Files in `dir` with `extension`, sorted by name.
std::vector<fs::path> list_files(const fs::path& dir, const std::string& extension,
                                 const std::string& what) {
  if (!fs::is_directory(dir)) {
    throw Error(ErrorKind::IoError, what + " directory " + dir.string() + " does not exist");
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == extension) {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) {
    throw Error(ErrorKind::InvalidArgument, "found 0 " + what + " files (*" + extension +
                                                ") in " + dir.string());
  }
  return files;
}


template <typename F>
auto with_context(const fs::path& file, F&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    throw Error(e.kind(), file.string() + ": " + e.detail());
  }
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::IoError, "cannot create directory " + dir.string());
}

std::vector<std::string> config_header(const PipelineConfig& c, bool with_gamma = true) {
  std::ostringstream line;
  if (with_gamma) line << "gamma=" << format_double(c.gamma) << ' ';
  line << "tau=" << format_double(c.tau) << " frame_rate=" << format_double(c.frame_rate);
  return {line.str()};
}

json config_json(const PipelineConfig& c) {
  return json{{"gamma", c.gamma},
              {"tau", c.tau},
              {"frame_rate", c.frame_rate},
              {"vad_threshold_db", c.vad_threshold_db},
              {"voicing_threshold", c.voicing_threshold},
              {"clamp", c.clamp},
              {"exclude_silence", c.exclude_silence},
              {"min_samples", c.min_samples},
              {"max_segment_length", c.max_segment_length}};
}

void write_provenance(const fs::path& path, const std::string& command, const PipelineConfig& c,
                      const json& inputs) {
  json j{{"command", command}, {"config", config_json(c)}, {"inputs", inputs}};
  write_file_atomic(path, j.dump(2) + "\n");
}

void apply_config_file(const fs::path& path, PipelineConfig& c) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::BadFormat, path.string() + ": " + e.what());
  }
  if (!j.is_object()) throw Error(ErrorKind::BadFormat, path.string() + ": expected an object");
  try {
    for (auto it = j.begin(); it != j.end(); ++it) {
      const std::string& key = it.key();
      if (key == "gamma") c.gamma = it->get<double>();
      else if (key == "tau") c.tau = it->get<double>();
      else if (key == "frame_rate") c.frame_rate = it->get<double>();
      else if (key == "vad_threshold_db") c.vad_threshold_db = it->get<double>();
      else if (key == "voicing_threshold") c.voicing_threshold = it->get<double>();
      else if (key == "clamp") c.clamp = it->get<bool>();
      else if (key == "exclude_silence") c.exclude_silence = it->get<bool>();
      else if (key == "min_samples") c.min_samples = it->get<std::size_t>();
      else if (key == "max_segment_length") c.max_segment_length = it->get<std::size_t>();
      else if (key == "jobs") c.jobs = it->get<unsigned>();
      else throw Error(ErrorKind::BadFormat, path.string() + ": unknown config key '" + key + "'");
    }
  } catch (const nlohmann::json::type_error& e) {
    throw Error(ErrorKind::BadFormat, path.string() + ": " + e.what());
  }
}

std::vector<Segmentation> read_segmentations(const std::vector<fs::path>& files) {
  std::vector<Segmentation> out;
  out.reserve(files.size());
  for (const auto& f : files) out.push_back(read_segmentation(f));
  return out;
}

bool fully_labeled(const std::vector<Segmentation>& corpus) {
  for (const auto& seg : corpus) {
    for (const auto& s : seg.segments) {
      if (s.sound_class == SoundClass::Unknown) return false;
    }
  }
  return true;
}

bool fully_clustered(const std::vector<Segmentation>& corpus) {
  for (const auto& seg : corpus) {
    for (const auto& s : seg.segments) {
      if (s.cluster < 0) return false;
    }
  }
  return true;
}

/// Ensures every segmentation is merged by cluster (using `clusters` when needed).
std::vector<Segmentation> ensure_merged(std::vector<Segmentation> corpus,
                                        const std::string& clusters_path) {
  if (fully_clustered(corpus)) return corpus;
  if (clusters_path.empty()) {
    throw Error(ErrorKind::UnassignedUnit,
                "segments carry no cluster ids; pass --clusters from cluster-units");
  }
  const ClusterAssignment a = read_cluster_assignment(clusters_path);
  for (auto& seg : corpus) seg = merge_segments(seg, a);
  return corpus;
}

SoundClassMap label_from_wavs(const std::vector<fs::path>& seg_files,
                              const std::vector<Segmentation>& merged, const fs::path& wav_dir,
                              const PipelineConfig& config, const std::string& flags_out) {
  std::vector<UtteranceFlags> flags(merged.size());
  if (!flags_out.empty()) ensure_dir(flags_out);
  parallel_for(merged.size(), config.jobs, [&](std::size_t i) {
    const fs::path wav = wav_dir / (seg_files[i].stem().string() + ".wav");
    with_context(wav, [&] {
      const Waveform w = read_wav(wav);
      FrameConfig fc = FrameConfig::for_rates(w.sample_rate, config.frame_rate);
      fc.vad_threshold_db = config.vad_threshold_db;
      fc.voicing_threshold = config.voicing_threshold;
      flags[i] = compute_frame_flags(w, fc);
      if (flags[i].silent.size() != merged[i].num_frames()) {
        throw Error(ErrorKind::FlagLengthMismatch,
                    std::to_string(flags[i].silent.size()) + " flag frames vs " +
                        std::to_string(merged[i].num_frames()) + " segmented frames");
      }
      if (!flags_out.empty()) {
        write_flags(fs::path(flags_out) / (seg_files[i].stem().string() + ".tsv"), flags[i]);
      }
    });
  });
  return label_clusters(merged, flags);
}

void print_overlap(const SoundClassMap& map) {
  for (int k = 0; k < 3; ++k) {
    const ClusterOverlap& o = map.overlap[static_cast<std::size_t>(k)];
    std::cout << "cluster " << k << '\t' << to_long_name(map[k]) << "\tframes=" << o.frames
              << "\tsilent=" << format_double(o.silent_fraction())
              << "\tvoiced=" << format_double(o.voiced_fraction()) << '\n';
  }
}

// ---- subcommands ---------------------------------------------------------------

struct SegmentArgs {
  std::string features, codebook, out, clusters, classes;
};

void cmd_segment(const SegmentArgs& a, const PipelineConfig& config) {
  const auto files = list_files(a.features, ".urmx", "feature");
  const Codebook codebook = with_context(a.codebook, [&] {
    return read_codebook(a.codebook, config.tau);
  });
  std::optional<ClusterAssignment> clusters;
  if (!a.clusters.empty()) clusters = read_cluster_assignment(a.clusters);
  std::optional<SoundClassMap> classes;
  if (!a.classes.empty()) {
    if (!clusters) throw Error(ErrorKind::InvalidArgument, "--classes requires --clusters");
    classes = load_sound_class_map(a.classes);
  }
  ensure_dir(a.out);
  log("segmenting " + std::to_string(files.size()) + " utterances");

  SegmenterOptions options{config.gamma, config.max_segment_length};
  parallel_for(files.size(), config.jobs, [&](std::size_t i) {
    with_context(files[i], [&] {
      const FeatureMatrix features = read_matrix(files[i], config.frame_rate);
      const LogProbMatrix lp = unit_log_probs(features, codebook);
      Segmentation seg = best_segmentation(lp, options);
      const double score = segment_score(lp, seg);
      auto header = config_header(config, false);
      header.push_back("score=" + format_double(score) + " segments=" +
                       std::to_string(seg.segments.size()));
      if (clusters) {
        seg = merge_segments(seg, *clusters);
        header.push_back("merged=" + std::to_string(seg.segments.size()));
      }
      if (classes) seg = apply_sound_classes(seg, *classes);
      write_segmentation(fs::path(a.out) / (files[i].stem().string() + ".tsv"), seg, header);
    });
  });
}

struct ClusterArgs {
  std::string codebook, out, dendrogram;
  std::size_t n_clusters = 3;
};

void cmd_cluster_units(const ClusterArgs& a, const PipelineConfig& config) {
  const Codebook codebook = with_context(a.codebook, [&] {
    return read_codebook(a.codebook, config.tau);
  });
  const ClusterAssignment assignment = cluster_codebook(codebook, a.n_clusters);
  write_cluster_assignment(a.out, assignment);
  if (!a.dendrogram.empty()) write_dendrogram(a.dendrogram, assignment);
  std::vector<std::size_t> sizes(a.n_clusters, 0);
  for (int l : assignment.labels) ++sizes[static_cast<std::size_t>(l)];
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    std::cout << "cluster " << k << '\t' << sizes[k] << " units\n";
  }
}

struct LabelArgs {
  std::string segments, wavs, out, clusters, labeled_out, flags_out;
};

void cmd_label_clusters(const LabelArgs& a, const PipelineConfig& config) {
  const auto files = list_files(a.segments, ".tsv", "segmentation");
  const auto merged = ensure_merged(read_segmentations(files), a.clusters);
  const SoundClassMap map = label_from_wavs(files, merged, a.wavs, config, a.flags_out);
  save_sound_class_map(map, a.out);
  print_overlap(map);
  if (!a.labeled_out.empty()) {
    ensure_dir(a.labeled_out);
    for (std::size_t i = 0; i < files.size(); ++i) {
      write_segmentation(fs::path(a.labeled_out) / files[i].filename(),
                         apply_sound_classes(merged[i], map), config_header(config, false));
    }
  }
}

struct FitArgs {
  std::string segments, wavs, classes, clusters, out, flags_out;
};

void cmd_fit(const FitArgs& a, const PipelineConfig& config) {
  const auto files = list_files(a.segments, ".tsv", "segmentation");
  std::vector<Segmentation> corpus = read_segmentations(files);
  std::optional<SoundClassMap> map;
  if (!fully_labeled(corpus)) {
    corpus = ensure_merged(std::move(corpus), a.clusters);
    if (!a.classes.empty()) {
      map = load_sound_class_map(a.classes);
    } else if (!a.wavs.empty()) {
      map = label_from_wavs(files, corpus, a.wavs, config, a.flags_out);
    } else {
      throw Error(ErrorKind::InvalidArgument,
                  "segments are unlabeled; pass --classes or --wavs to label clusters");
    }
    for (auto& seg : corpus) seg = apply_sound_classes(seg, *map);
  }

  FitOptions options;
  options.min_samples = config.min_samples;
  options.rate.exclude_silence = config.exclude_silence;
  RhythmModel model = fit_rhythm_model(corpus, config.frame_rate, options);
  if (map) model.sound_class_map = map->classes;
  model.provenance = Provenance{config.gamma, config.tau, "ward", config.vad_threshold_db,
                                config.voicing_threshold};
  save_model(model, a.out);

  std::cout << "speaking_rate\t" << format_double(model.speaking_rate) << '\n';
  for (SoundClass c : kLabeledClasses) {
    const ClassModel& cm = model.at(c);
    std::cout << to_long_name(c) << "\tshape=" << format_double(cm.params.shape)
              << "\trate=" << format_double(cm.params.rate) << "\tn=" << cm.n_samples << '\n';
  }
}

struct RateArgs {
  std::string segments, classes, reference, out;
};

void cmd_rate(const RateArgs& a, const PipelineConfig& config) {
  const auto files = list_files(a.segments, ".tsv", "segmentation");
  std::vector<Segmentation> corpus = read_segmentations(files);
  if (!a.classes.empty()) {
    const SoundClassMap map = load_sound_class_map(a.classes);
    for (auto& seg : corpus) seg = apply_sound_classes(seg, map);
  }
  if (!fully_labeled(corpus)) {
    throw Error(ErrorKind::InvalidArgument, "segments are unlabeled; pass --classes");
  }
  RateOptions options{config.exclude_silence};

  std::ostringstream report;
  report << "# " << config_header(config).front()
         << " exclude_silence=" << (config.exclude_silence ? 1 : 0) << '\n';
  report << "# utterance\trate\n";
  std::map<std::string, double> rates;
  for (std::size_t i = 0; i < files.size(); ++i) {
    const double r = with_context(files[i], [&] {
      return estimate_speaking_rate({corpus[i]}, config.frame_rate, options);
    });
    rates[files[i].stem().string()] = r;
    report << files[i].stem().string() << '\t' << format_double(r) << '\n';
  }
  const double overall = estimate_speaking_rate(corpus, config.frame_rate, options);
  report << "# corpus_rate=" << format_double(overall) << '\n';
  std::cout << "corpus_rate\t" << format_double(overall) << '\n';

  if (!a.reference.empty()) {
    std::istringstream in(read_file(a.reference));
    std::string line;
    std::vector<double> xs, ys;
    while (std::getline(in, line)) {
      if (line.empty() || line.front() == '#') continue;
      const auto tab = line.find('\t');
      if (tab == std::string::npos) {
        throw Error(ErrorKind::BadFormat, a.reference + ": expected name<TAB>rate");
      }
      auto it = rates.find(line.substr(0, tab));
      if (it == rates.end()) continue;
      xs.push_back(it->second);
      ys.push_back(parse_double(std::string_view(line).substr(tab + 1), a.reference));
    }
    const Correlation c = pearson_r(xs, ys);
    report << "# pearson_r=" << format_double(c.r) << " ci_low=" << format_double(c.ci_low)
           << " ci_high=" << format_double(c.ci_high) << " n=" << xs.size() << '\n';
    std::cout << "pearson_r\t" << format_double(c.r) << "\t95% CI [" << format_double(c.ci_low)
              << ", " << format_double(c.ci_high) << "]\tn=" << xs.size() << '\n';
  }
  if (!a.out.empty()) write_file_atomic(a.out, report.str());
}

struct ConvertArgs {
  std::string features, segments, src, tgt, mode = "fine", out, classes, alignments,
      alignments_out;
};

void cmd_convert(const ConvertArgs& a, const PipelineConfig& config) {
  if (a.mode != "global" && a.mode != "fine") {
    throw Error(ErrorKind::InvalidArgument, "--mode must be global or fine");
  }
  const bool fine = a.mode == "fine";
  const RhythmModel src = load_model(a.src);
  const RhythmModel tgt = load_model(a.tgt);
  if (src.frame_rate != tgt.frame_rate || src.frame_rate != config.frame_rate) {
    throw Error(ErrorKind::InvalidArgument,
                "frame-rate mismatch: source model " + format_double(src.frame_rate) +
                    ", target model " + format_double(tgt.frame_rate) + ", config " +
                    format_double(config.frame_rate));
  }
  if (!fine && (!(src.speaking_rate > 0.0) || !(tgt.speaking_rate > 0.0))) {
    throw Error(ErrorKind::NonPositiveRate, "global conversion needs positive speaking rates");
  }
  const auto files = list_files(a.features, ".urmx", "feature");
  std::optional<SoundClassMap> map;
  if (!a.classes.empty()) map = load_sound_class_map(a.classes);
  if (fine && a.segments.empty()) {
    throw Error(ErrorKind::InvalidArgument, "--mode fine requires --segments");
  }
  ensure_dir(a.out);
  if (!a.alignments_out.empty()) ensure_dir(a.alignments_out);

  PlanOptions plan_options{config.clamp};
  parallel_for(files.size(), config.jobs, [&](std::size_t i) {
    const std::string stem = files[i].stem().string();
    with_context(files[i], [&] {
      const FeatureMatrix features = read_matrix(files[i], config.frame_rate);
      StretchPlan plan;
      if (fine) {
        Segmentation seg = read_segmentation(fs::path(a.segments) / (stem + ".tsv"));
        if (map) seg = apply_sound_classes(seg, *map);
        if (seg.num_frames() != features.num_frames()) {
          throw Error(ErrorKind::PlanCoverageMismatch,
                      "segmentation covers " + std::to_string(seg.num_frames()) + " frames, features have " +
                          std::to_string(features.num_frames()));
        }
        plan = build_fine_plan(seg, src, tgt, config.frame_rate, plan_options);
        auto header = config_header(config);
        header.push_back(std::string("clamp=") + (config.clamp ? "1" : "0"));
        write_plan(fs::path(a.out) / (stem + ".plan.tsv"), plan, header);
      } else {
        plan = build_global_plan(features.num_frames(), src.speaking_rate, tgt.speaking_rate);
      }
      const FeatureMatrix converted = apply_plan(features, plan);
      write_matrix(fs::path(a.out) / (stem + ".urmx"), converted);

      if (!a.alignments.empty() && !a.alignments_out.empty()) {
        Alignment aln = read_alignment(fs::path(a.alignments) / (stem + ".tsv"));
        for (Interval& iv : aln.intervals) {
          iv.start = warp_time(plan, iv.start, config.frame_rate);
          iv.end = warp_time(plan, iv.end, config.frame_rate);
        }
        aln.duration = static_cast<double>(plan.total_frames) / config.frame_rate;
        write_alignment(fs::path(a.alignments_out) / (stem + ".tsv"), aln);
      }
    });
  });
  write_provenance(fs::path(a.out) / "provenance.json", "convert", config,
                   json{{"features", a.features},
                        {"segments", a.segments},
                        {"src_model", a.src},
                        {"tgt_model", a.tgt},
                        {"mode", a.mode}});
}

struct EvalArgs {
  std::string converted, target, out, phone_table;
};

std::string eval_header(const EvalArgs& a) {
  return "# converted=" + a.converted + " target=" + a.target +
         " phone_table=" + (a.phone_table.empty() ? std::string("english") : a.phone_table) + "\n";
}

SoundTypeTable phone_table(const std::string& path) {
  return path.empty() ? SoundTypeTable::english() : SoundTypeTable::from_file(path);
}

void cmd_eval_lengths(const EvalArgs& a) {
  const auto files = list_files(a.converted, ".tsv", "converted alignment");
  const SoundTypeTable table = phone_table(a.phone_table);
  std::ostringstream report;
  report << eval_header(a);
  report << "# utterance\ttle_sec\twle_sec\tple_sec\n";
  double tle = 0.0, wle = 0.0, ple = 0.0;
  std::size_t used = 0, skipped = 0;
  for (const auto& f : files) {
    const fs::path target = fs::path(a.target) / f.filename();
    if (!fs::exists(target)) {
      log("no target alignment for " + f.stem().string() + "; skipped");
      ++skipped;
      continue;
    }
    try {
      const LengthErrors e = length_errors(read_alignment(f), read_alignment(target), table);
      report << f.stem().string() << '\t' << format_double(e.tle) << '\t' << format_double(e.wle)
             << '\t' << format_double(e.ple) << '\n';
      tle += e.tle;
      wle += e.wle;
      ple += e.ple;
      ++used;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::LabelSequenceMismatch) throw;
      log(f.stem().string() + ": " + e.detail() + "; skipped");
      ++skipped;
    }
  }
  if (used == 0) {
    throw Error(ErrorKind::EmptyCorpus, "no comparable utterance pairs (" +
                                            std::to_string(skipped) + " skipped)");
  }
  const double n = static_cast<double>(used);
  report << "# mean_tle=" << format_double(tle / n) << " mean_wle=" << format_double(wle / n)
         << " mean_ple=" << format_double(ple / n) << " pairs=" << used << " skipped=" << skipped
         << '\n';
  write_file_atomic(a.out, report.str());
  std::cout << "TLE\t" << format_double(tle / n) << "\nWLE\t" << format_double(wle / n)
            << "\nPLE\t" << format_double(ple / n) << "\npairs\t" << used << "\nskipped\t"
            << skipped << '\n';
}

void cmd_eval_wasserstein(const EvalArgs& a) {
  const SoundTypeTable table = phone_table(a.phone_table);
  auto pool = [&](const std::string& dir, const std::string& what) {
    std::map<SoundType, std::vector<double>> out;
    for (SoundType t : kSoundTypes) out[t];
    for (const auto& f : list_files(dir, ".tsv", what)) {
      const auto buckets = with_context(f, [&] {
        return durations_by_sound_type(read_alignment(f), table);
      });
      for (const auto& [t, v] : buckets) out[t].insert(out[t].end(), v.begin(), v.end());
    }
    return out;
  };
  const auto conv = pool(a.converted, "converted alignment");
  const auto tgt = pool(a.target, "target alignment");

  std::ostringstream report;
  report << eval_header(a);
  report << "# sound_type\tn_converted\tn_target\tw1_ms\n";
  for (SoundType t : kSoundTypes) {
    const auto& x = conv.at(t);
    const auto& y = tgt.at(t);
    const std::string w1 =
        x.empty() || y.empty() ? "NA" : format_double(1000.0 * wasserstein1(x, y));
    report << to_string(t) << '\t' << x.size() << '\t' << y.size() << '\t' << w1 << '\n';
    std::cout << to_string(t) << '\t' << w1 << '\n';
  }
  write_file_atomic(a.out, report.str());
}

struct SynthArgs {
  std::string out;
  std::size_t utterances = 20;
  std::uint64_t seed = 1;
  std::uint64_t script_seed = 7;
  std::uint64_t codebook_seed = 11;
  std::vector<double> sonorant{4.0, 40.0};
  std::vector<double> obstruent{4.0, 50.0};
  std::vector<double> silence{2.0, 10.0};
  double f0 = 120.0;
  double sample_rate = 16000.0;
};

void cmd_gen_synthetic(const SynthArgs& a, const PipelineConfig& config) {
  SyntheticSpeaker speaker;
  speaker.durations[SoundClass::Sonorant] = {a.sonorant[0], a.sonorant[1]};
  speaker.durations[SoundClass::Obstruent] = {a.obstruent[0], a.obstruent[1]};
  speaker.durations[SoundClass::Silence] = {a.silence[0], a.silence[1]};
  speaker.f0 = a.f0;
  speaker.seed = a.seed;
  SyntheticConfig sc;
  sc.utterances = a.utterances;
  sc.script_seed = a.script_seed;
  sc.frame_rate = config.frame_rate;
  sc.sample_rate = a.sample_rate;

  const SyntheticCodebook cb = make_synthetic_codebook(a.codebook_seed);
  const auto utts = generate_speaker(cb, speaker, sc);
  const fs::path root(a.out);
  for (const char* sub : {"features", "wavs", "alignments", "truth"}) ensure_dir(root / sub);
  write_matrix_file(root / "codebook.urmx", cb.codebook.embeddings);
  for (const auto& u : utts) {
    write_matrix(root / "features" / (u.name + ".urmx"), u.features);
    write_wav(root / "wavs" / (u.name + ".wav"), u.wave);
    write_alignment(root / "alignments" / (u.name + ".tsv"), u.alignment);
    write_segmentation(root / "truth" / (u.name + ".tsv"), u.truth, {"ground truth"});
  }
  json generator{{"utterances", a.utterances},
            {"seed", a.seed},
            {"script_seed", a.script_seed},
            {"codebook_seed", a.codebook_seed},
            {"frame_rate", config.frame_rate},
            {"sample_rate", a.sample_rate},
            {"f0", a.f0},
            {"durations",
             {{"sonorant", {{"shape", a.sonorant[0]}, {"rate", a.sonorant[1]}}},
              {"obstruent", {{"shape", a.obstruent[0]}, {"rate", a.obstruent[1]}}},
              {"silence", {{"shape", a.silence[0]}, {"rate", a.silence[1]}}}}}};
  write_provenance(root / "provenance.json", "gen-synthetic", config, generator);
  log("wrote " + std::to_string(utts.size()) + " synthetic utterances to " + root.string());
}

std::vector<char*> to_argv(std::vector<std::string>& args) {
  std::vector<char*> argv;
  for (auto& s : args) argv.push_back(s.data());
  return argv;
}

}  // namespace

int run_cli(const std::vector<std::string>& input_args) {
  CLI::App app{"Unit-level rhythm modeling and conversion toolkit", "unitrhythm"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  double frame_rate = 0, gamma = 0, tau = 0, vad_db = 0, voicing = 0;
  std::size_t min_samples = 0, max_len = 0;
  unsigned jobs = 1;
  bool clamp = false, exclude_silence = false;
  app.add_option("--config", config_path, "JSON file with pipeline settings");
  auto* o_frame_rate = app.add_option("--frame-rate", frame_rate, "feature frames per second");
  auto* o_gamma = app.add_option("--gamma", gamma, "segment-length regularizer weight");
  auto* o_tau = app.add_option("--tau", tau, "soft-unit softmax temperature");
  auto* o_jobs = app.add_option("--jobs", jobs, "utterances processed concurrently");
  auto* o_vad = app.add_option("--vad-threshold-db", vad_db, "silence threshold below the 95th percentile");
  auto* o_voicing = app.add_option("--voicing-threshold", voicing, "autocorrelation peak for voicing");
  auto* o_min = app.add_option("--min-samples", min_samples, "minimum durations per class fit");
  auto* o_maxlen = app.add_option("--max-segment-length", max_len, "cap on DP segment length (0 = none)");
  auto* o_clamp = app.add_flag("--clamp", clamp, "clamp fine stretch factors to [1/4, 4]");
  auto* o_excl = app.add_flag("--exclude-silence", exclude_silence,
                              "drop silence frames from the speaking-rate denominator");

  SegmentArgs seg_args;
  auto* seg = app.add_subcommand("segment", "DP segmentation of soft-unit features");
  seg->add_option("--features", seg_args.features, "directory of .urmx features")->required();
  seg->add_option("--codebook", seg_args.codebook, "codebook .urmx")->required();
  seg->add_option("--out", seg_args.out, "output directory")->required();
  seg->add_option("--clusters", seg_args.clusters, "cluster assignment TSV; merges segments");
  seg->add_option("--classes", seg_args.classes, "sound-class map JSON; labels segments");

  ClusterArgs cl_args;
  auto* cl = app.add_subcommand("cluster-units", "Ward clustering of the codebook");
  cl->add_option("--codebook", cl_args.codebook, "codebook .urmx")->required();
  cl->add_option("--out", cl_args.out, "cluster assignment TSV")->required();
  cl->add_option("--dendrogram", cl_args.dendrogram, "merge-history TSV");
  cl->add_option("--n-clusters", cl_args.n_clusters, "number of clusters")->check(CLI::PositiveNumber);

  LabelArgs lb_args;
  auto* lb = app.add_subcommand("label-clusters", "label clusters from silence/voicing overlap");
  lb->add_option("--segments", lb_args.segments, "segmentation directory")->required();
  lb->add_option("--wavs", lb_args.wavs, "PCM16 mono wav directory")->required();
  lb->add_option("--out", lb_args.out, "sound-class map JSON")->required();
  lb->add_option("--clusters", lb_args.clusters, "cluster assignment TSV for unmerged segments");
  lb->add_option("--labeled-out", lb_args.labeled_out, "write labeled segmentations here");
  lb->add_option("--flags-out", lb_args.flags_out, "write per-frame flags here");

  FitArgs fit_args;
  auto* fit = app.add_subcommand("fit", "fit a speaker rhythm model");
  fit->add_option("--segments", fit_args.segments, "segmentation directory")->required();
  fit->add_option("--out", fit_args.out, "rhythm model JSON")->required();
  fit->add_option("--wavs", fit_args.wavs, "wav directory for cluster labeling");
  fit->add_option("--classes", fit_args.classes, "sound-class map JSON");
  fit->add_option("--clusters", fit_args.clusters, "cluster assignment TSV for unmerged segments");
  fit->add_option("--flags-out", fit_args.flags_out, "write per-frame flags here");

  RateArgs rate_args;
  auto* rate = app.add_subcommand("rate", "speaking rate per utterance and corpus");
  rate->add_option("--segments", rate_args.segments, "labeled segmentation directory")->required();
  rate->add_option("--classes", rate_args.classes, "sound-class map JSON");
  rate->add_option("--reference", rate_args.reference, "TSV of utterance, reference rate");
  rate->add_option("--out", rate_args.out, "rate report TSV");

  ConvertArgs cv_args;
  auto* cv = app.add_subcommand("convert", "time-stretch features to a target rhythm");
  cv->add_option("--features", cv_args.features, "source feature directory")->required();
  cv->add_option("--segments", cv_args.segments, "labeled segmentation directory");
  cv->add_option("--src", cv_args.src, "source rhythm model")->required();
  cv->add_option("--tgt", cv_args.tgt, "target rhythm model")->required();
  cv->add_option("--mode", cv_args.mode, "global or fine")->check(CLI::IsMember({"global", "fine"}));
  cv->add_option("--out", cv_args.out, "output directory")->required();
  cv->add_option("--classes", cv_args.classes, "sound-class map JSON");
  cv->add_option("--alignments", cv_args.alignments, "source alignments to warp");
  cv->add_option("--alignments-out", cv_args.alignments_out, "warped alignment directory");

  EvalArgs el_args;
  auto* el = app.add_subcommand("eval-lengths", "TLE/WLE/PLE over parallel alignments");
  el->add_option("--converted", el_args.converted, "converted alignment directory")->required();
  el->add_option("--target", el_args.target, "target alignment directory")->required();
  el->add_option("--out", el_args.out, "report TSV")->required();
  el->add_option("--phone-table", el_args.phone_table, "label<TAB>sound type TSV");

  EvalArgs ew_args;
  auto* ew = app.add_subcommand("eval-wasserstein", "per-sound-type duration W1 (ms)");
  ew->add_option("--converted", ew_args.converted, "converted alignment directory")->required();
  ew->add_option("--target", ew_args.target, "target alignment directory")->required();
  ew->add_option("--out", ew_args.out, "report TSV")->required();
  ew->add_option("--phone-table", ew_args.phone_table, "label<TAB>sound type TSV");

  SynthArgs syn_args;
  auto* syn = app.add_subcommand("gen-synthetic", "generate a synthetic speaker corpus");
  syn->add_option("--out", syn_args.out, "output directory")->required();
  syn->add_option("--utterances", syn_args.utterances, "number of utterances");
  syn->add_option("--seed", syn_args.seed, "speaker seed (durations, units, noise)");
  syn->add_option("--script-seed", syn_args.script_seed, "shared script seed");
  syn->add_option("--codebook-seed", syn_args.codebook_seed, "shared codebook seed");
  syn->add_option("--sonorant", syn_args.sonorant, "shape rate")->expected(2);
  syn->add_option("--obstruent", syn_args.obstruent, "shape rate")->expected(2);
  syn->add_option("--silence", syn_args.silence, "shape rate")->expected(2);
  syn->add_option("--f0", syn_args.f0, "sonorant pitch in Hz");
  syn->add_option("--sample-rate", syn_args.sample_rate, "waveform sample rate");

  std::vector<std::string> args;
  args.push_back("unitrhythm");
  args.insert(args.end(), input_args.begin(), input_args.end());
  auto argv = to_argv(args);
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    PipelineConfig config;
    if (!config_path.empty()) apply_config_file(config_path, config);
    if (o_frame_rate->count()) config.frame_rate = frame_rate;
    if (o_gamma->count()) config.gamma = gamma;
    if (o_tau->count()) config.tau = tau;
    if (o_jobs->count()) config.jobs = jobs;
    if (o_vad->count()) config.vad_threshold_db = vad_db;
    if (o_voicing->count()) config.voicing_threshold = voicing;
    if (o_min->count()) config.min_samples = min_samples;
    if (o_maxlen->count()) config.max_segment_length = max_len;
    if (o_clamp->count()) config.clamp = clamp;
    if (o_excl->count()) config.exclude_silence = exclude_silence;
    validate(config);

    if (*seg) cmd_segment(seg_args, config);
    else if (*cl) cmd_cluster_units(cl_args, config);
    else if (*lb) cmd_label_clusters(lb_args, config);
    else if (*fit) cmd_fit(fit_args, config);
    else if (*rate) cmd_rate(rate_args, config);
    else if (*cv) cmd_convert(cv_args, config);
    else if (*el) cmd_eval_lengths(el_args);
    else if (*ew) cmd_eval_wasserstein(ew_args);
    else if (*syn) cmd_gen_synthetic(syn_args, config);
    return 0;
  } catch (const Error& e) {
    log(std::string("error: ") + e.what());
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    log(std::string("internal error: ") + e.what());
    return 4;
  }
}

}  // namespace unitrhythm
