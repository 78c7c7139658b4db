#include "unitrhythm/clusterer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "unitrhythm/error.hpp"
#include "unitrhythm/fileio.hpp"

namespace unitrhythm {

ClusterAssignment cluster_points(const Matrix& points, std::size_t n_clusters) {
  const std::size_t K = points.rows();
  if (n_clusters < 1) {
    throw Error(ErrorKind::InvalidArgument, "need at least one cluster");
  }
  if (K < n_clusters) {
    throw Error(ErrorKind::TooFewUnits, std::to_string(K) + " units cannot form " +
                                            std::to_string(n_clusters) + " clusters");
  }

  // Pairwise Euclidean distances between active clusters, indexed by slot.
  std::vector<double> dist(K * K, 0.0);
  for (std::size_t i = 0; i < K; ++i) {
    for (std::size_t j = i + 1; j < K; ++j) {
      double sum = 0.0;
      auto a = points.row(i);
      auto b = points.row(j);
      for (std::size_t d = 0; d < points.cols(); ++d) sum += (a[d] - b[d]) * (a[d] - b[d]);
      dist[i * K + j] = dist[j * K + i] = std::sqrt(sum);
    }
  }

  std::vector<std::size_t> id(K);
  std::vector<std::size_t> size(K, 1);
  std::vector<bool> active(K, true);
  std::vector<std::vector<std::size_t>> members(K);
  for (std::size_t i = 0; i < K; ++i) {
    id[i] = i;
    members[i] = {i};
  }

  ClusterAssignment out;
  out.num_clusters = n_clusters;
  for (std::size_t step = 0; step + n_clusters < K; ++step) {
    std::size_t bi = K, bj = K;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < K; ++i) {
      if (!active[i]) continue;
      for (std::size_t j = i + 1; j < K; ++j) {
        if (!active[j]) continue;
        const double d = dist[i * K + j];
        bool take = d < best;
        if (!take && d == best) {
          auto cand = std::minmax(id[i], id[j]);
          auto cur = std::minmax(id[bi], id[bj]);
          take = cand < cur;
        }
        if (take) {
          best = d;
          bi = i;
          bj = j;
        }
      }
    }

    const double ni = static_cast<double>(size[bi]);
    const double nj = static_cast<double>(size[bj]);
    for (std::size_t k = 0; k < K; ++k) {
      if (!active[k] || k == bi || k == bj) continue;
      const double nk = static_cast<double>(size[k]);
      const double dki = dist[k * K + bi];
      const double dkj = dist[k * K + bj];
      const double sq = ((ni + nk) * dki * dki + (nj + nk) * dkj * dkj - nk * best * best) /
                        (ni + nj + nk);
      dist[k * K + bi] = dist[bi * K + k] = std::sqrt(std::max(sq, 0.0));
    }

    const auto [lo, hi] = std::minmax(id[bi], id[bj]);
    out.merge_history.push_back(MergeStep{lo, hi, best, size[bi] + size[bj]});

    size[bi] += size[bj];
    id[bi] = K + step;
    members[bi].insert(members[bi].end(), members[bj].begin(), members[bj].end());
    members[bj].clear();
    active[bj] = false;
  }

  std::vector<std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < K; ++i) {
    if (active[i]) {
      std::sort(members[i].begin(), members[i].end());
      groups.push_back(members[i]);
    }
  }
  std::sort(groups.begin(), groups.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  out.labels.assign(K, -1);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (std::size_t u : groups[g]) out.labels[u] = static_cast<int>(g);
  }
  return out;
}

ClusterAssignment cluster_codebook(const Codebook& codebook, std::size_t n_clusters) {
  if (codebook.size() < n_clusters) {
    throw Error(ErrorKind::TooFewUnits, "codebook has " + std::to_string(codebook.size()) +
                                            " units, fewer than " + std::to_string(n_clusters) +
                                            " clusters");
  }
  validate(codebook);
  return cluster_points(codebook.embeddings, n_clusters);
}

Segmentation merge_segments(const Segmentation& seg, const ClusterAssignment& assignment) {
  Segmentation out;
  out.gamma = seg.gamma;
  for (const Segment& s : seg.segments) {
    if (s.unit >= assignment.labels.size() || assignment.labels[s.unit] < 0) {
      throw Error(ErrorKind::UnassignedUnit,
                  "unit " + std::to_string(s.unit) + " has no cluster assignment");
    }
    const int cluster = assignment.labels[s.unit];
    if (!out.segments.empty() && out.segments.back().cluster == cluster) {
      out.segments.back().end = s.end;
      continue;
    }
    Segment merged = s;
    merged.cluster = cluster;
    out.segments.push_back(merged);
  }
  return out;
}

SoundClass SoundClassMap::operator[](int cluster) const {
  if (cluster < 0 || cluster >= 3) return SoundClass::Unknown;
  return classes[static_cast<std::size_t>(cluster)];
}

int SoundClassMap::cluster_of(SoundClass c) const {
  for (int k = 0; k < 3; ++k) {
    if (classes[static_cast<std::size_t>(k)] == c) return k;
  }
  return -1;
}

std::array<ClusterOverlap, 3> accumulate_overlap(const std::vector<Segmentation>& merged,
                                                 const std::vector<UtteranceFlags>& flags) {
  if (merged.empty()) {
    throw Error(ErrorKind::EmptyCorpus, "no utterances to label clusters from");
  }
  if (merged.size() != flags.size()) {
    throw Error(ErrorKind::FlagLengthMismatch, std::to_string(merged.size()) +
                                                   " segmentations but " +
                                                   std::to_string(flags.size()) + " flag sets");
  }
  std::array<ClusterOverlap, 3> overlap{};
  for (std::size_t u = 0; u < merged.size(); ++u) {
    const Segmentation& seg = merged[u];
    const UtteranceFlags& f = flags[u];
    const std::size_t T = seg.num_frames();
    if (f.silent.size() != T || f.voiced.size() != T) {
      throw Error(ErrorKind::FlagLengthMismatch,
                  "utterance " + std::to_string(u) + " has " + std::to_string(T) +
                      " frames but " + std::to_string(f.silent.size()) + "/" +
                      std::to_string(f.voiced.size()) + " flags");
    }
    for (const Segment& s : seg.segments) {
      if (s.cluster < 0 || s.cluster >= 3) {
        throw Error(ErrorKind::UnassignedUnit, "segment without a cluster in utterance " +
                                                   std::to_string(u));
      }
      ClusterOverlap& o = overlap[static_cast<std::size_t>(s.cluster)];
      for (std::size_t t = s.start; t < s.end; ++t) {
        ++o.frames;
        if (f.silent[t]) ++o.silent_frames;
        if (f.voiced[t]) ++o.voiced_frames;
      }
    }
  }
  return overlap;
}

SoundClassMap label_from_overlap(const std::array<ClusterOverlap, 3>& overlap) {
  for (int k = 0; k < 3; ++k) {
    if (overlap[static_cast<std::size_t>(k)].frames == 0) {
      throw Error(ErrorKind::AmbiguousLabeling,
                  "cluster " + std::to_string(k) + " covers no frames in the corpus");
    }
  }
  // Fractions compared by cross-multiplication so equal ratios tie exactly.
  auto cmp = [](std::size_t a_num, std::size_t a_den, std::size_t b_num, std::size_t b_den) {
    const unsigned long long lhs = static_cast<unsigned long long>(a_num) * b_den;
    const unsigned long long rhs = static_cast<unsigned long long>(b_num) * a_den;
    return lhs < rhs ? -1 : (lhs > rhs ? 1 : 0);
  };

  int silence = 0;
  bool tie = false;
  for (int k = 1; k < 3; ++k) {
    const auto& a = overlap[static_cast<std::size_t>(k)];
    const auto& b = overlap[static_cast<std::size_t>(silence)];
    const int c = cmp(a.silent_frames, a.frames, b.silent_frames, b.frames);
    if (c > 0) {
      silence = k;
      tie = false;
    } else if (c == 0) {
      tie = true;
    }
  }
  if (tie) {
    throw Error(ErrorKind::AmbiguousLabeling, "tie in silent-overlap fraction");
  }
  int first = -1, second = -1;
  for (int k = 0; k < 3; ++k) {
    if (k == silence) continue;
    (first < 0 ? first : second) = k;
  }
  const auto& a = overlap[static_cast<std::size_t>(first)];
  const auto& b = overlap[static_cast<std::size_t>(second)];
  const int c = cmp(a.voiced_frames, a.frames, b.voiced_frames, b.frames);
  if (c == 0) {
    throw Error(ErrorKind::AmbiguousLabeling, "tie in voiced-overlap fraction");
  }
  const int sonorant = c > 0 ? first : second;
  const int obstruent = c > 0 ? second : first;

  SoundClassMap map;
  map.overlap = overlap;
  map.classes[static_cast<std::size_t>(silence)] = SoundClass::Silence;
  map.classes[static_cast<std::size_t>(sonorant)] = SoundClass::Sonorant;
  map.classes[static_cast<std::size_t>(obstruent)] = SoundClass::Obstruent;
  return map;
}

SoundClassMap label_clusters(const std::vector<Segmentation>& merged,
                             const std::vector<UtteranceFlags>& flags) {
  return label_from_overlap(accumulate_overlap(merged, flags));
}

Segmentation apply_sound_classes(const Segmentation& seg, const SoundClassMap& map) {
  Segmentation out = seg;
  for (Segment& s : out.segments) {
    if (s.cluster < 0) {
      throw Error(ErrorKind::UnassignedUnit, "segment at frame " + std::to_string(s.start) +
                                                 " has no cluster id");
    }
    s.sound_class = map[s.cluster];
  }
  return out;
}

void write_cluster_assignment(const std::filesystem::path& path, const ClusterAssignment& a) {
  std::ostringstream out;
  out << "# linkage=ward metric=euclidean n_clusters=" << a.num_clusters << '\n';
  out << "# unit_id\tcluster_id\n";
  for (std::size_t u = 0; u < a.labels.size(); ++u) out << u << '\t' << a.labels[u] << '\n';
  write_file_atomic(path, out.str());
}

ClusterAssignment read_cluster_assignment(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  std::istringstream in(text);
  std::string line;
  ClusterAssignment a;
  int max_cluster = -1;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw Error(ErrorKind::BadFormat, where + ": expected 2 fields");
    const long long unit = parse_int(std::string_view(line).substr(0, tab), where);
    const long long cluster = parse_int(std::string_view(line).substr(tab + 1), where);
    if (unit < 0 || cluster < 0) throw Error(ErrorKind::BadFormat, where + ": negative id");
    if (a.labels.size() <= static_cast<std::size_t>(unit)) {
      a.labels.resize(static_cast<std::size_t>(unit) + 1, -1);
    }
    a.labels[static_cast<std::size_t>(unit)] = static_cast<int>(cluster);
    max_cluster = std::max(max_cluster, static_cast<int>(cluster));
  }
  for (std::size_t u = 0; u < a.labels.size(); ++u) {
    if (a.labels[u] < 0) {
      throw Error(ErrorKind::UnassignedUnit, path.string() + ": unit " + std::to_string(u) +
                                                 " missing");
    }
  }
  a.num_clusters = static_cast<std::size_t>(max_cluster + 1);
  return a;
}

void write_dendrogram(const std::filesystem::path& path, const ClusterAssignment& a) {
  std::ostringstream out;
  out << "# step\tleft\tright\tdistance\tsize\n";
  for (std::size_t m = 0; m < a.merge_history.size(); ++m) {
    const MergeStep& s = a.merge_history[m];
    out << m << '\t' << s.left << '\t' << s.right << '\t' << format_double(s.distance) << '\t'
        << s.size << '\n';
  }
  write_file_atomic(path, out.str());
}

}  // namespace unitrhythm
