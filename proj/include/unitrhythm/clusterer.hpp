#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "unitrhythm/segmenter.hpp"
#include "unitrhythm/units.hpp"

namespace unitrhythm {

/// One agglomeration step. Cluster ids follow the usual dendrogram convention:
/// leaves are 0..K-1 and the cluster created by step m gets id K+m.
struct MergeStep {
  std::size_t left = 0;
  std::size_t right = 0;
  double distance = 0.0;
  std::size_t size = 0;
};

struct ClusterAssignment {
  std::vector<int> labels;  // unit -> cluster id
  std::vector<MergeStep> merge_history;
  std::size_t num_clusters = 0;

  std::size_t num_units() const noexcept { return labels.size(); }
};

/// Ward-linkage agglomerative clustering of the codebook rows (Euclidean
/// distances, Lance-Williams updates), cut at `n_clusters`. Cluster ids are
/// numbered in order of each cluster's smallest unit index.
ClusterAssignment cluster_codebook(const Codebook& codebook, std::size_t n_clusters = 3);
ClusterAssignment cluster_points(const Matrix& points, std::size_t n_clusters = 3);

/// Fuses adjacent segments whose units share a cluster. A fused segment keeps
/// the unit of its first constituent and carries the cluster id.
Segmentation merge_segments(const Segmentation& seg, const ClusterAssignment& assignment);

struct ClusterOverlap {
  std::size_t frames = 0;
  std::size_t silent_frames = 0;
  std::size_t voiced_frames = 0;

  double silent_fraction() const noexcept {
    return frames == 0 ? 0.0 : static_cast<double>(silent_frames) / static_cast<double>(frames);
  }
  double voiced_fraction() const noexcept {
    return frames == 0 ? 0.0 : static_cast<double>(voiced_frames) / static_cast<double>(frames);
  }
};

struct SoundClassMap {
  std::array<SoundClass, 3> classes{SoundClass::Unknown, SoundClass::Unknown, SoundClass::Unknown};
  std::array<ClusterOverlap, 3> overlap{};

  SoundClass operator[](int cluster) const;
  int cluster_of(SoundClass c) const;
};

/// Per-utterance frame flags, aligned one-to-one with that utterance's frames.
struct UtteranceFlags {
  std::vector<bool> silent;
  std::vector<bool> voiced;
};

/// Accumulates frame-wise overlap per cluster across the whole corpus.
std::array<ClusterOverlap, 3> accumulate_overlap(const std::vector<Segmentation>& merged,
                                                 const std::vector<UtteranceFlags>& flags);

/// Silence = highest silent fraction; of the other two, Sonorant = highest
/// voiced fraction; Obstruent = the remaining cluster. Exact ties (or an unused
/// cluster) raise AmbiguousLabeling.
SoundClassMap label_from_overlap(const std::array<ClusterOverlap, 3>& overlap);
SoundClassMap label_clusters(const std::vector<Segmentation>& merged,
                             const std::vector<UtteranceFlags>& flags);

/// Sets each segment's sound class from its cluster id.
Segmentation apply_sound_classes(const Segmentation& seg, const SoundClassMap& map);

// Cluster assignment TSV: unit_id, cluster_id. Dendrogram TSV: step, left, right, distance, size.
void write_cluster_assignment(const std::filesystem::path& path, const ClusterAssignment& a);
ClusterAssignment read_cluster_assignment(const std::filesystem::path& path);
void write_dendrogram(const std::filesystem::path& path, const ClusterAssignment& a);

}  // namespace unitrhythm
