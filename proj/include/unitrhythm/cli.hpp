#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace unitrhythm {

struct PipelineConfig {
  double gamma = 2.0;
  double tau = 0.1;
  double frame_rate = 50.0;
  double vad_threshold_db = 40.0;
  double voicing_threshold = 0.45;
  bool clamp = false;
  bool exclude_silence = false;
  std::size_t min_samples = 10;
  std::size_t max_segment_length = 0;
  unsigned jobs = 1;
};

/// Throws InvalidArgument when a field is outside its valid range.
void validate(const PipelineConfig& config);

/// Entry point of the command-line tool. Returns the process exit code:
/// 0 success, 2 input error, 3 data/degeneracy error, 4 internal error.
int run_cli(const std::vector<std::string>& args);

}  // namespace unitrhythm
