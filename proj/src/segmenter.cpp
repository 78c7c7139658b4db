#include "unitrhythm/segmenter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "unitrhythm/error.hpp"
#include "unitrhythm/fileio.hpp"

namespace unitrhythm {

std::string_view to_string(SoundClass c) noexcept {
  switch (c) {
    case SoundClass::Sonorant: return "SON";
    case SoundClass::Obstruent: return "OBS";
    case SoundClass::Silence: return "SIL";
    case SoundClass::Unknown: return "UNK";
  }
  return "UNK";
}

std::string_view to_long_name(SoundClass c) noexcept {
  switch (c) {
    case SoundClass::Sonorant: return "sonorant";
    case SoundClass::Obstruent: return "obstruent";
    case SoundClass::Silence: return "silence";
    case SoundClass::Unknown: return "unknown";
  }
  return "unknown";
}

SoundClass sound_class_from_string(std::string_view s) {
  for (SoundClass c : {SoundClass::Sonorant, SoundClass::Obstruent, SoundClass::Silence,
                       SoundClass::Unknown}) {
    if (s == to_string(c) || s == to_long_name(c)) return c;
  }
  throw Error(ErrorKind::BadFormat, "unknown sound class '" + std::string(s) + "'");
}

void check_coverage(const Segmentation& seg, std::size_t num_frames) {
  if (seg.segments.empty()) {
    throw Error(ErrorKind::CoverageGap, "segmentation has no segments");
  }
  std::size_t cursor = 0;
  for (std::size_t n = 0; n < seg.segments.size(); ++n) {
    const Segment& s = seg.segments[n];
    if (s.start != cursor || s.end <= s.start) {
      throw Error(ErrorKind::CoverageGap, "segment " + std::to_string(n) + " [" +
                                              std::to_string(s.start) + ", " +
                                              std::to_string(s.end) + ") does not continue at frame " +
                                              std::to_string(cursor));
    }
    cursor = s.end;
  }
  if (cursor != num_frames) {
    throw Error(ErrorKind::CoverageGap, "segments cover " + std::to_string(cursor) + " of " +
                                            std::to_string(num_frames) + " frames");
  }
}

double segment_score(const LogProbMatrix& logprobs, const Segmentation& seg) {
  check_coverage(seg, logprobs.num_frames());
  double score = 0.0;
  for (const Segment& s : seg.segments) {
    if (s.unit >= logprobs.num_units()) {
      throw Error(ErrorKind::UnitOutOfRange, "unit " + std::to_string(s.unit) + " >= K=" +
                                                 std::to_string(logprobs.num_units()));
    }
    for (std::size_t t = s.start; t < s.end; ++t) score += logprobs.values(t, s.unit);
    score += seg.gamma * static_cast<double>(s.length() - 1);
  }
  return score;
}

namespace {

struct Cell {
  double score = -std::numeric_limits<double>::infinity();
  std::size_t count = 0;
  std::size_t prev = 0;
  std::size_t unit = 0;
};

// Interior boundaries of the best prefix ending at `t`, in ascending order.
std::vector<std::size_t> boundaries(const std::vector<Cell>& cells, std::size_t t) {
  std::vector<std::size_t> out;
  while (t > 0) {
    t = cells[t].prev;
    if (t > 0) out.push_back(t);
  }
  std::reverse(out.begin(), out.end());
  return out;
}

}  // namespace

Segmentation best_segmentation(const LogProbMatrix& logprobs, const SegmenterOptions& options) {
  const std::size_t T = logprobs.num_frames();
  const std::size_t K = logprobs.num_units();
  if (T < 1 || K < 1) {
    throw Error(ErrorKind::InvalidArgument, "log-probability matrix is empty");
  }
  if (!(options.gamma >= 0.0) || !std::isfinite(options.gamma)) {
    throw Error(ErrorKind::InvalidArgument, "gamma must be finite and non-negative");
  }

  // cumulative[t * K + k] = sum of logprobs[s][k] for s < t
  std::vector<double> cumulative((T + 1) * K, 0.0);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t k = 0; k < K; ++k) {
      cumulative[(t + 1) * K + k] = cumulative[t * K + k] + logprobs.values(t, k);
    }
  }

  const std::size_t cap = options.max_segment_length == 0 ? T : options.max_segment_length;
  std::vector<Cell> cells(T + 1);
  cells[0].score = 0.0;

  for (std::size_t t = 1; t <= T; ++t) {
    const std::size_t first = t > cap ? t - cap : 0;
    Cell& best = cells[t];
    for (std::size_t s = first; s < t; ++s) {
      std::size_t unit = 0;
      double span = -std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < K; ++k) {
        const double v = cumulative[t * K + k] - cumulative[s * K + k];
        if (v > span) {
          span = v;
          unit = k;
        }
      }
      const double score = cells[s].score + span + options.gamma * static_cast<double>(t - s - 1);
      const std::size_t count = cells[s].count + 1;

      bool take = false;
      if (score > best.score) {
        take = true;
      } else if (score == best.score) {
        if (count < best.count) {
          take = true;
        } else if (count == best.count) {
          auto mine = boundaries(cells, s);
          if (s > 0) mine.push_back(s);
          auto theirs = boundaries(cells, best.prev);
          if (best.prev > 0) theirs.push_back(best.prev);
          take = mine < theirs;
        }
      }
      if (take) best = Cell{score, count, s, unit};
    }
  }

  Segmentation out;
  out.gamma = options.gamma;
  for (std::size_t t = T; t > 0; t = cells[t].prev) {
    out.segments.push_back(Segment{cells[t].prev, t, cells[t].unit});
  }
  std::reverse(out.segments.begin(), out.segments.end());
  return out;
}

std::string format_segmentation_tsv(const Segmentation& seg,
                                    const std::vector<std::string>& header_comments) {
  std::ostringstream out;
  out << "# gamma=" << format_double(seg.gamma) << '\n';
  for (const auto& line : header_comments) out << "# " << line << '\n';
  out << "# start_frame\tend_frame\tunit_id\tcluster_id\tsound_class\n";
  for (const Segment& s : seg.segments) {
    out << s.start << '\t' << s.end << '\t' << s.unit << '\t' << s.cluster << '\t'
        << to_string(s.sound_class) << '\n';
  }
  return out.str();
}

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t pos = 0;
  while (true) {
    const std::size_t next = line.find('\t', pos);
    fields.push_back(line.substr(pos, next == std::string_view::npos ? next : next - pos));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return fields;
}

}  // namespace

std::optional<std::string> header_value(std::string_view text, std::string_view key) {
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    if (line.empty() || line.front() != '#') continue;
    line.remove_prefix(1);
    while (!line.empty() && line.front() == ' ') line.remove_prefix(1);
    // a comment line may hold several space-separated key=value pairs
    std::size_t p = 0;
    while (p < line.size()) {
      std::size_t sp = line.find(' ', p);
      if (sp == std::string_view::npos) sp = line.size();
      std::string_view token = line.substr(p, sp - p);
      if (token.size() > key.size() && token.substr(0, key.size()) == key &&
          token[key.size()] == '=') {
        return std::string(token.substr(key.size() + 1));
      }
      p = sp + 1;
    }
  }
  return std::nullopt;
}

Segmentation parse_segmentation_tsv(std::string_view text, std::string_view context) {
  Segmentation seg;
  if (auto g = header_value(text, "gamma")) seg.gamma = parse_double(*g, context);

  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    const std::string where = std::string(context) + ":" + std::to_string(line_no);
    auto fields = split_tabs(line);
    if (fields.size() != 5) {
      throw Error(ErrorKind::BadFormat, where + ": expected 5 tab-separated fields");
    }
    Segment s;
    const long long start = parse_int(fields[0], where);
    const long long end = parse_int(fields[1], where);
    const long long unit = parse_int(fields[2], where);
    if (start < 0 || end <= start || unit < 0) {
      throw Error(ErrorKind::BadFormat, where + ": invalid segment span or unit");
    }
    s.start = static_cast<std::size_t>(start);
    s.end = static_cast<std::size_t>(end);
    s.unit = static_cast<std::size_t>(unit);
    s.cluster = static_cast<int>(parse_int(fields[3], where));
    s.sound_class = sound_class_from_string(fields[4]);
    seg.segments.push_back(s);
  }
  check_coverage(seg, seg.num_frames());
  return seg;
}

void write_segmentation(const std::filesystem::path& path, const Segmentation& seg,
                        const std::vector<std::string>& header_comments) {
  write_file_atomic(path, format_segmentation_tsv(seg, header_comments));
}

Segmentation read_segmentation(const std::filesystem::path& path) {
  return parse_segmentation_tsv(read_file(path), path.string());
}

}  // namespace unitrhythm
