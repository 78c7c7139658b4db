#include "unitrhythm/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <sstream>

#include "unitrhythm/error.hpp"
#include "unitrhythm/fileio.hpp"

namespace unitrhythm {

std::vector<Interval> Alignment::tier(Tier t) const {
  std::vector<Interval> out;
  for (const Interval& i : intervals) {
    if (i.tier == t) out.push_back(i);
  }
  return out;
}

void validate(const Alignment& aln) {
  if (!(aln.duration >= 0.0) || !std::isfinite(aln.duration)) {
    throw Error(ErrorKind::BadFormat, "alignment duration must be finite and non-negative");
  }
  for (Tier t : {Tier::Phone, Tier::Word}) {
    double cursor = 0.0;
    for (const Interval& i : aln.tier(t)) {
      if (!(i.start >= 0.0) || !(i.end >= i.start) || i.end > aln.duration + 1e-9) {
        throw Error(ErrorKind::BadFormat, "interval '" + i.label + "' [" + format_double(i.start) +
                                              ", " + format_double(i.end) +
                                              "] lies outside the utterance");
      }
      if (i.start < cursor - 1e-9) {
        throw Error(ErrorKind::BadFormat,
                    "interval '" + i.label + "' overlaps or precedes its predecessor");
      }
      cursor = i.end;
    }
  }
}

Alignment parse_alignment_tsv(std::string_view text, std::string_view context) {
  Alignment aln;
  bool explicit_duration = false;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    const std::string where = std::string(context) + ":" + std::to_string(line_no);
    if (line.empty()) continue;
    if (line.front() == '#') {
      std::string_view body = line.substr(1);
      while (!body.empty() && body.front() == ' ') body.remove_prefix(1);
      if (body.rfind("duration=", 0) == 0) {
        aln.duration = parse_double(body.substr(9), where);
        explicit_duration = true;
      }
      continue;
    }
    std::vector<std::string_view> fields;
    std::size_t p = 0;
    while (true) {
      const std::size_t tab = line.find('\t', p);
      fields.push_back(line.substr(p, tab == std::string_view::npos ? tab : tab - p));
      if (tab == std::string_view::npos) break;
      p = tab + 1;
    }
    if (fields.size() != 4) throw Error(ErrorKind::BadFormat, where + ": expected 4 fields");
    Interval i;
    if (fields[0] == "phone") {
      i.tier = Tier::Phone;
    } else if (fields[0] == "word") {
      i.tier = Tier::Word;
    } else {
      throw Error(ErrorKind::BadFormat, where + ": unknown tier '" + std::string(fields[0]) + "'");
    }
    i.start = parse_double(fields[1], where);
    i.end = parse_double(fields[2], where);
    i.label = std::string(fields[3]);
    aln.intervals.push_back(std::move(i));
  }
  if (!explicit_duration) {
    for (const Interval& i : aln.intervals) aln.duration = std::max(aln.duration, i.end);
  }
  validate(aln);
  return aln;
}

std::string format_alignment_tsv(const Alignment& aln) {
  std::ostringstream out;
  out << "# duration=" << format_double(aln.duration) << '\n';
  out << "# tier\tstart_sec\tend_sec\tlabel\n";
  for (Tier t : {Tier::Word, Tier::Phone}) {
    for (const Interval& i : aln.tier(t)) {
      out << (t == Tier::Word ? "word" : "phone") << '\t' << format_double(i.start) << '\t'
          << format_double(i.end) << '\t' << i.label << '\n';
    }
  }
  return out.str();
}

Alignment read_alignment(const std::filesystem::path& path) {
  return parse_alignment_tsv(read_file(path), path.string());
}

void write_alignment(const std::filesystem::path& path, const Alignment& aln) {
  write_file_atomic(path, format_alignment_tsv(aln));
}

std::string_view to_string(SoundType t) noexcept {
  switch (t) {
    case SoundType::Vowel: return "vowel";
    case SoundType::Approximant: return "approximant";
    case SoundType::Nasal: return "nasal";
    case SoundType::Fricative: return "fricative";
    case SoundType::Stop: return "stop";
    case SoundType::Silence: return "silence";
  }
  return "silence";
}

SoundType sound_type_from_string(std::string_view s) {
  for (SoundType t : kSoundTypes) {
    if (s == to_string(t)) return t;
  }
  throw Error(ErrorKind::BadFormat, "unknown sound type '" + std::string(s) + "'");
}

std::string SoundTypeTable::normalize(std::string_view label) {
  std::string out(label);
  while (!out.empty() && std::isdigit(static_cast<unsigned char>(out.back()))) out.pop_back();
  for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

SoundTypeTable SoundTypeTable::english() {
  SoundTypeTable t;
  for (const char* v : {"AA", "AE", "AH", "AO", "AW", "AX", "AXR", "AY", "EH", "ER", "EY", "IH",
                        "IX", "IY", "OW", "OY", "UH", "UW", "UX"}) {
    t.set(v, SoundType::Vowel);
  }
  for (const char* v : {"L", "R", "W", "Y", "EL"}) t.set(v, SoundType::Approximant);
  for (const char* v : {"M", "N", "NG", "EM", "EN"}) t.set(v, SoundType::Nasal);
  for (const char* v : {"F", "V", "TH", "DH", "S", "Z", "SH", "ZH", "HH"}) {
    t.set(v, SoundType::Fricative);
  }
  for (const char* v : {"P", "B", "T", "D", "K", "G", "DX", "Q", "CH", "JH"}) {
    t.set(v, SoundType::Stop);
  }
  for (const char* v : {"", "SIL", "SP", "SPN", "<EPS>", "<SIL>", "PAU", "H#"}) {
    t.set(v, SoundType::Silence);
  }
  return t;
}

SoundTypeTable SoundTypeTable::from_file(const std::filesystem::path& path) {
  SoundTypeTable t;
  std::istringstream in(read_file(path));
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw Error(ErrorKind::BadFormat, path.string() + ":" + std::to_string(line_no) +
                                            ": expected label<TAB>type");
    }
    t.set(line.substr(0, tab), sound_type_from_string(line.substr(tab + 1)));
  }
  return t;
}

void SoundTypeTable::set(std::string_view label, SoundType type) { table_[normalize(label)] = type; }

bool SoundTypeTable::contains(std::string_view label) const {
  return table_.count(normalize(label)) > 0;
}

SoundType SoundTypeTable::at(std::string_view label) const {
  auto it = table_.find(normalize(label));
  if (it == table_.end()) {
    throw Error(ErrorKind::UnknownPhoneLabel, "phone label '" + std::string(label) + "'");
  }
  return it->second;
}

bool SoundTypeTable::is_silence(std::string_view label) const {
  auto it = table_.find(normalize(label));
  return it != table_.end() && it->second == SoundType::Silence;
}

Correlation pearson_r(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) {
    throw Error(ErrorKind::LengthMismatch, "pearson_r inputs differ in length");
  }
  if (xs.size() < 3) throw Error(ErrorKind::LengthMismatch, "pearson_r needs at least 3 pairs");
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw Error(ErrorKind::ZeroVariance, "a sample has zero variance");

  Correlation c;
  c.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  if (std::fabs(c.r) == 1.0) {
    c.ci_low = c.ci_high = c.r;
    return c;
  }
  constexpr double z975 = 1.959963984540054;
  const double z = std::atanh(c.r);
  const double se = 1.0 / std::sqrt(n - 3.0);
  c.ci_low = std::tanh(z - z975 * se);
  c.ci_high = std::tanh(z + z975 * se);
  return c;
}

LengthErrors length_errors(const Alignment& converted, const Alignment& target,
                           const SoundTypeTable& table) {
  auto speech = [&](const Alignment& a, Tier t) {
    std::vector<Interval> out;
    for (const Interval& i : a.tier(t)) {
      if (!table.is_silence(i.label)) out.push_back(i);
    }
    return out;
  };
  auto mean_abs = [](const std::vector<Interval>& a, const std::vector<Interval>& b,
                     const char* what) {
    if (a.size() != b.size()) {
      throw Error(ErrorKind::LabelSequenceMismatch,
                  std::string(what) + " counts differ: " + std::to_string(a.size()) + " vs " +
                      std::to_string(b.size()));
    }
    double sum = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
      if (a[k].label != b[k].label) {
        throw Error(ErrorKind::LabelSequenceMismatch, std::string(what) + " " +
                                                          std::to_string(k) + ": '" + a[k].label +
                                                          "' vs '" + b[k].label + "'");
      }
      sum += std::fabs(a[k].duration() - b[k].duration());
    }
    return a.empty() ? 0.0 : sum / static_cast<double>(a.size());
  };

  const auto words_a = speech(converted, Tier::Word);
  const auto words_b = speech(target, Tier::Word);
  const auto phones_a = speech(converted, Tier::Phone);
  const auto phones_b = speech(target, Tier::Phone);

  LengthErrors e;
  e.wle = mean_abs(words_a, words_b, "word");
  e.ple = mean_abs(phones_a, phones_b, "phone");
  e.tle = std::fabs(converted.duration - target.duration);
  e.words = words_a.size();
  e.phones = phones_a.size();
  return e;
}

double wasserstein1(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw Error(ErrorKind::EmptySample, "wasserstein1 needs samples");
  std::vector<double> sa(a.begin(), a.end());
  std::vector<double> sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  const unsigned long long n = sa.size();
  const unsigned long long m = sb.size();

  // Quantile functions are constant on [i/n, (i+1)/n) and [j/m, (j+1)/m); walk the
  // merged breakpoints in units of 1/(n*m).
  double area = 0.0;
  unsigned long long i = 0, j = 0, prev = 0;
  while (i < n && j < m) {
    const unsigned long long next_a = (i + 1) * m;
    const unsigned long long next_b = (j + 1) * n;
    const unsigned long long next = std::min(next_a, next_b);
    area += std::fabs(sa[i] - sb[j]) * static_cast<double>(next - prev);
    prev = next;
    if (next_a == next) ++i;
    if (next_b == next) ++j;
  }
  return area / static_cast<double>(n * m);
}

std::map<SoundType, std::vector<double>> durations_by_sound_type(const Alignment& aln,
                                                                 const SoundTypeTable& table) {
  std::map<SoundType, std::vector<double>> out;
  for (SoundType t : kSoundTypes) out[t];
  for (const Interval& i : aln.tier(Tier::Phone)) out[table.at(i.label)].push_back(i.duration());
  return out;
}

}  // namespace unitrhythm
