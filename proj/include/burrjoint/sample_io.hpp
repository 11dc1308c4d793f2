#pragma once

#include <cctype>
#include <charconv>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "burrjoint/data.hpp"
#include "burrjoint/error.hpp"

namespace burrjoint::io {

/// Shortest decimal text that parses back to exactly the same double.
inline std::string format_double(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  if (ec != std::errc()) return "nan";
  return std::string(buf, ptr);
}

inline std::optional<double> parse_double(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) text.remove_suffix(1);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) return std::nullopt;
  return value;
}

inline std::vector<std::string_view> split_fields(std::string_view line, char sep = ',') {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::string trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

/// Writes `w,s` rows. Optional comment lines (without the leading '#') go first.
inline void write_sample_csv(std::ostream& out, const JointSample& sample,
                             const std::vector<std::string>& comments = {}) {
  for (const auto& c : comments) out << "# " << c << '\n';
  out << "w,s\n";
  for (int i = 0; i < sample.r(); ++i) out << format_double(sample.w()[i]) << ',' << sample.s()[i] << '\n';
}

struct RawSample {
  std::vector<double> w;
  std::vector<int> s;
};

/// Parses `w,s` rows; '#' lines and blank lines are skipped. Errors carry the
/// 1-based line number.
inline RawSample read_sample_rows(std::istream& in, const std::string& source = "<input>") {
  RawSample raw;
  std::string line;
  int line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto fields = split_fields(t);
    const std::string where = source + ":" + std::to_string(line_no);
    if (!header_seen) {
      header_seen = true;
      if (fields.size() == 2 && trim(fields[0]) == "w" && trim(fields[1]) == "s") continue;
      fail(ErrorKind::InvalidSample, where + ": expected header 'w,s'");
    }
    require(fields.size() == 2, ErrorKind::InvalidSample, where + ": expected two fields");
    const auto w = parse_double(fields[0]);
    require(w.has_value(), ErrorKind::InvalidSample, where + ": column w: cannot parse failure time");
    const std::string label = trim(fields[1]);
    require(label == "0" || label == "1", ErrorKind::InvalidSample,
            where + ": column s: " + (label.empty() ? std::string("empty label") : "label '" + label + "' is not 0 or 1"));
    require(std::isfinite(*w) && *w > 0.0, ErrorKind::InvalidSample, where + ": column w: failure time must be positive");
    require(raw.w.empty() || *w >= raw.w.back(), ErrorKind::InvalidSample,
            where + ": column w: failure times must be non-decreasing");
    raw.w.push_back(*w);
    raw.s.push_back(label == "1" ? 1 : 0);
  }
  require(header_seen, ErrorKind::InvalidSample, source + ": empty sample file");
  require(!raw.w.empty(), ErrorKind::InvalidSample, source + ": no data rows");
  return raw;
}

inline JointSample read_sample_csv(std::istream& in, int m, int n, const std::string& source = "<input>") {
  auto raw = read_sample_rows(in, source);
  return JointSample(std::move(raw.w), std::move(raw.s), m, n);
}

inline JointSample read_sample_csv(const std::string& path, int m, int n) {
  std::ifstream in(path);
  require(in.good(), ErrorKind::Io, "cannot open " + path);
  return read_sample_csv(in, m, n, path);
}

/// Reads a whitespace/comma separated list of positive values (one group of a
/// complete sample); '#' lines skipped, an optional non-numeric header allowed.
inline std::vector<double> read_values(std::istream& in, const std::string& source = "<input>") {
  std::vector<double> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    std::string normalized = t;
    for (char& c : normalized)
      if (c == ',' || c == '\t' || c == ';') c = ' ';
    std::istringstream fields(normalized);
    std::string tok;
    bool any = false;
    while (fields >> tok) {
      const auto v = parse_double(tok);
      if (!v) {
        require(out.empty() && !any, ErrorKind::InvalidSample,
                source + ":" + std::to_string(line_no) + ": cannot parse '" + tok + "'");
        break;
      }
      require(std::isfinite(*v) && *v > 0.0, ErrorKind::InvalidSample,
              source + ":" + std::to_string(line_no) + ": values must be positive");
      out.push_back(*v);
      any = true;
    }
  }
  require(!out.empty(), ErrorKind::InvalidSample, source + ": no values");
  return out;
}

inline std::vector<double> read_values(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorKind::Io, "cannot open " + path);
  return read_values(in, path);
}

}  // namespace burrjoint::io
