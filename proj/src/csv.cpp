#include "growth/csv.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <stdexcept>

namespace growth::csv {

static std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

static std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::vector<std::string> split_record(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c == '\r') {
      // swallow CR from CRLF files
    } else {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

Reader::Reader(std::istream& in) : in_(in) {
  if (!in_.good()) throw std::runtime_error("csv: unreadable input stream");
  std::string line;
  if (!std::getline(in_, line)) throw std::runtime_error("csv: empty input, header row required");
  ++line_number_;
  header_ = split_record(line);
  for (std::size_t i = 0; i < header_.size(); ++i) {
    const std::string key = lower(trim(header_[i]));
    if (!key.empty()) index_.emplace(key, i);
  }
}

std::optional<std::size_t> Reader::column(const std::vector<std::string>& aliases) const {
  for (const auto& name : aliases) {
    auto it = index_.find(lower(trim(name)));
    if (it != index_.end()) return it->second;
  }
  return std::nullopt;
}

bool Reader::next(std::vector<std::string>& fields) {
  std::string line;
  while (std::getline(in_, line)) {
    ++line_number_;
    if (trim(line).empty()) continue;
    fields = split_record(line);
    return true;
  }
  return false;
}

bool is_missing(const std::string& field) {
  const std::string s = lower(trim(field));
  return s.empty() || s == "na" || s == "nan" || s == "." || s == "null";
}

std::optional<double> parse_double(const std::string& field) {
  const std::string s = trim(field);
  if (s.empty()) return std::nullopt;
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || errno == ERANGE) return std::nullopt;
  return v;
}

std::string format_sig(double value, int sig_digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", sig_digits, value);
  return buf;
}

std::string format_full(double value) {
  // Try increasing precision until the text round-trips exactly.
  for (int sig = 15; sig <= 17; ++sig) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*g", sig, value);
    if (std::strtod(buf, nullptr) == value) return buf;
  }
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

}  // namespace growth::csv
