#pragma once

#include <istream>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace growth::csv {

/// Splits one CSV record. Handles double-quoted fields with "" escapes;
/// does not handle embedded newlines (records are line-based here).
std::vector<std::string> split_record(const std::string& line);

/// Header-indexed reader over a comma-separated stream. Column names are
/// matched case-insensitively with surrounding whitespace stripped.
class Reader {
 public:
  explicit Reader(std::istream& in);

  /// Column index for any of the given aliases, or nullopt.
  std::optional<std::size_t> column(const std::vector<std::string>& aliases) const;

  /// Reads the next record. Returns false at end of stream. Blank lines are
  /// skipped. line_number() reports the 1-based physical line of the record.
  bool next(std::vector<std::string>& fields);

  std::size_t line_number() const { return line_number_; }
  const std::vector<std::string>& header() const { return header_; }

 private:
  std::istream& in_;
  std::vector<std::string> header_;
  std::unordered_map<std::string, std::size_t> index_;
  std::size_t line_number_ = 0;
};

/// True when the field should be treated as a missing value.
bool is_missing(const std::string& field);

/// Strict double parse of a whole trimmed field; nullopt on failure.
std::optional<double> parse_double(const std::string& field);

/// Formats with %.{sig}g, locale-independent.
std::string format_sig(double value, int sig_digits);

/// Shortest representation that round-trips a double (%.17g fallback).
std::string format_full(double value);

}  // namespace growth::csv
