#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace partlasso::csv {

struct Table {
  std::vector<std::string> comments;  // lines starting with '#', without the marker
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column position by header name; throws std::out_of_range if absent.
  std::size_t column(const std::string& name) const;
  double number(std::size_t row, const std::string& name) const;
};

/// Quote a field per RFC 4180 when it contains a comma, quote or line break.
std::string quote(const std::string& field);

/// Shortest decimal that round-trips the double exactly (17 significant digits max).
std::string format_number(double value);

void write_row(std::ostream& out, const std::vector<std::string>& fields);

/// Parse RFC-4180-style text. Leading `#` lines are collected as comments.
/// When `has_header` is false every record lands in `rows`.
Table parse(std::istream& in, bool has_header = true);
Table read_file(const std::string& path, bool has_header = true);

}  // namespace partlasso::csv
