#include "partlasso/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "partlasso/design.hpp"

namespace partlasso::csv {

std::size_t Table::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw std::out_of_range("csv column not found: " + name);
}

double Table::number(std::size_t row, const std::string& name) const {
  return std::stod(rows.at(row).at(column(name)));
}

std::string quote(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string format_number(double value) {
  char buf[64];
  // std::to_chars without precision gives the shortest round-trip form.
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw std::runtime_error("number formatting failed");
  return std::string(buf, ptr);
}

void write_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << quote(fields[i]);
  }
  out << '\n';
}

namespace {

// Reads one record; returns false at end of input.
bool read_record(std::istream& in, std::vector<std::string>& fields) {
  fields.clear();
  if (in.peek() == std::char_traits<char>::eof()) return false;
  std::string field;
  bool quoted = false;
  bool any = false;
  char c;
  while (in.get(c)) {
    any = true;
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          field += '"';
          in.get();
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c == '\n') {
      break;
    } else if (c != '\r') {
      field += c;
    }
  }
  if (quoted) throw std::runtime_error("csv: unterminated quoted field");
  if (!any) return false;
  fields.push_back(std::move(field));
  return true;
}

}  // namespace

Table parse(std::istream& in, bool has_header) {
  Table table;
  while (in.peek() == '#') {
    std::string line;
    std::getline(in, line);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    table.comments.push_back(line.substr(1));
  }
  std::vector<std::string> fields;
  bool first = true;
  while (read_record(in, fields)) {
    if (fields.size() == 1 && fields[0].empty()) continue;
    if (first && has_header) {
      table.header = fields;
    } else {
      table.rows.push_back(fields);
    }
    first = false;
  }
  return table;
}

Table read_file(const std::string& path, bool has_header) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return parse(in, has_header);
}

}  // namespace partlasso::csv

namespace partlasso {

namespace {

bool parse_double(const std::string& s, double& out) {
  std::size_t b = s.find_first_not_of(" \t");
  std::size_t e = s.find_last_not_of(" \t");
  if (b == std::string::npos) return false;
  const char* first = s.data() + b;
  const char* last = s.data() + e + 1;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

}  // namespace

Matrix load_matrix_csv(const std::string& path) {
  csv::Table table = csv::read_file(path, false);
  if (table.rows.empty()) throw std::runtime_error(path + ": no data rows");
  std::size_t start = 0;
  double probe;
  for (const auto& f : table.rows[0]) {
    if (!parse_double(f, probe)) {
      start = 1;
      break;
    }
  }
  const std::size_t rows = table.rows.size() - start;
  if (rows == 0) throw std::runtime_error(path + ": header only");
  const std::size_t cols = table.rows[start].size();
  Matrix out(static_cast<Index>(rows), static_cast<Index>(cols));
  for (std::size_t i = 0; i < rows; ++i) {
    const auto& rec = table.rows[start + i];
    if (rec.size() != cols) {
      throw std::runtime_error(path + ": ragged row " + std::to_string(start + i + 1));
    }
    for (std::size_t j = 0; j < cols; ++j) {
      double v;
      if (!parse_double(rec[j], v)) {
        throw std::runtime_error(path + ": non-numeric value at row " +
                                 std::to_string(start + i + 1) + ", column " +
                                 std::to_string(j + 1));
      }
      out(static_cast<Index>(i), static_cast<Index>(j)) = v;
    }
  }
  return out;
}

}  // namespace partlasso
