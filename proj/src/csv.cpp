#include "affect/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace affect::data {

namespace {

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty()) throw std::runtime_error("empty csv file: " + path);
  return lines;
}

double parse_double(const std::string& path, std::size_t row,
                    const char* first, const char* last) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last) {
    throw std::runtime_error(path + ": row " + std::to_string(row) +
                             ": cannot parse number '" +
                             std::string(first, last) + "'");
  }
  return v;
}

}  // namespace

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      cells.push_back(line.substr(start));
      break;
    }
    cells.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return cells;
}

NumericCsv read_numeric_csv(const std::string& path) {
  const auto lines = read_lines(path);
  NumericCsv csv;
  csv.header = split_csv_line(lines[0]);
  const int cols = static_cast<int>(csv.header.size());
  const int rows = static_cast<int>(lines.size()) - 1;
  csv.values = num::Tensor(rows, cols);
  for (int r = 0; r < rows; ++r) {
    const std::string& line = lines[static_cast<std::size_t>(r) + 1];
    const char* p = line.data();
    const char* end = line.data() + line.size();
    int c = 0;
    const char* field = p;
    for (const char* q = p;; ++q) {
      if (q == end || *q == ',') {
        if (c >= cols) {
          throw std::runtime_error(path + ": row " + std::to_string(r + 1) +
                                   ": more fields than header columns");
        }
        csv.values(r, c) = parse_double(path, static_cast<std::size_t>(r) + 1,
                                        field, q);
        ++c;
        if (q == end) break;
        field = q + 1;
      }
    }
    if (c != cols) {
      throw std::runtime_error(path + ": row " + std::to_string(r + 1) +
                               ": expected " + std::to_string(cols) +
                               " fields, got " + std::to_string(c));
    }
  }
  return csv;
}

StringCsv read_string_csv(const std::string& path) {
  const auto lines = read_lines(path);
  StringCsv csv;
  csv.header = split_csv_line(lines[0]);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    auto cells = split_csv_line(lines[i]);
    if (cells.size() != csv.header.size()) {
      throw std::runtime_error(path + ": row " + std::to_string(i) +
                               ": ragged row");
    }
    csv.rows.push_back(std::move(cells));
  }
  return csv;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_numeric_csv(const std::string& path,
                       const std::vector<std::string>& header,
                       const num::Tensor& values) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open file for write: " + path);
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i > 0) out << ',';
    out << header[i];
  }
  out << '\n';
  for (int r = 0; r < values.rows(); ++r) {
    for (int c = 0; c < values.cols(); ++c) {
      if (c > 0) out << ',';
      out << format_double(values(r, c));
    }
    out << '\n';
  }
}

}  // namespace affect::data
