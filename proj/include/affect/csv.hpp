#pragma once

#include <string>
#include <vector>

#include "affect/tensor.hpp"

namespace affect::data {

// Minimal CSV support for the file formats this project reads and writes:
// comma-separated, one header row, no quoting. Numeric readers parse with
// from_chars and reject ragged rows; the writer emits doubles with 17
// significant digits so read -> write -> read round-trips bit-for-bit.

struct NumericCsv {
  std::vector<std::string> header;
  num::Tensor values;
};

NumericCsv read_numeric_csv(const std::string& path);

struct StringCsv {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

StringCsv read_string_csv(const std::string& path);

std::string format_double(double v);

void write_numeric_csv(const std::string& path,
                       const std::vector<std::string>& header,
                       const num::Tensor& values);

std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace affect::data
