// SPDX-License-Identifier: Apache-2.0
#include "pfsim/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace pfsim {

CsvBuilder::CsvBuilder(const std::vector<std::string>& columns) : num_columns_(columns.size()) {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (i) out_ << ',';
    out_ << columns[i];
  }
  out_ << '\n';
}

CsvBuilder& CsvBuilder::cell(const std::string& value) {
  if (in_row_) out_ << ',';
  out_ << value;
  ++in_row_;
  return *this;
}

CsvBuilder& CsvBuilder::cell(double value) {
  char buffer[40];
  if (std::isinf(value)) {
    std::snprintf(buffer, sizeof buffer, value > 0 ? "inf" : "-inf");
  } else {
    std::snprintf(buffer, sizeof buffer, "%.12g", value);
  }
  return cell(std::string(buffer));
}

CsvBuilder& CsvBuilder::cell(long long value) { return cell(std::to_string(value)); }
CsvBuilder& CsvBuilder::cell(std::uint64_t value) { return cell(std::to_string(value)); }

void CsvBuilder::end_row() {
  if (in_row_ != num_columns_) {
    throw std::logic_error("CsvBuilder: row has " + std::to_string(in_row_) + " cells, expected " +
                           std::to_string(num_columns_));
  }
  out_ << '\n';
  in_row_ = 0;
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp);
    out << content;
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    throw std::runtime_error("cannot rename " + tmp + " to " + path);
  }
}

}  // namespace pfsim
