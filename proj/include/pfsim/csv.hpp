// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

namespace pfsim {

/// Row-oriented CSV assembly with a fixed column set.
class CsvBuilder {
 public:
  explicit CsvBuilder(const std::vector<std::string>& columns);

  CsvBuilder& cell(const std::string& value);
  CsvBuilder& cell(double value);
  CsvBuilder& cell(long long value);
  CsvBuilder& cell(int value) { return cell(static_cast<long long>(value)); }
  CsvBuilder& cell(long value) { return cell(static_cast<long long>(value)); }
  CsvBuilder& cell(std::uint64_t value);
  void end_row();

  std::string str() const { return out_.str(); }

 private:
  std::ostringstream out_;
  std::size_t num_columns_;
  std::size_t in_row_ = 0;
};

/// Writes content to a temporary file in the target directory and renames it
/// into place.
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace pfsim
