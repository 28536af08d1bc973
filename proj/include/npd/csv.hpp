// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

namespace npd {

// %.17g, so values survive a text round trip exactly.
std::string format_double(double v);

class CsvWriter {
 public:
  // Truncates, or appends without a new header when `append` is set.
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header, bool append = false);
  void row(std::span<const double> values);
  void row(const std::vector<std::string>& cells);

  static void write_stream(std::ostream& out, const std::vector<std::string>& header,
                           const std::vector<std::vector<std::string>>& rows);

 private:
  std::ofstream out_;
  std::size_t width_;
};

struct NumericTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  // Throws SchemaError for unknown names.
  std::size_t index(const std::string& name) const;
  std::vector<double> column(const std::string& name) const;
};

// Header line plus rows of numbers. Throws SchemaError on empty input,
// ragged rows or unparseable cells.
NumericTable read_numeric_csv(const std::filesystem::path& path);
std::vector<std::vector<std::string>> read_csv_cells(const std::filesystem::path& path);

}  // namespace npd
