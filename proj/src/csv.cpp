// SPDX-License-Identifier: Apache-2.0
#include "npd/csv.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>

#include "npd/errors.hpp"

namespace npd {
namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header, bool append)
    : out_(path, append ? std::ios::app : std::ios::trunc), width_(header.size()) {
  if (!out_) throw Error(ErrorKind::InvalidArgument, "cannot open " + path.string() + " for writing");
  if (!append) row(header);
}

void CsvWriter::row(std::span<const double> values) {
  if (values.size() != width_) throw Error(ErrorKind::InvalidArgument, "CSV row width mismatch");
  for (std::size_t j = 0; j < values.size(); ++j) out_ << (j ? "," : "") << format_double(values[j]);
  out_ << '\n';
  out_.flush();
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  if (cells.size() != width_) throw Error(ErrorKind::InvalidArgument, "CSV row width mismatch");
  for (std::size_t j = 0; j < cells.size(); ++j) out_ << (j ? "," : "") << cells[j];
  out_ << '\n';
  out_.flush();
}

void CsvWriter::write_stream(std::ostream& out, const std::vector<std::string>& header,
                             const std::vector<std::vector<std::string>>& rows) {
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t j = 0; j < cells.size(); ++j) out << (j ? "," : "") << cells[j];
    out << '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
}

std::size_t NumericTable::index(const std::string& name) const {
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (header[j] == name) return j;
  }
  throw Error(ErrorKind::SchemaError, "CSV has no column '" + name + "'");
}

std::vector<double> NumericTable::column(const std::string& name) const {
  const std::size_t j = index(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[j]);
  return out;
}

std::vector<std::vector<std::string>> read_csv_cells(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::SchemaError, "cannot open " + path.string());
  std::vector<std::vector<std::string>> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    out.push_back(split(line));
  }
  if (out.empty()) throw Error(ErrorKind::SchemaError, path.string() + " is empty");
  for (std::size_t r = 1; r < out.size(); ++r) {
    if (out[r].size() != out.front().size()) {
      throw Error(ErrorKind::SchemaError, path.string() + ": row " + std::to_string(r + 1) + " has " +
                                              std::to_string(out[r].size()) + " cells, header has " +
                                              std::to_string(out.front().size()));
    }
  }
  return out;
}

NumericTable read_numeric_csv(const std::filesystem::path& path) {
  auto cells = read_csv_cells(path);
  NumericTable t;
  t.header = std::move(cells.front());
  for (std::size_t r = 1; r < cells.size(); ++r) {
    std::vector<double> row;
    row.reserve(cells[r].size());
    for (const auto& c : cells[r]) {
      char* end = nullptr;
      const double v = std::strtod(c.c_str(), &end);
      if (c.empty() || end != c.c_str() + c.size()) {
        throw Error(ErrorKind::SchemaError, path.string() + ": row " + std::to_string(r + 1) + " has non-numeric '" +
                                                c + "'");
      }
      row.push_back(v);
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace npd
