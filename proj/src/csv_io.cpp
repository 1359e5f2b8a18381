#include "reltest/csv_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <vector>

namespace reltest {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' ||
                        s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

}  // namespace

DataMatrix read_csv(const std::string& path, bool has_header) {
  std::ifstream in(path);
  if (!in) {
    throw invalid_input("cannot open file: " + path);
  }
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (has_header && line_no == 1) {
      continue;
    }
    const std::string_view trimmed = trim(line);
    if (trimmed.empty()) {
      continue;
    }
    std::vector<double> row;
    std::string_view rest = trimmed;
    while (true) {
      const std::size_t comma = rest.find(',');
      const std::string_view field =
          trim(comma == std::string_view::npos ? rest : rest.substr(0, comma));
      double value = 0.0;
      const auto res =
          std::from_chars(field.data(), field.data() + field.size(), value);
      if (res.ec != std::errc{} || res.ptr != field.data() + field.size() ||
          field.empty()) {
        throw invalid_input(path + ":" + std::to_string(line_no) +
                            ": cannot parse numeric field '" +
                            std::string(field) + "'");
      }
      if (!std::isfinite(value)) {
        throw invalid_input(path + ":" + std::to_string(line_no) +
                            ": non-finite value");
      }
      row.push_back(value);
      if (comma == std::string_view::npos) {
        break;
      }
      rest = rest.substr(comma + 1);
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw invalid_input(path + ":" + std::to_string(line_no) +
                          ": expected " + std::to_string(rows.front().size()) +
                          " columns, found " + std::to_string(row.size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) {
    throw invalid_input(path + ": no data rows");
  }
  DataMatrix m(static_cast<Index>(rows.size()),
               static_cast<Index>(rows.front().size()));
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
  }
  return m;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_csv(const std::string& path, const DataMatrix& m) {
  std::ofstream out(path);
  if (!out) {
    throw invalid_input("cannot open file for writing: " + path);
  }
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j > 0) {
        out << ',';
      }
      out << format_double(m(i, j));
    }
    out << '\n';
  }
  if (!out) {
    throw invalid_input("failed writing file: " + path);
  }
}

}  // namespace reltest
