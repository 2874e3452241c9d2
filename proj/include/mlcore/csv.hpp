#ifndef MLCORE_CSV_HPP
#define MLCORE_CSV_HPP

#include <charconv>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "mlcore/errors.hpp"
#include "mlcore/matrix.hpp"

namespace mlcore {

using IndexMatrix = std::vector<std::vector<std::size_t>>;

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
    s.remove_prefix(1);
  }
  while (!s.empty() &&
         (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

inline double parse_cell(std::string_view cell, std::size_t row1,
                         std::size_t col1, const std::string& path) {
  cell = trim(cell);
  double value = 0.0;
  const auto [ptr, ec] =
      std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc() || ptr != cell.data() + cell.size() ||
      !std::isfinite(value)) {
    throw DataError(path + ": non-numeric cell '" + std::string(cell) +
                    "' at row " + std::to_string(row1) + ", column " +
                    std::to_string(col1));
  }
  return value;
}

/// Shortest decimal digits that round-trip the exact double.
inline void append_double(std::string& out, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, res.ptr);
}

}  // namespace detail

/// Parses a comma-delimited numeric file, one point per row.  Rows and
/// columns in error messages are 1-based.  Ragged rows, non-numeric cells
/// and empty files are rejected; a leading header row is skipped when
/// expect_header is set.
inline DataMatrix load_csv(const std::filesystem::path& path,
                           bool expect_header = false) {
  std::ifstream in(path);
  if (!in) {
    throw DataError(path.string() + ": cannot open file");
  }
  std::vector<double> values;
  std::size_t cols = 0;
  std::size_t rows = 0;
  std::string line;
  std::size_t line_no = 0;
  bool header_pending = expect_header;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    if (header_pending) {
      header_pending = false;
      continue;
    }
    std::size_t col = 0;
    std::size_t start = 0;
    const std::size_t data_row = ++rows;
    while (true) {
      const std::size_t comma = line.find(',', start);
      const std::string_view cell =
          std::string_view(line).substr(start, comma - start);
      ++col;
      values.push_back(detail::parse_cell(cell, data_row, col, path.string()));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (cols == 0) {
      cols = col;
    } else if (col != cols) {
      throw DataError(path.string() + ": ragged row at row " +
                      std::to_string(data_row) + " (" + std::to_string(col) +
                      " columns, expected " + std::to_string(cols) + ")");
    }
  }
  if (rows == 0) {
    throw DataError(path.string() + ": empty file");
  }
  return DataMatrix(rows, cols, std::move(values));
}

/// Writes the dataset with shortest round-trip formatting, so a subsequent
/// load_csv reproduces the matrix exactly.
inline void save_csv(const DataMatrix& data, const std::filesystem::path& path) {
  if (data.empty()) {
    throw std::invalid_argument("save_csv: matrix must have at least one row");
  }
  std::string out;
  out.reserve(data.rows() * data.cols() * 8);
  for (std::size_t i = 0; i < data.rows(); ++i) {
    for (std::size_t j = 0; j < data.cols(); ++j) {
      if (j != 0) out.push_back(',');
      detail::append_double(out, data(i, j));
    }
    out.push_back('\n');
  }
  std::ofstream f(path, std::ios::binary);
  if (!f || !(f << out)) {
    throw DataError(path.string() + ": cannot write file");
  }
}

inline void save_csv(const IndexMatrix& rows, const std::filesystem::path& path) {
  if (rows.empty()) {
    throw std::invalid_argument("save_csv: matrix must have at least one row");
  }
  std::ostringstream out;
  for (const auto& row : rows) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j != 0) out << ',';
      out << row[j];
    }
    out << '\n';
  }
  std::ofstream f(path, std::ios::binary);
  if (!f || !(f << out.str())) {
    throw DataError(path.string() + ": cannot write file");
  }
}

}  // namespace mlcore

#endif  // MLCORE_CSV_HPP
