#ifndef MLCORE_MATRIX_HPP
#define MLCORE_MATRIX_HPP

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mlcore/rng.hpp"

namespace mlcore {

/// Dense row-major dataset: n points by d dimensions, 64-bit floats.
/// Every coordinate is finite and point order is stable; row i always
/// refers to the same input row.  Instances are immutable once handed to
/// a tree or a search, so concurrent reads are safe.
class DataMatrix {
 public:
  DataMatrix() = default;

  DataMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), values_(rows * cols, 0.0) {
    check_shape(rows, cols);
  }

  DataMatrix(std::size_t rows, std::size_t cols, std::vector<double> values)
      : rows_(rows), cols_(cols), values_(std::move(values)) {
    check_shape(rows, cols);
    if (values_.size() != rows * cols) {
      throw std::invalid_argument("DataMatrix: value count " +
                                  std::to_string(values_.size()) +
                                  " does not match shape " +
                                  std::to_string(rows) + "x" +
                                  std::to_string(cols));
    }
    for (double v : values_) {
      if (!std::isfinite(v)) {
        throw std::invalid_argument("DataMatrix: non-finite coordinate");
      }
    }
  }

  static DataMatrix from_rows(
      std::initializer_list<std::initializer_list<double>> rows) {
    std::vector<double> values;
    std::size_t cols = 0;
    std::size_t count = 0;
    for (const auto& row : rows) {
      if (count == 0) cols = row.size();
      if (row.size() != cols) {
        throw std::invalid_argument("DataMatrix::from_rows: ragged rows");
      }
      values.insert(values.end(), row.begin(), row.end());
      ++count;
    }
    return DataMatrix(count, cols, std::move(values));
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return rows_ == 0; }

  std::span<const double> row(std::size_t i) const {
    return {values_.data() + i * cols_, cols_};
  }
  const double* row_ptr(std::size_t i) const {
    return values_.data() + i * cols_;
  }
  double* row_ptr(std::size_t i) { return values_.data() + i * cols_; }

  double operator()(std::size_t i, std::size_t j) const {
    return values_[i * cols_ + j];
  }
  double& operator()(std::size_t i, std::size_t j) {
    return values_[i * cols_ + j];
  }

  const std::vector<double>& values() const { return values_; }

  bool operator==(const DataMatrix&) const = default;

 private:
  static void check_shape(std::size_t rows, std::size_t cols) {
    if (rows == 0 || cols == 0) {
      throw std::invalid_argument("DataMatrix: shape must be at least 1x1");
    }
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

/// n-by-d matrix of i.i.d. uniform [0,1) coordinates, deterministic in the
/// generator state.  Coordinates are drawn in row-major order.
inline DataMatrix generate_uniform(std::size_t n, std::size_t d,
                                   SeededRng& rng) {
  if (n == 0 || d == 0) {
    throw std::invalid_argument("generate_uniform: shape must be at least 1x1");
  }
  std::vector<double> values(n * d);
  for (double& v : values) v = rng.next_double();
  return DataMatrix(n, d, std::move(values));
}

}  // namespace mlcore

#endif  // MLCORE_MATRIX_HPP
