#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace mantra {

/// Dense row-major matrix of finite scores: one row per decoding step, one
/// column per rule. Also used for binary one-hot encodings.
class LogitMatrix {
 public:
  LogitMatrix() = default;
  LogitMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), values_(rows * cols, 0.0) {}
  LogitMatrix(std::size_t rows, std::size_t cols, std::vector<double> values)
      : rows_(rows), cols_(cols), values_(std::move(values)) {
    if (values_.size() != rows_ * cols_) throw std::invalid_argument("logit matrix size mismatch");
    for (double v : values_) {
      if (!std::isfinite(v)) throw std::invalid_argument("logit matrix holds a non-finite value");
    }
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }
  double& operator()(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }

  std::span<const double> row(std::size_t r) const { return {values_.data() + r * cols_, cols_}; }
  std::span<const double> values() const { return values_; }

  friend bool operator==(const LogitMatrix&, const LogitMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

}  // namespace mantra
