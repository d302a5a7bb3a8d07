#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace qcp {

/// Small dense row-major matrix. Used for r x r Gram matrices, the reduced
/// design matrices of sparse fitting and general-shape Khatri-Rao products.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  /// Throws std::invalid_argument if data.size() != rows * cols.
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Matrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const noexcept { return {data_.data() + i * cols_, cols_}; }
  std::vector<double> col(std::size_t j) const;

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  Matrix transpose() const;
  double trace() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// One mode of a quantized CP model: a 2 x r matrix whose column k is the
/// length-2 vector a_k of rank term k. Row 0 pairs with digit 1, row 1 with
/// digit 2.
class FactorMatrix {
 public:
  FactorMatrix() = default;
  explicit FactorMatrix(std::size_t rank, double fill = 0.0);
  /// Row-major {row0..., row1...}; throws unless data.size() == 2 * rank and
  /// rank >= 1 and every entry is finite.
  FactorMatrix(std::size_t rank, std::vector<double> data);

  std::size_t rank() const noexcept { return rank_; }

  double& operator()(std::size_t row, std::size_t k) noexcept { return data_[row * rank_ + k]; }
  double operator()(std::size_t row, std::size_t k) const noexcept { return data_[row * rank_ + k]; }

  std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * rank_, rank_}; }
  std::span<const double> row(std::size_t r) const noexcept { return {data_.data() + r * rank_, rank_}; }

  std::span<const double> data() const noexcept { return data_; }

  Matrix as_matrix() const { return Matrix(2, rank_, data_); }

  friend bool operator==(const FactorMatrix&, const FactorMatrix&) = default;

 private:
  std::size_t rank_ = 0;
  std::vector<double> data_;
};

}  // namespace qcp
