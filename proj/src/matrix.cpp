#include "qcp/matrix.hpp"

#include <cmath>
#include <stdexcept>

namespace qcp {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) throw std::invalid_argument("matrix data has wrong size");
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

std::vector<double> Matrix::col(std::size_t j) const {
  std::vector<double> c(rows_);
  for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
  return c;
}

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

double Matrix::trace() const {
  double s = 0.0;
  for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) s += (*this)(i, i);
  return s;
}

FactorMatrix::FactorMatrix(std::size_t rank, double fill) : rank_(rank), data_(2 * rank, fill) {
  if (rank == 0) throw std::invalid_argument("factor matrix needs at least one column");
}

FactorMatrix::FactorMatrix(std::size_t rank, std::vector<double> data)
    : rank_(rank), data_(std::move(data)) {
  if (rank == 0) throw std::invalid_argument("factor matrix needs at least one column");
  if (data_.size() != 2 * rank) throw std::invalid_argument("factor matrix must be 2 x rank");
  for (double x : data_) {
    if (!std::isfinite(x)) throw std::invalid_argument("factor matrix entries must be finite");
  }
}

}  // namespace qcp
