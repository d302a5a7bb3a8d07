#include "qcp/multilinear.hpp"

#include <stdexcept>
#include <string>

namespace qcp {

std::vector<double> kronecker(std::span<const double> b, std::span<const double> c) {
  if (b.empty() || c.empty()) throw std::invalid_argument("kronecker: empty operand");
  std::vector<double> out(b.size() * c.size());
  for (std::size_t p = 0; p < b.size(); ++p)
    for (std::size_t q = 0; q < c.size(); ++q) out[p * c.size() + q] = b[p] * c[q];
  return out;
}

Matrix khatri_rao(const Matrix& b, const Matrix& c) {
  if (b.cols() != c.cols()) {
    throw std::invalid_argument("khatri_rao: column counts differ (" + std::to_string(b.cols()) +
                                " vs " + std::to_string(c.cols()) + ")");
  }
  Matrix out(b.rows() * c.rows(), b.cols());
  for (std::size_t p = 0; p < b.rows(); ++p)
    for (std::size_t q = 0; q < c.rows(); ++q)
      for (std::size_t k = 0; k < b.cols(); ++k) out(p * c.rows() + q, k) = b(p, k) * c(q, k);
  return out;
}

Matrix hadamard(const Matrix& m, const Matrix& n) {
  if (m.rows() != n.rows() || m.cols() != n.cols()) {
    throw std::invalid_argument("hadamard: shape mismatch");
  }
  Matrix out(m.rows(), m.cols());
  auto lhs = m.data();
  auto rhs = n.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = lhs[i] * rhs[i];
  return out;
}

Matrix gram_chain(std::span<const FactorMatrix> factors, OpCounter* counter) {
  if (factors.empty()) throw std::invalid_argument("gram_chain: empty factor list");
  const std::size_t r = factors.front().rank();
  Matrix g(r, r, 1.0);
  for (const auto& a : factors) {
    if (a.rank() != r) throw std::invalid_argument("gram_chain: column count mismatch");
    for (std::size_t i = 0; i < r; ++i) {
      for (std::size_t j = i; j < r; ++j) {
        const double aij = a(0, i) * a(0, j) + a(1, i) * a(1, j);
        g(i, j) *= aij;
        if (j != i) g(j, i) = g(i, j);
      }
    }
  }
  if (counter) counter->add(4 * factors.size() * r * (r + 1) / 2);
  return g;
}

void mttkrp_chain_into(std::span<const FactorMatrix> factors, std::span<const double> x,
                       std::span<double> scratch, std::span<double> out, OpCounter* counter) {
  if (factors.empty()) throw std::invalid_argument("mttkrp_chain: empty factor list");
  const std::size_t p = factors.size();
  const std::size_t r = factors.front().rank();
  if (p >= 63 || x.size() != (std::size_t{1} << p)) {
    throw std::invalid_argument("mttkrp_chain: vector length " + std::to_string(x.size()) +
                                " is not 2^" + std::to_string(p));
  }
  for (const auto& a : factors) {
    if (a.rank() != r) throw std::invalid_argument("mttkrp_chain: column count mismatch");
  }
  if (out.size() != r) throw std::invalid_argument("mttkrp_chain: output must have rank entries");
  if (scratch.size() < x.size() / 2) throw std::invalid_argument("mttkrp_chain: scratch too small");

  for (std::size_t k = 0; k < r; ++k) {
    // Contract the slowest-varying (first listed) mode: x viewed as a
    // (half x 2) column-major matrix times the column (a_1k, a_2k).
    std::size_t half = x.size() / 2;
    {
      const double a0 = factors[0](0, k);
      const double a1 = factors[0](1, k);
      const double* lo = x.data();
      const double* hi = x.data() + half;
      double* s = scratch.data();
      for (std::size_t j = 0; j < half; ++j) s[j] = a0 * lo[j] + a1 * hi[j];
    }
    for (std::size_t m = 1; m < p; ++m) {
      half /= 2;
      const double a0 = factors[m](0, k);
      const double a1 = factors[m](1, k);
      double* s = scratch.data();
      for (std::size_t j = 0; j < half; ++j) s[j] = a0 * s[j] + a1 * s[j + half];
    }
    out[k] = scratch[0];
  }
  if (counter) counter->add(3 * r * (x.size() - 1));
}

std::vector<double> mttkrp_chain(std::span<const FactorMatrix> factors, std::span<const double> x,
                                 OpCounter* counter) {
  const std::size_t r = factors.empty() ? 0 : factors.front().rank();
  std::vector<double> out(r);
  std::vector<double> scratch(std::max<std::size_t>(x.size() / 2, 1));
  mttkrp_chain_into(factors, x, scratch, out, counter);
  return out;
}

}  // namespace qcp
