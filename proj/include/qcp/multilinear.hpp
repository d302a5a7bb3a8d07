#pragma once

// Kronecker, Khatri-Rao and Hadamard products plus the two fast kernels ALS
// needs: the Gram matrix of a Khatri-Rao chain and its transpose applied to a
// vector (MTTKRP).
//
// Ordering contract for chains: factors are listed highest mode first. For the
// mode-i update of an order-L model the list is A_L, ..., A_{i+1}, A_{i-1},
// ..., A_1, and the vector it acts on has the mode of the LAST listed factor
// varying fastest.

#include <cstdint>
#include <span>
#include <vector>

#include "qcp/matrix.hpp"

namespace qcp {

/// Floating-point operation tally. Kernels add one per multiply and one per add.
struct OpCounter {
  std::uint64_t flops = 0;
  void add(std::uint64_t n) noexcept { flops += n; }
};

/// out[p * c.size() + q] = b[p] * c[q]. Throws on empty input.
std::vector<double> kronecker(std::span<const double> b, std::span<const double> c);

/// Column k of the result is kronecker(B[:, k], C[:, k]).
Matrix khatri_rao(const Matrix& b, const Matrix& c);

/// Elementwise product of equal-shape matrices.
Matrix hadamard(const Matrix& m, const Matrix& n);

/// (A_1^T A_1) o (A_2^T A_2) o ... over the list. Equals K^T K for the
/// Khatri-Rao chain K of the same list, without forming K.
Matrix gram_chain(std::span<const FactorMatrix> factors, OpCounter* counter = nullptr);

/// y_k = <x, a_k^(first) kron ... kron a_k^(last)> for each rank term k,
/// i.e. K^T x. Contracts the slowest mode first and recurses on the halved
/// vector, so K is never formed. x.size() must be 2^p for p = factors.size().
/// Uses at most 3 r (2^p - 1) flops.
std::vector<double> mttkrp_chain(std::span<const FactorMatrix> factors, std::span<const double> x,
                                 OpCounter* counter = nullptr);

/// Variant with caller-owned scratch of length >= 2^(p-1), avoiding
/// allocation in hot loops.
void mttkrp_chain_into(std::span<const FactorMatrix> factors, std::span<const double> x,
                       std::span<double> scratch, std::span<double> out,
                       OpCounter* counter = nullptr);

}  // namespace qcp
