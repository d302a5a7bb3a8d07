#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "qcp/matrix.hpp"
#include "qcp/quantize.hpp"

namespace qcp {

enum class Format {
  Free,        ///< every factor entry is a parameter
  Normalized,  ///< modes 1..L-1 have row 0 pinned to exactly 1
};

/// Rank-r quantized canonical model sum_k a_k^(1) kron ... kron a_k^(L),
/// stored as L factor matrices of shape 2 x r, mode 1 first.
class CpModel {
 public:
  CpModel() = default;
  /// Throws std::invalid_argument when the list is empty, the ranks differ,
  /// or the Normalized constraint does not hold.
  explicit CpModel(std::vector<FactorMatrix> factors, Format format = Format::Free);

  /// All-zero model.
  static CpModel zeros(int order, std::size_t rank);

  int order() const noexcept { return static_cast<int>(factors_.size()); }
  std::size_t rank() const noexcept { return factors_.empty() ? 0 : factors_.front().rank(); }
  Format format() const noexcept { return format_; }

  /// mode is 1-based.
  const FactorMatrix& factor(int mode) const { return factors_.at(static_cast<std::size_t>(mode - 1)); }
  FactorMatrix& factor(int mode) { return factors_.at(static_cast<std::size_t>(mode - 1)); }
  std::span<const FactorMatrix> factors() const noexcept { return factors_; }
  std::span<FactorMatrix> factors() noexcept { return factors_; }

  /// Number of free parameters: 2Lr, or (L+1)r in the normalized format.
  std::size_t parameter_count() const noexcept;

 private:
  std::vector<FactorMatrix> factors_;
  Format format_ = Format::Free;
};

/// True when row 0 of modes 1..L-1 is exactly 1.
bool satisfies_normalization(std::span<const FactorMatrix> factors);

/// sum_k prod_v factor(v)(j_v - 1, k). Throws on an order mismatch.
double eval_entry(const CpModel& model, const MultiIndex& index);
/// Same, addressed by 1-based linear index.
double eval_linear(const CpModel& model, std::uint64_t linear_index);

/// Streams the reconstruction in consecutive blocks without holding the full
/// vector. The callback receives the 0-based offset of the block and its
/// values. Every value is bit-identical to eval_entry at that index.
void for_each_block(const CpModel& model,
                    const std::function<void(std::size_t, std::span<const double>)>& visit);

QuantizedVector reconstruct(const CpModel& model);

/// Rank-1 model of exp(-lambda (x - a)) on the grid x_k = a + k h,
/// h = (b - a) / (2^L - 1). Factor p is (1, q^(2^(p-1))) with q = exp(-lambda h).
CpModel exp_rank1_model(double lambda, double a, double b, int order);

/// max_i |reconstruct(model)[i] - data[i]|, streamed.
double max_error(const CpModel& model, const QuantizedVector& data);

struct ErrorNorms {
  double max_abs = 0.0;
  double frobenius = 0.0;  ///< sqrt of the sum of squared residuals
};
ErrorNorms error_norms(const CpModel& model, const QuantizedVector& data);

/// Text model file: "L r" on the first line, then for each mode two lines
/// (row for digit 1, row for digit 2) of r decimal numbers.
void write_model(std::ostream& os, const CpModel& model);
CpModel read_model(std::istream& is);
void save_model(const std::string& path, const CpModel& model);
CpModel load_model(const std::string& path);

/// {"order": L, "rank": r, "format": "...", "factors": [[[row0], [row1]], ...]}
std::string model_to_json(const CpModel& model);

}  // namespace qcp
