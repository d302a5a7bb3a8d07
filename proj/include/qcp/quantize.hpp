#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace qcp {

/// Largest supported number of binary modes. 2^30 doubles is already 8 GiB.
inline constexpr int kMaxOrder = 30;

/// A vector of length 2^L viewed as an L-th order tensor with two entries per
/// mode. The tensor is never stored as a nested array; entries are addressed
/// through the binary coding of their linear index.
class QuantizedVector {
 public:
  QuantizedVector() = default;
  /// Throws std::invalid_argument unless values.size() == 2^order, order >= 1.
  QuantizedVector(std::vector<double> values, int order);
  /// Infers the order from the length, which must be a power of two >= 2.
  explicit QuantizedVector(std::vector<double> values);

  int order() const noexcept { return order_; }
  std::size_t size() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  std::vector<double>& mutable_values() noexcept { return values_; }

  /// 1-based, like the tau_1..tau_N labels.
  double at(std::uint64_t linear_index) const;
  double operator[](std::size_t zero_based) const noexcept { return values_[zero_based]; }

 private:
  std::vector<double> values_;
  int order_ = 0;
};

/// Binary multi-index (j_1, ..., j_L) with digits in {1, 2}. Mode 1 is the
/// least significant digit of i - 1.
class MultiIndex {
 public:
  MultiIndex() = default;
  /// Throws std::invalid_argument on an empty list or a digit outside {1, 2}.
  explicit MultiIndex(std::vector<int> digits);

  int order() const noexcept { return static_cast<int>(digits_.size()); }
  /// mode is 1-based.
  int digit(int mode) const { return digits_.at(static_cast<std::size_t>(mode - 1)); }
  std::span<const int> digits() const noexcept { return digits_; }

  friend bool operator==(const MultiIndex&, const MultiIndex&) = default;

 private:
  std::vector<int> digits_;
};

/// i - 1 = sum_v (j_v - 1) 2^(v-1). Throws std::out_of_range unless 1 <= i <= 2^L.
MultiIndex linear_to_multi(std::uint64_t linear_index, int order);

/// Inverse of linear_to_multi.
std::uint64_t multi_to_linear(const MultiIndex& index);

/// Entries whose multi-index has j_mode == digit, in increasing linear index.
/// Result length is 2^(L-1). Throws std::out_of_range on a bad mode or digit.
std::vector<double> mode_slice(const QuantizedVector& v, int mode, int digit);

/// Same as above, writing into a caller-owned buffer of length 2^(L-1).
void mode_slice_into(std::span<const double> values, int order, int mode, int digit,
                     std::span<double> out);

}  // namespace qcp
