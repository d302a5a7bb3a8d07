#include "qcp/quantize.hpp"

#include <bit>
#include <stdexcept>
#include <string>

namespace qcp {

namespace {

void check_order(int order) {
  if (order < 1 || order > kMaxOrder) {
    throw std::invalid_argument("order must be in [1, " + std::to_string(kMaxOrder) +
                                "], got " + std::to_string(order));
  }
}

}  // namespace

QuantizedVector::QuantizedVector(std::vector<double> values, int order)
    : values_(std::move(values)), order_(order) {
  check_order(order);
  if (values_.size() != (std::size_t{1} << order)) {
    throw std::invalid_argument("vector length " + std::to_string(values_.size()) +
                                " is not 2^" + std::to_string(order));
  }
}

QuantizedVector::QuantizedVector(std::vector<double> values) : values_(std::move(values)) {
  const std::size_t n = values_.size();
  if (n < 2 || !std::has_single_bit(n)) {
    throw std::invalid_argument("vector length " + std::to_string(n) +
                                " is not a power of two >= 2");
  }
  order_ = std::countr_zero(n);
  check_order(order_);
}

double QuantizedVector::at(std::uint64_t linear_index) const {
  if (linear_index < 1 || linear_index > values_.size()) {
    throw std::out_of_range("linear index " + std::to_string(linear_index) + " out of range");
  }
  return values_[linear_index - 1];
}

MultiIndex::MultiIndex(std::vector<int> digits) : digits_(std::move(digits)) {
  if (digits_.empty()) throw std::invalid_argument("multi-index must have at least one digit");
  for (int d : digits_) {
    if (d != 1 && d != 2) {
      throw std::invalid_argument("multi-index digit " + std::to_string(d) + " not in {1,2}");
    }
  }
}

MultiIndex linear_to_multi(std::uint64_t linear_index, int order) {
  check_order(order);
  const std::uint64_t n = std::uint64_t{1} << order;
  if (linear_index < 1 || linear_index > n) {
    throw std::out_of_range("linear index " + std::to_string(linear_index) +
                            " outside [1, 2^" + std::to_string(order) + "]");
  }
  const std::uint64_t bits = linear_index - 1;
  std::vector<int> digits(static_cast<std::size_t>(order));
  for (int v = 0; v < order; ++v) digits[static_cast<std::size_t>(v)] = 1 + static_cast<int>((bits >> v) & 1U);
  return MultiIndex(std::move(digits));
}

std::uint64_t multi_to_linear(const MultiIndex& index) {
  check_order(index.order());
  std::uint64_t bits = 0;
  const auto digits = index.digits();
  for (std::size_t v = 0; v < digits.size(); ++v) {
    bits |= static_cast<std::uint64_t>(digits[v] - 1) << v;
  }
  return bits + 1;
}

void mode_slice_into(std::span<const double> values, int order, int mode, int digit,
                     std::span<double> out) {
  if (mode < 1 || mode > order) {
    throw std::out_of_range("mode " + std::to_string(mode) + " outside [1, " +
                            std::to_string(order) + "]");
  }
  if (digit != 1 && digit != 2) throw std::out_of_range("digit must be 1 or 2");
  const std::size_t half = values.size() / 2;
  if (out.size() != half) throw std::invalid_argument("slice buffer has wrong length");

  // Entries with bit (mode-1) fixed come in runs of length 2^(mode-1).
  const std::size_t run = std::size_t{1} << (mode - 1);
  const std::size_t offset = digit == 2 ? run : 0;
  std::size_t pos = 0;
  for (std::size_t block = 0; block < values.size(); block += 2 * run) {
    const double* src = values.data() + block + offset;
    for (std::size_t j = 0; j < run; ++j) out[pos++] = src[j];
  }
}

std::vector<double> mode_slice(const QuantizedVector& v, int mode, int digit) {
  std::vector<double> out(v.size() / 2);
  mode_slice_into(v.values(), v.order(), mode, digit, out);
  return out;
}

}  // namespace qcp
