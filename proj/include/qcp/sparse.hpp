#pragma once

// Sparse QCP interpolation: ALS driven by M sampled entries instead of the
// full 2^L vector. Each mode update solves two reduced normal systems whose
// design matrices are the rows of the Khatri-Rao chain that belong to the
// sampled positions.

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "qcp/als.hpp"
#include "qcp/cp_model.hpp"
#include "qcp/matrix.hpp"
#include "qcp/quantize.hpp"

namespace qcp {

struct SamplePoint {
  std::uint64_t linear_index = 0;  ///< 1-based grid position
  MultiIndex index;                ///< binary coding of linear_index
  double value = 0.0;
};

/// M sampled entries of a quantized vector of order L. Positions are distinct
/// and lie in [1, 2^L].
class SampleSet {
 public:
  SampleSet() = default;
  /// Throws std::invalid_argument on duplicates, out-of-range positions,
  /// mismatched lengths or an empty set.
  SampleSet(int order, std::span<const std::uint64_t> positions, std::span<const double> values);

  /// Reads values from a full vector (test and experiment use).
  static SampleSet from_vector(const QuantizedVector& data, std::span<const std::uint64_t> positions);
  /// Calls f(linear_index) once per position.
  static SampleSet from_function(int order, std::span<const std::uint64_t> positions,
                                 const std::function<double(std::uint64_t)>& f);

  int order() const noexcept { return order_; }
  std::size_t size() const noexcept { return points_.size(); }
  std::span<const SamplePoint> points() const noexcept { return points_; }
  const SamplePoint& operator[](std::size_t m) const noexcept { return points_[m]; }

 private:
  int order_ = 0;
  std::vector<SamplePoint> points_;
};

enum class SamplingStrategy { UniformRandom, Stratified };

/// M distinct 1-based positions in [1, 2^L], sorted. UniformRandom draws
/// without replacement; Stratified cuts [1, 2^L] into M equal blocks and draws
/// one position per block. Throws std::invalid_argument unless 1 <= M <= 2^L.
std::vector<std::uint64_t> sample_points(SamplingStrategy strategy, std::uint64_t count, int order,
                                         std::uint64_t seed);

/// Samples split by their digit in one mode.
struct ModePartition {
  std::vector<std::size_t> digit1;  ///< sample indices with j_mode == 1 (N1 of them)
  std::vector<std::size_t> digit2;  ///< j_mode == 2 (N2)
};
ModePartition partition_samples(const SampleSet& samples, int mode);

struct ReducedDesign {
  ModePartition partition;
  Matrix design1;  ///< N1 x r
  Matrix design2;  ///< N2 x r
  std::vector<double> rhs1;
  std::vector<double> rhs2;
};

/// Row for sample p, column k: product over modes m != mode of
/// factor(m)(j_m(p) - 1, k). Rows follow sample order.
ReducedDesign build_reduced_design(const CpModel& model, const SampleSet& samples, int mode);

/// 0.5 * sum_m (value_m - eval_entry(model, index_m))^2.
double sampled_objective(const CpModel& model, const SampleSet& samples);

struct SparseReport : AlsReport {
  /// Mode updates skipped because a partition was empty.
  int skipped_rows = 0;
  /// Mode updates whose partition had fewer than r samples.
  int underdetermined_rows = 0;
  double sampled_objective = 0.0;
  /// Largest |residual| over the sampled entries.
  double sampled_max_residual = 0.0;
  /// Full-grid max error, only when a reference vector was supplied.
  std::optional<double> full_grid_error;
};

struct SparseResult {
  CpModel model;
  SparseReport report;
};

/// Sparse ALS with restarts. Restarts are ranked by full-grid max error when
/// `reference` is given, otherwise by the sampled objective; ties go to the
/// smaller seed. report.max_error mirrors the ranking metric's source: the
/// full-grid error when known, else the largest sampled residual.
SparseResult als_sparse_fit(const SampleSet& samples, const AlsConfig& cfg,
                            const QuantizedVector* reference = nullptr);

/// Single run from a given model.
SparseResult als_sparse_fit_from(const SampleSet& samples, const CpModel& init, const AlsConfig& cfg,
                                 const QuantizedVector* reference = nullptr);

}  // namespace qcp
