#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "qcp/als.hpp"
#include "qcp/cp_model.hpp"
#include "qcp/quantize.hpp"
#include "qcp/sparse.hpp"

namespace qcp {

enum class FunctionKind {
  ExpDecay,  ///< exp(-p x)
  Gaussian,  ///< exp(-p x^2)
  Sine,      ///< sin(p pi x)
  Monomial,  ///< x^p
};

struct FunctionSpec {
  FunctionKind kind = FunctionKind::Gaussian;
  double parameter = 1.0;
  double a = 0.0;
  double b = 1.0;
  int order = 15;

  /// Throws std::invalid_argument unless b > a, 1 <= order <= kMaxOrder and
  /// every number is finite.
  void validate() const;
  double operator()(double x) const;
  /// Grid node for a 1-based linear index: a + (i - 1) h, h = (b - a) / (2^L - 1).
  double node(std::uint64_t linear_index) const;
  /// e.g. "gaussian:50[0;0.25]"
  std::string label() const;
};

/// Parses "kind[:parameter]" with kind one of exp_decay, gaussian, sine,
/// monomial (short forms exp, gauss, sin, mono). A missing parameter means 1.
/// Interval and order are left at their defaults.
FunctionSpec parse_function(const std::string& text);

/// f(a + k h) for k = 0 .. 2^L - 1.
QuantizedVector generate_samples(const FunctionSpec& spec);

struct ExperimentRow {
  std::string function;
  int order = 0;
  std::size_t rank = 0;
  std::uint64_t samples = 0;  ///< 0 for full-data fits
  double error = 0.0;         ///< full-grid max error
  int iterations = 0;
  double seconds = 0.0;
  bool solver_failed = false;
  /// Cell with no published counterpart (Table 4, M = 4Lr, r = 7, 8).
  bool extrapolated = false;
  std::optional<CpModel> model;
};

struct TableOptions {
  std::optional<int> order;          ///< override L
  std::optional<std::size_t> max_rank;
  std::optional<int> restarts;
  std::optional<double> tolerance;
  std::optional<int> max_iterations;
  std::uint64_t seed = 1;
  int threads = 0;                   ///< 0 reads QCP_THREADS
  bool keep_models = false;
  SamplingStrategy strategy = SamplingStrategy::UniformRandom;
};

/// Runs one table's configuration sweep. Solver failures are recorded per row
/// and the sweep continues. Throws std::invalid_argument on an unknown id.
std::vector<ExperimentRow> run_table(int table_id, const TableOptions& options = {});

/// Single full-data fit of `spec` reported as a row.
ExperimentRow run_full_fit(const FunctionSpec& spec, const AlsConfig& cfg, CpModel* model_out = nullptr);
/// Single sparse fit with M sampled points; error is measured on the full grid.
ExperimentRow run_sparse_fit(const FunctionSpec& spec, std::uint64_t samples, SamplingStrategy strategy,
                             const AlsConfig& cfg, CpModel* model_out = nullptr);

/// Header "function,L,r,M,error,iters,seconds", LF line endings, errors with
/// 12 significant digits.
void write_csv(std::ostream& os, const std::vector<ExperimentRow>& rows);
/// Array of {"function", "L", "r", "M", "error", "model"} objects for rows
/// that kept their model.
std::string rows_to_json(const std::vector<ExperimentRow>& rows);

struct ScalingPoint {
  int order = 0;
  std::size_t rank = 0;
  std::uint64_t samples = 0;
  double seconds_per_sweep = 0.0;
  double flops_per_sweep = 0.0;
};

struct ScalingReport {
  std::vector<ScalingPoint> full;    ///< full ALS, one per L
  std::vector<double> full_time_ratios;  ///< t(L+1) / t(L)
  std::vector<ScalingPoint> sparse;  ///< sparse ALS at (M, r), (2M, r) and (M, 2r)
  double sparse_sample_ratio = 0.0;  ///< flops(2M) / flops(M)
  double sparse_rank_ratio = 0.0;    ///< flops(2r) / flops(r)
};

struct ScalingOptions {
  int min_order = 14;
  int max_order = 17;
  std::size_t rank = 4;
  int sweeps = 5;
  int repetitions = 3;
  int sparse_order = 12;
  std::size_t sparse_rank = 4;
  std::uint64_t sparse_samples = 0;  ///< 0 picks 2 L r
};

/// Per-sweep wall time of full ALS across orders (minimum over repetitions)
/// and instrumented flop counts of sparse ALS at M vs 2M and r vs 2r.
ScalingReport scaling_probe(const ScalingOptions& options = {});

}  // namespace qcp
