#pragma once

#include <cstdint>
#include <vector>

#include "qcp/cp_model.hpp"
#include "qcp/quantize.hpp"
#include "qcp/spd_solve.hpp"

namespace qcp {

struct AlsConfig {
  std::size_t rank = 1;
  /// Stop once the largest entrywise factor change over a sweep is below this.
  double tolerance = 1e-8;
  int max_iterations = 1000;
  /// Independent random starts; the best by max error wins.
  int restarts = 5;
  /// Restart j is initialized with seed + j.
  std::uint64_t seed = 1;
  /// Base Tikhonov level, relative to trace(G) / r.
  double regularization = 1e-12;
  /// Pin row 1 of modes 1..L-1 to ones.
  bool normalized = false;
  /// After each sweep rescale columns of modes 1..L-1 to unit max-norm and
  /// push the scale into mode L. Ignored in normalized mode.
  bool balance_columns = false;
  /// Worker threads for restarts; 0 reads QCP_THREADS (default 1).
  int threads = 0;

  /// Throws std::invalid_argument on rank < 1, tolerance <= 0,
  /// max_iterations < 1, restarts < 1 or negative regularization.
  void validate() const;
  RegularizationPolicy policy() const { return {regularization, 1e-6, 10.0}; }
};

struct AlsReport {
  int iterations = 0;
  /// Largest entrywise factor change in the last sweep.
  double final_change = 0.0;
  double max_error = 0.0;
  /// F = 0.5 * ||data - model||^2; entry 0 is the initial model, entry t the
  /// value after sweep t.
  std::vector<double> objective;
  /// Shifted SPD retries, total and per sweep (index t-1 for sweep t).
  int condition_warnings = 0;
  std::vector<int> sweep_warnings;
  /// Set when a solve exhausted every regularization level; the returned
  /// model is the last iterate before the failure.
  bool solver_failed = false;
  bool converged = false;
  std::uint64_t seed = 0;
  int restart = 0;
  std::uint64_t gram_builds = 0;
  std::uint64_t factorizations = 0;
  std::uint64_t solves = 0;
  std::uint64_t flops = 0;
};

struct AlsResult {
  CpModel model;
  AlsReport report;
};

/// Entries i.i.d. uniform on (0, 1), drawn mode by mode (row 1 then row 2).
/// Deterministic for a given seed. With normalized set, row 1 of modes
/// 1..L-1 is overwritten with ones after drawing.
CpModel random_init(int order, std::size_t rank, std::uint64_t seed, bool normalized = false);

/// Full-data ALS with restarts. Zero data returns the zero model at once.
AlsResult als_fit(const QuantizedVector& data, const AlsConfig& cfg);

/// Single ALS run from a given starting model (restarts and seed ignored).
/// Throws std::invalid_argument when the model shape does not match data and
/// cfg.rank, or when cfg.normalized is set and init is not normalized.
AlsResult als_fit_from(const QuantizedVector& data, const CpModel& init, const AlsConfig& cfg);

/// Thread count from QCP_THREADS, default 1.
int default_thread_count();

}  // namespace qcp
