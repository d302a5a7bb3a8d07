#pragma once

#include <span>
#include <vector>

#include "qcp/matrix.hpp"
#include "qcp/multilinear.hpp"

namespace qcp {

/// Tikhonov escalation for small SPD solves. A shift mu * trace(G) / r is
/// added to the diagonal when the plain factorization fails or produces a
/// pivot below base * trace(G) / r; mu starts at base (or 1e-12 when base is
/// zero) and grows by `step` until it exceeds `ceiling`.
struct RegularizationPolicy {
  double base = 1e-12;
  double ceiling = 1e-6;
  double step = 10.0;
};

/// Cholesky factor of G (possibly shifted) that can be applied to several
/// right-hand sides.
class SpdFactorization {
 public:
  /// Throws std::invalid_argument if G is not square or not symmetric to
  /// 1e-12 relative. A factorization that exhausts every shift is returned
  /// with ok() == false rather than thrown.
  SpdFactorization(const Matrix& g, const RegularizationPolicy& policy = {},
                   OpCounter* counter = nullptr);

  bool ok() const noexcept { return ok_; }
  /// Number of shifted retries that were needed (each is a condition warning).
  int escalations() const noexcept { return escalations_; }
  /// Diagonal shift actually applied, 0 if none.
  double shift() const noexcept { return shift_; }

  /// Solves (G + shift I) x = rhs. Throws std::logic_error if !ok().
  std::vector<double> solve(std::span<const double> rhs, OpCounter* counter = nullptr) const;

 private:
  bool try_factor(const Matrix& g, double shift, double min_pivot, OpCounter* counter);

  Matrix lower_;
  bool ok_ = false;
  int escalations_ = 0;
  double shift_ = 0.0;
};

struct SpdSolveResult {
  std::vector<double> x;
  bool ok = false;
  int escalations = 0;
  double shift = 0.0;
};

/// One-shot solve of G x = rhs with the escalation policy above.
SpdSolveResult solve_spd(const Matrix& g, std::span<const double> rhs,
                         const RegularizationPolicy& policy = {});

}  // namespace qcp
