#include "qcp/spd_solve.hpp"

#include <cmath>
#include <stdexcept>

namespace qcp {

SpdFactorization::SpdFactorization(const Matrix& g, const RegularizationPolicy& policy,
                                   OpCounter* counter) {
  const std::size_t n = g.rows();
  if (n == 0 || g.cols() != n) throw std::invalid_argument("solve_spd: matrix must be square and nonempty");
  double scale = 0.0;
  for (double v : g.data()) scale = std::max(scale, std::abs(v));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (std::abs(g(i, j) - g(j, i)) > 1e-12 * scale) {
        throw std::invalid_argument("solve_spd: matrix is not symmetric");
      }
    }
  }

  const double mean_diag = g.trace() / static_cast<double>(n);
  if (!std::isfinite(mean_diag)) return;

  if (try_factor(g, 0.0, policy.base * mean_diag, counter)) return;
  if (!(mean_diag > 0.0)) return;

  double mu = policy.base > 0.0 ? policy.base : 1e-12;
  while (mu <= policy.ceiling * (1.0 + 1e-9)) {
    ++escalations_;
    if (try_factor(g, mu * mean_diag, 0.0, counter)) return;
    mu *= policy.step;
  }
}

bool SpdFactorization::try_factor(const Matrix& g, double shift, double min_pivot,
                                  OpCounter* counter) {
  const std::size_t n = g.rows();
  lower_ = Matrix(n, n);
  std::uint64_t flops = 0;
  for (std::size_t j = 0; j < n; ++j) {
    double d = g(j, j) + shift;
    for (std::size_t m = 0; m < j; ++m) d -= lower_(j, m) * lower_(j, m);
    flops += 2 * j + 1;
    if (!std::isfinite(d) || d <= 0.0 || d < min_pivot) {
      if (counter) counter->add(flops);
      ok_ = false;
      return false;
    }
    const double ljj = std::sqrt(d);
    lower_(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = g(i, j);
      for (std::size_t m = 0; m < j; ++m) s -= lower_(i, m) * lower_(j, m);
      lower_(i, j) = s / ljj;
      flops += 2 * j + 1;
    }
  }
  if (counter) counter->add(flops);
  ok_ = true;
  shift_ = shift;
  return true;
}

std::vector<double> SpdFactorization::solve(std::span<const double> rhs, OpCounter* counter) const {
  if (!ok_) throw std::logic_error("solve_spd: factorization failed");
  const std::size_t n = lower_.rows();
  if (rhs.size() != n) throw std::invalid_argument("solve_spd: right-hand side has wrong length");
  std::vector<double> x(rhs.begin(), rhs.end());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t m = 0; m < i; ++m) x[i] -= lower_(i, m) * x[m];
    x[i] /= lower_(i, i);
  }
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t m = i + 1; m < n; ++m) x[i] -= lower_(m, i) * x[m];
    x[i] /= lower_(i, i);
  }
  if (counter) counter->add(2 * n * n);
  return x;
}

SpdSolveResult solve_spd(const Matrix& g, std::span<const double> rhs,
                         const RegularizationPolicy& policy) {
  SpdFactorization f(g, policy);
  SpdSolveResult result;
  result.ok = f.ok();
  result.escalations = f.escalations();
  result.shift = f.shift();
  if (f.ok()) result.x = f.solve(rhs);
  return result;
}

}  // namespace qcp
