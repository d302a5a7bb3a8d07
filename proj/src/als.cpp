#include "qcp/als.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>

#include "parallel.hpp"
#include "qcp/multilinear.hpp"

namespace qcp {

void AlsConfig::validate() const {
  if (rank < 1) throw std::invalid_argument("rank must be >= 1");
  if (!(tolerance > 0.0)) throw std::invalid_argument("tolerance must be > 0");
  if (max_iterations < 1) throw std::invalid_argument("max_iterations must be >= 1");
  if (restarts < 1) throw std::invalid_argument("restarts must be >= 1");
  if (!(regularization >= 0.0)) throw std::invalid_argument("regularization must be >= 0");
}

int default_thread_count() {
  if (const char* env = std::getenv("QCP_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return 1;
}

CpModel random_init(int order, std::size_t rank, std::uint64_t seed, bool normalized) {
  if (order < 1 || order > kMaxOrder) throw std::invalid_argument("order out of range");
  if (rank < 1) throw std::invalid_argument("rank must be >= 1");
  std::mt19937_64 gen(seed);
  // 53 random mantissa bits, zero rejected, so values lie in (0, 1).
  auto draw = [&gen] {
    for (;;) {
      const double u = static_cast<double>(gen() >> 11) * 0x1.0p-53;
      if (u > 0.0) return u;
    }
  };
  std::vector<FactorMatrix> factors;
  factors.reserve(static_cast<std::size_t>(order));
  for (int m = 0; m < order; ++m) {
    std::vector<double> data(2 * rank);
    for (double& x : data) x = draw();
    factors.emplace_back(rank, std::move(data));
  }
  if (normalized) {
    for (int m = 0; m + 1 < order; ++m) {
      auto row = factors[static_cast<std::size_t>(m)].row(0);
      std::fill(row.begin(), row.end(), 1.0);
    }
  }
  return CpModel(std::move(factors), normalized && order > 1 ? Format::Normalized : Format::Free);
}

namespace {

bool is_zero(const QuantizedVector& data) {
  return std::all_of(data.values().begin(), data.values().end(), [](double v) { return v == 0.0; });
}

double max_change(std::span<const FactorMatrix> now, std::span<const FactorMatrix> before) {
  double change = 0.0;
  for (std::size_t m = 0; m < now.size(); ++m) {
    const auto a = now[m].data();
    const auto c = before[m].data();
    for (std::size_t e = 0; e < a.size(); ++e) change = std::max(change, std::abs(a[e] - c[e]));
  }
  return change;
}

void balance(std::span<FactorMatrix> factors) {
  const std::size_t r = factors.front().rank();
  const std::size_t last = factors.size() - 1;
  for (std::size_t k = 0; k < r; ++k) {
    double carried = 1.0;
    for (std::size_t m = 0; m < last; ++m) {
      const double s = std::max(std::abs(factors[m](0, k)), std::abs(factors[m](1, k)));
      if (s == 0.0 || !std::isfinite(s)) continue;
      factors[m](0, k) /= s;
      factors[m](1, k) /= s;
      carried *= s;
    }
    factors[last](0, k) *= carried;
    factors[last](1, k) *= carried;
  }
}

// Mutable state for one ALS run over full data.
class FullAls {
 public:
  FullAls(const QuantizedVector& data, const AlsConfig& cfg, std::vector<FactorMatrix> factors)
      : data_(data),
        cfg_(cfg),
        factors_(std::move(factors)),
        slice_(data.size() / 2),
        scratch_(std::max<std::size_t>(data.size() / 4, 1)),
        rhs_(cfg.rank) {
    others_.reserve(factors_.size());
  }

  // One sweep over modes 1..L. Returns false on solver failure, leaving the
  // factors as they were before the failing mode.
  bool sweep(AlsReport& report, int& warnings) {
    for (int mode = 1; mode <= static_cast<int>(factors_.size()); ++mode) {
      if (!update_mode(mode, report, warnings)) return false;
    }
    return true;
  }

  std::vector<FactorMatrix>& factors() { return factors_; }

 private:
  bool update_mode(int mode, AlsReport& report, int& warnings) {
    const std::size_t r = cfg_.rank;
    const int order = static_cast<int>(factors_.size());
    OpCounter counter;

    // A_L, ..., A_{i+1}, A_{i-1}, ..., A_1
    others_.clear();
    for (int m = order; m >= 1; --m) {
      if (m != mode) others_.push_back(factors_[static_cast<std::size_t>(m - 1)]);
    }

    Matrix gram = others_.empty() ? Matrix(r, r, 1.0) : gram_chain(others_, &counter);
    ++report.gram_builds;
    SpdFactorization chol(gram, cfg_.policy(), &counter);
    ++report.factorizations;
    warnings += chol.escalations();
    if (!chol.ok()) {
      report.flops += counter.flops;
      return false;
    }

    const bool pinned = cfg_.normalized && mode < order;
    FactorMatrix& target = factors_[static_cast<std::size_t>(mode - 1)];
    for (int digit = pinned ? 2 : 1; digit <= 2; ++digit) {
      mode_slice_into(data_.values(), order, mode, digit, slice_);
      if (others_.empty()) {
        std::fill(rhs_.begin(), rhs_.end(), slice_[0]);
      } else {
        mttkrp_chain_into(others_, slice_, scratch_, rhs_, &counter);
      }
      const auto row = chol.solve(rhs_, &counter);
      ++report.solves;
      std::copy(row.begin(), row.end(), target.row(static_cast<std::size_t>(digit - 1)).begin());
    }
    report.flops += counter.flops;
    return true;
  }

  const QuantizedVector& data_;
  const AlsConfig& cfg_;
  std::vector<FactorMatrix> factors_;
  std::vector<FactorMatrix> others_;
  std::vector<double> slice_;
  std::vector<double> scratch_;
  std::vector<double> rhs_;
};

double objective(const CpModel& model, const QuantizedVector& data, double* max_abs = nullptr) {
  const auto norms = error_norms(model, data);
  if (max_abs) *max_abs = norms.max_abs;
  return 0.5 * norms.frobenius * norms.frobenius;
}

}  // namespace

AlsResult als_fit_from(const QuantizedVector& data, const CpModel& init, const AlsConfig& cfg) {
  cfg.validate();
  if (init.order() != data.order()) throw std::invalid_argument("initial model order does not match data");
  if (init.rank() != cfg.rank) throw std::invalid_argument("initial model rank does not match config");
  const bool normalized = cfg.normalized && data.order() > 1;
  if (normalized && !satisfies_normalization(init.factors())) {
    throw std::invalid_argument("normalized fit needs a normalized initial model");
  }
  const Format format = normalized ? Format::Normalized : Format::Free;

  AlsReport report;
  FullAls als(data, cfg, std::vector<FactorMatrix>(init.factors().begin(), init.factors().end()));
  report.objective.push_back(objective(init, data));

  std::vector<FactorMatrix> before;
  for (int iter = 1; iter <= cfg.max_iterations; ++iter) {
    before = als.factors();
    int warnings = 0;
    const bool ok = als.sweep(report, warnings);
    report.condition_warnings += warnings;
    report.sweep_warnings.push_back(warnings);
    if (!ok) {
      report.solver_failed = true;
      als.factors() = before;
      break;
    }
    if (cfg.balance_columns && !normalized) balance(als.factors());
    report.iterations = iter;
    report.final_change = max_change(als.factors(), before);
    report.objective.push_back(objective(CpModel(als.factors(), format), data));
    if (report.final_change < cfg.tolerance) {
      report.converged = true;
      break;
    }
  }

  CpModel model(std::move(als.factors()), format);
  report.max_error = max_error(model, data);
  if (!std::isfinite(report.max_error)) report.solver_failed = true;
  return {std::move(model), std::move(report)};
}

AlsResult als_fit(const QuantizedVector& data, const AlsConfig& cfg) {
  cfg.validate();
  if (is_zero(data)) {
    AlsResult result{CpModel::zeros(data.order(), cfg.rank), {}};
    result.report.objective.push_back(0.0);
    result.report.converged = true;
    result.report.seed = cfg.seed;
    return result;
  }

  std::vector<std::optional<AlsResult>> runs(static_cast<std::size_t>(cfg.restarts));
  const int threads = cfg.threads > 0 ? cfg.threads : default_thread_count();
  detail::parallel_for(cfg.restarts, threads, [&](int j) {
    const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(j);
    auto init = random_init(data.order(), cfg.rank, seed, cfg.normalized);
    auto run = als_fit_from(data, init, cfg);
    run.report.seed = seed;
    run.report.restart = j;
    runs[static_cast<std::size_t>(j)] = std::move(run);
  });

  // Smallest max error; ties go to the earlier (smaller) seed.
  std::size_t best = 0;
  auto score = [&](std::size_t j) {
    const double e = runs[j]->report.max_error;
    return std::isfinite(e) ? e : std::numeric_limits<double>::infinity();
  };
  for (std::size_t j = 1; j < runs.size(); ++j) {
    if (score(j) < score(best)) best = j;
  }
  return std::move(*runs[best]);
}

}  // namespace qcp
