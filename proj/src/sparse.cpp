#include "qcp/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <unordered_set>

#include "parallel.hpp"
#include "qcp/spd_solve.hpp"

namespace qcp {

SampleSet::SampleSet(int order, std::span<const std::uint64_t> positions, std::span<const double> values)
    : order_(order) {
  if (order < 1 || order > kMaxOrder) throw std::invalid_argument("sample set order out of range");
  if (positions.empty()) throw std::invalid_argument("sample set must not be empty");
  if (positions.size() != values.size()) throw std::invalid_argument("positions and values differ in length");
  const std::uint64_t n = std::uint64_t{1} << order;
  std::unordered_set<std::uint64_t> seen;
  seen.reserve(positions.size());
  points_.reserve(positions.size());
  for (std::size_t m = 0; m < positions.size(); ++m) {
    const std::uint64_t s = positions[m];
    if (s < 1 || s > n) throw std::invalid_argument("sample position " + std::to_string(s) + " out of range");
    if (!seen.insert(s).second) throw std::invalid_argument("duplicate sample position " + std::to_string(s));
    points_.push_back({s, linear_to_multi(s, order), values[m]});
  }
}

SampleSet SampleSet::from_vector(const QuantizedVector& data, std::span<const std::uint64_t> positions) {
  std::vector<double> values;
  values.reserve(positions.size());
  for (auto s : positions) values.push_back(data.at(s));
  return SampleSet(data.order(), positions, values);
}

SampleSet SampleSet::from_function(int order, std::span<const std::uint64_t> positions,
                                   const std::function<double(std::uint64_t)>& f) {
  std::vector<double> values;
  values.reserve(positions.size());
  for (auto s : positions) values.push_back(f(s));
  return SampleSet(order, positions, values);
}

std::vector<std::uint64_t> sample_points(SamplingStrategy strategy, std::uint64_t count, int order,
                                         std::uint64_t seed) {
  if (order < 1 || order > kMaxOrder) throw std::invalid_argument("order out of range");
  const std::uint64_t n = std::uint64_t{1} << order;
  if (count < 1 || count > n) {
    throw std::invalid_argument("sample count " + std::to_string(count) + " must be in [1, 2^" +
                                std::to_string(order) + "]");
  }
  std::mt19937_64 gen(seed);
  std::vector<std::uint64_t> out;
  out.reserve(count);
  if (strategy == SamplingStrategy::Stratified) {
    for (std::uint64_t b = 0; b < count; ++b) {
      const std::uint64_t lo = b * n / count;
      const std::uint64_t hi = (b + 1) * n / count;  // exclusive, hi > lo since count <= n
      std::uniform_int_distribution<std::uint64_t> pick(lo, hi - 1);
      out.push_back(pick(gen) + 1);
    }
    return out;
  }
  // Floyd's algorithm: count distinct draws from [1, n].
  std::unordered_set<std::uint64_t> chosen;
  chosen.reserve(count);
  for (std::uint64_t j = n - count + 1; j <= n; ++j) {
    std::uniform_int_distribution<std::uint64_t> pick(1, j);
    const std::uint64_t t = pick(gen);
    chosen.insert(chosen.contains(t) ? j : t);
  }
  out.assign(chosen.begin(), chosen.end());
  std::sort(out.begin(), out.end());
  return out;
}

ModePartition partition_samples(const SampleSet& samples, int mode) {
  if (mode < 1 || mode > samples.order()) throw std::out_of_range("mode out of range");
  ModePartition part;
  for (std::size_t m = 0; m < samples.size(); ++m) {
    (samples[m].index.digit(mode) == 1 ? part.digit1 : part.digit2).push_back(m);
  }
  return part;
}

ReducedDesign build_reduced_design(const CpModel& model, const SampleSet& samples, int mode) {
  if (model.order() != samples.order()) throw std::invalid_argument("model and samples differ in order");
  const std::size_t r = model.rank();
  ReducedDesign out;
  out.partition = partition_samples(samples, mode);
  auto fill = [&](const std::vector<std::size_t>& rows, Matrix& design, std::vector<double>& rhs) {
    design = Matrix(rows.size(), r);
    rhs.resize(rows.size());
    for (std::size_t p = 0; p < rows.size(); ++p) {
      const auto& point = samples[rows[p]];
      for (std::size_t k = 0; k < r; ++k) {
        double prod = 1.0;
        for (int m = 1; m <= model.order(); ++m) {
          if (m == mode) continue;
          prod *= model.factor(m)(static_cast<std::size_t>(point.index.digit(m) - 1), k);
        }
        design(p, k) = prod;
      }
      rhs[p] = point.value;
    }
  };
  fill(out.partition.digit1, out.design1, out.rhs1);
  fill(out.partition.digit2, out.design2, out.rhs2);
  return out;
}

double sampled_objective(const CpModel& model, const SampleSet& samples) {
  double sum = 0.0;
  for (const auto& point : samples.points()) {
    const double d = point.value - eval_entry(model, point.index);
    sum += d * d;
  }
  return 0.5 * sum;
}

namespace {

// Sparse ALS state. Design rows are formed as prefix * suffix products: the
// suffix over modes above the current one is computed from the factors at the
// start of the sweep, the prefix accumulates the freshly updated modes.
class SparseAls {
 public:
  SparseAls(const SampleSet& samples, const AlsConfig& cfg, std::vector<FactorMatrix> factors)
      : cfg_(cfg),
        factors_(std::move(factors)),
        order_(samples.order()),
        count_(samples.size()),
        rank_(cfg.rank) {
    bits_.reserve(count_);
    values_.reserve(count_);
    for (const auto& p : samples.points()) {
      bits_.push_back(p.linear_index - 1);
      values_.push_back(p.value);
    }
    suffix_.assign(static_cast<std::size_t>(order_) * count_ * rank_, 1.0);
    prefix_.assign(count_ * rank_, 1.0);
  }

  bool sweep(SparseReport& report, int& warnings) {
    OpCounter counter;
    const std::size_t r = rank_;
    const std::size_t plane = count_ * r;
    // suffix_[i] = product over modes > i (0-based), suffix_[L-1] = 1.
    std::fill(suffix_.begin() + static_cast<std::ptrdiff_t>((order_ - 1) * plane), suffix_.end(), 1.0);
    for (int i = order_ - 2; i >= 0; --i) {
      const FactorMatrix& above = factors_[static_cast<std::size_t>(i + 1)];
      const double* src = suffix_.data() + static_cast<std::size_t>(i + 1) * plane;
      double* dst = suffix_.data() + static_cast<std::size_t>(i) * plane;
      for (std::size_t p = 0; p < count_; ++p) {
        const std::size_t d = (bits_[p] >> (i + 1)) & 1U;
        for (std::size_t k = 0; k < r; ++k) dst[p * r + k] = src[p * r + k] * above(d, k);
      }
    }
    counter.add(static_cast<std::uint64_t>(order_ - 1) * plane);
    std::fill(prefix_.begin(), prefix_.end(), 1.0);

    bool ok = true;
    for (int i = 0; i < order_ && ok; ++i) {
      ok = update_mode(i, report, warnings, counter);
      if (!ok) break;
      const FactorMatrix& updated = factors_[static_cast<std::size_t>(i)];
      for (std::size_t p = 0; p < count_; ++p) {
        const std::size_t d = (bits_[p] >> i) & 1U;
        for (std::size_t k = 0; k < r; ++k) prefix_[p * r + k] *= updated(d, k);
      }
      counter.add(plane);
    }
    report.flops += counter.flops;
    return ok;
  }

  std::vector<FactorMatrix>& factors() { return factors_; }

 private:
  bool update_mode(int i, SparseReport& report, int& warnings, OpCounter& counter) {
    const std::size_t r = rank_;
    const std::size_t plane = count_ * r;
    const double* suffix = suffix_.data() + static_cast<std::size_t>(i) * plane;

    Matrix gram[2] = {Matrix(r, r), Matrix(r, r)};
    std::vector<double> rhs[2] = {std::vector<double>(r, 0.0), std::vector<double>(r, 0.0)};
    std::size_t rows[2] = {0, 0};
    row_.resize(r);
    for (std::size_t p = 0; p < count_; ++p) {
      const std::size_t d = (bits_[p] >> i) & 1U;
      for (std::size_t k = 0; k < r; ++k) row_[k] = prefix_[p * r + k] * suffix[p * r + k];
      Matrix& g = gram[d];
      for (std::size_t a = 0; a < r; ++a) {
        for (std::size_t b = a; b < r; ++b) g(a, b) += row_[a] * row_[b];
        rhs[d][a] += row_[a] * values_[p];
      }
      ++rows[d];
    }
    counter.add(plane + count_ * (r * (r + 1) + 2 * r));

    const bool pinned = cfg_.normalized && i + 1 < order_;
    FactorMatrix& target = factors_[static_cast<std::size_t>(i)];
    for (std::size_t d = pinned ? 1 : 0; d < 2; ++d) {
      if (rows[d] == 0) {
        ++report.skipped_rows;
        continue;
      }
      if (rows[d] < r) ++report.underdetermined_rows;
      Matrix& g = gram[d];
      for (std::size_t a = 0; a < r; ++a)
        for (std::size_t b = 0; b < a; ++b) g(a, b) = g(b, a);
      ++report.gram_builds;
      SpdFactorization chol(g, cfg_.policy(), &counter);
      ++report.factorizations;
      warnings += chol.escalations();
      if (!chol.ok()) return false;
      const auto x = chol.solve(rhs[d], &counter);
      ++report.solves;
      std::copy(x.begin(), x.end(), target.row(d).begin());
    }
    return true;
  }

  const AlsConfig& cfg_;
  std::vector<FactorMatrix> factors_;
  int order_;
  std::size_t count_;
  std::size_t rank_;
  std::vector<std::uint64_t> bits_;
  std::vector<double> values_;
  std::vector<double> suffix_;
  std::vector<double> prefix_;
  std::vector<double> row_;
};

double max_change(std::span<const FactorMatrix> now, std::span<const FactorMatrix> before) {
  double change = 0.0;
  for (std::size_t m = 0; m < now.size(); ++m) {
    const auto a = now[m].data();
    const auto c = before[m].data();
    for (std::size_t e = 0; e < a.size(); ++e) change = std::max(change, std::abs(a[e] - c[e]));
  }
  return change;
}

double sampled_max_residual(const CpModel& model, const SampleSet& samples) {
  double worst = 0.0;
  for (const auto& point : samples.points()) {
    worst = std::max(worst, std::abs(point.value - eval_entry(model, point.index)));
  }
  return worst;
}

}  // namespace

SparseResult als_sparse_fit_from(const SampleSet& samples, const CpModel& init, const AlsConfig& cfg,
                                 const QuantizedVector* reference) {
  cfg.validate();
  if (init.order() != samples.order()) throw std::invalid_argument("initial model order does not match samples");
  if (init.rank() != cfg.rank) throw std::invalid_argument("initial model rank does not match config");
  if (reference && reference->order() != samples.order()) {
    throw std::invalid_argument("reference vector order does not match samples");
  }
  const bool normalized = cfg.normalized && samples.order() > 1;
  if (normalized && !satisfies_normalization(init.factors())) {
    throw std::invalid_argument("normalized fit needs a normalized initial model");
  }
  const Format format = normalized ? Format::Normalized : Format::Free;

  SparseReport report;
  SparseAls als(samples, cfg, std::vector<FactorMatrix>(init.factors().begin(), init.factors().end()));
  report.objective.push_back(sampled_objective(init, samples));

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
    report.iterations = iter;
    report.final_change = max_change(als.factors(), before);
    report.objective.push_back(sampled_objective(CpModel(als.factors(), format), samples));
    if (report.final_change < cfg.tolerance) {
      report.converged = true;
      break;
    }
  }

  CpModel model(std::move(als.factors()), format);
  report.sampled_objective = sampled_objective(model, samples);
  report.sampled_max_residual = sampled_max_residual(model, samples);
  if (reference) report.full_grid_error = max_error(model, *reference);
  report.max_error = report.full_grid_error.value_or(report.sampled_max_residual);
  if (!std::isfinite(report.max_error)) report.solver_failed = true;
  return {std::move(model), std::move(report)};
}

SparseResult als_sparse_fit(const SampleSet& samples, const AlsConfig& cfg, const QuantizedVector* reference) {
  cfg.validate();
  const bool all_zero = std::all_of(samples.points().begin(), samples.points().end(),
                                    [](const SamplePoint& p) { return p.value == 0.0; });
  if (all_zero) {
    SparseResult result{CpModel::zeros(samples.order(), cfg.rank), {}};
    result.report.objective.push_back(0.0);
    result.report.converged = true;
    result.report.seed = cfg.seed;
    if (reference) result.report.full_grid_error = max_error(result.model, *reference);
    result.report.max_error = result.report.full_grid_error.value_or(0.0);
    return result;
  }

  std::vector<std::optional<SparseResult>> runs(static_cast<std::size_t>(cfg.restarts));
  const int threads = cfg.threads > 0 ? cfg.threads : default_thread_count();
  detail::parallel_for(cfg.restarts, threads, [&](int j) {
    const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(j);
    auto init = random_init(samples.order(), cfg.rank, seed, cfg.normalized);
    auto run = als_sparse_fit_from(samples, init, cfg, reference);
    run.report.seed = seed;
    run.report.restart = j;
    runs[static_cast<std::size_t>(j)] = std::move(run);
  });

  auto score = [&](std::size_t j) {
    const auto& rep = runs[j]->report;
    const double e = rep.full_grid_error ? *rep.full_grid_error : rep.sampled_objective;
    return std::isfinite(e) ? e : std::numeric_limits<double>::infinity();
  };
  std::size_t best = 0;
  for (std::size_t j = 1; j < runs.size(); ++j) {
    if (score(j) < score(best)) best = j;
  }
  return std::move(*runs[best]);
}

}  // namespace qcp
