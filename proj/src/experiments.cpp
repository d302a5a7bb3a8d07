#include "qcp/experiments.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "parallel.hpp"

namespace qcp {

void FunctionSpec::validate() const {
  if (!std::isfinite(parameter) || !std::isfinite(a) || !std::isfinite(b)) {
    throw std::invalid_argument("function parameters must be finite");
  }
  if (!(b > a)) throw std::invalid_argument("interval must satisfy b > a");
  if (order < 1 || order > kMaxOrder) throw std::invalid_argument("order out of range");
}

double FunctionSpec::operator()(double x) const {
  switch (kind) {
    case FunctionKind::ExpDecay: return std::exp(-parameter * x);
    case FunctionKind::Gaussian: return std::exp(-parameter * x * x);
    case FunctionKind::Sine: return std::sin(parameter * std::numbers::pi * x);
    case FunctionKind::Monomial: return std::pow(x, parameter);
  }
  return std::numeric_limits<double>::quiet_NaN();
}

double FunctionSpec::node(std::uint64_t linear_index) const {
  const double h = (b - a) / static_cast<double>((std::uint64_t{1} << order) - 1);
  return a + static_cast<double>(linear_index - 1) * h;
}

std::string FunctionSpec::label() const {
  const char* name = "";
  switch (kind) {
    case FunctionKind::ExpDecay: name = "exp_decay"; break;
    case FunctionKind::Gaussian: name = "gaussian"; break;
    case FunctionKind::Sine: name = "sine"; break;
    case FunctionKind::Monomial: name = "monomial"; break;
  }
  std::ostringstream os;
  os << name << ':' << parameter << '[' << a << ';' << b << ']';
  return os.str();
}

FunctionSpec parse_function(const std::string& text) {
  const auto colon = text.find(':');
  const std::string name = text.substr(0, colon);
  FunctionSpec spec;
  if (name == "exp_decay" || name == "exp") {
    spec.kind = FunctionKind::ExpDecay;
  } else if (name == "gaussian" || name == "gauss") {
    spec.kind = FunctionKind::Gaussian;
  } else if (name == "sine" || name == "sin") {
    spec.kind = FunctionKind::Sine;
  } else if (name == "monomial" || name == "mono") {
    spec.kind = FunctionKind::Monomial;
  } else {
    throw std::invalid_argument("unknown function '" + name + "'");
  }
  if (colon != std::string::npos) {
    const std::string param = text.substr(colon + 1);
    std::size_t used = 0;
    try {
      spec.parameter = std::stod(param, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != param.size()) {
      throw std::invalid_argument("bad function parameter '" + param + "'");
    }
  }
  return spec;
}

QuantizedVector generate_samples(const FunctionSpec& spec) {
  spec.validate();
  const std::size_t n = std::size_t{1} << spec.order;
  std::vector<double> values(n);
  for (std::size_t k = 0; k < n; ++k) values[k] = spec(spec.node(k + 1));
  return QuantizedVector(std::move(values), spec.order);
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  // splitmix64 finalizer over the combined inputs
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (a + 1) + 0xbf58476d1ce4e5b9ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

struct Cell {
  FunctionSpec spec;
  std::size_t rank = 1;
  std::uint64_t samples = 0;
  bool normalized = false;
  bool extrapolated = false;
};

}  // namespace

ExperimentRow run_full_fit(const FunctionSpec& spec, const AlsConfig& cfg, CpModel* model_out) {
  const auto data = generate_samples(spec);
  const auto start = Clock::now();
  auto fit = als_fit(data, cfg);
  ExperimentRow row;
  row.seconds = seconds_since(start);
  row.function = spec.label();
  row.order = spec.order;
  row.rank = cfg.rank;
  row.error = fit.report.max_error;
  row.iterations = fit.report.iterations;
  row.solver_failed = fit.report.solver_failed;
  if (model_out) *model_out = fit.model;
  return row;
}

ExperimentRow run_sparse_fit(const FunctionSpec& spec, std::uint64_t samples, SamplingStrategy strategy,
                             const AlsConfig& cfg, CpModel* model_out) {
  const auto data = generate_samples(spec);
  const auto positions = sample_points(strategy, samples, spec.order, mix_seed(cfg.seed, samples, cfg.rank));
  const auto set = SampleSet::from_vector(data, positions);
  const auto start = Clock::now();
  auto fit = als_sparse_fit(set, cfg, &data);
  ExperimentRow row;
  row.seconds = seconds_since(start);
  row.function = spec.label();
  row.order = spec.order;
  row.rank = cfg.rank;
  row.samples = samples;
  row.error = fit.report.full_grid_error.value_or(fit.report.max_error);
  row.iterations = fit.report.iterations;
  row.solver_failed = fit.report.solver_failed;
  if (model_out) *model_out = fit.model;
  return row;
}

std::vector<ExperimentRow> run_table(int table_id, const TableOptions& options) {
  std::vector<Cell> cells;
  auto spec = [](FunctionKind kind, double p, double a, double b, int order) {
    FunctionSpec s;
    s.kind = kind;
    s.parameter = p;
    s.a = a;
    s.b = b;
    s.order = order;
    return s;
  };

  int default_restarts = 5;
  switch (table_id) {
    case 1:
    case 2:
    case 3: {
      const int order = options.order.value_or(15);
      const std::size_t max_rank = options.max_rank.value_or(10);
      std::vector<FunctionSpec> functions;
      if (table_id == 1) {
        functions = {spec(FunctionKind::Gaussian, 1, 0, 1, order)};
      } else if (table_id == 2) {
        functions = {spec(FunctionKind::Sine, 1, 0, 1, order), spec(FunctionKind::Sine, 2, 0, 1, order),
                     spec(FunctionKind::Sine, 4, 0, 1, order)};
      } else {
        functions = {spec(FunctionKind::Monomial, 1, 0, 1, order), spec(FunctionKind::Monomial, 2, 0, 1, order)};
      }
      for (const auto& f : functions)
        for (std::size_t r = 1; r <= max_rank; ++r) cells.push_back({f, r, 0, true, false});
      break;
    }
    case 4: {
      default_restarts = 10;
      const int order = options.order.value_or(12);
      const std::size_t max_rank = options.max_rank.value_or(8);
      const auto l = static_cast<std::uint64_t>(order);
      const std::uint64_t n = std::uint64_t{1} << order;
      const auto gauss = spec(FunctionKind::Gaussian, 1, 0, 1, order);
      const auto sharp = spec(FunctionKind::Gaussian, 50, 0, 0.25, order);
      for (std::size_t r = 1; r <= max_rank; ++r) cells.push_back({gauss, r, std::min(n, 2 * l * r), false, false});
      for (std::size_t r = 1; r <= max_rank; ++r) cells.push_back({gauss, r, std::min(n, 4 * l * r), false, r > 6});
      for (std::size_t r = 1; r <= max_rank; ++r) cells.push_back({sharp, r, std::min(n, 4 * l * r), false, false});
      break;
    }
    default:
      throw std::invalid_argument("unknown table " + std::to_string(table_id) + " (expected 1-4)");
  }

  std::vector<ExperimentRow> rows(cells.size());
  const int threads = options.threads > 0 ? options.threads : default_thread_count();
  detail::parallel_for(static_cast<int>(cells.size()), threads, [&](int c) {
    const Cell& cell = cells[static_cast<std::size_t>(c)];
    AlsConfig cfg;
    cfg.rank = cell.rank;
    cfg.normalized = cell.normalized;
    cfg.restarts = options.restarts.value_or(default_restarts);
    cfg.seed = options.seed;
    cfg.threads = 1;
    if (options.tolerance) cfg.tolerance = *options.tolerance;
    if (options.max_iterations) cfg.max_iterations = *options.max_iterations;
    CpModel model;
    ExperimentRow row;
    try {
      row = cell.samples == 0 ? run_full_fit(cell.spec, cfg, &model)
                              : run_sparse_fit(cell.spec, cell.samples, options.strategy, cfg, &model);
      if (options.keep_models) row.model = std::move(model);
    } catch (const std::exception&) {
      row.function = cell.spec.label();
      row.order = cell.spec.order;
      row.rank = cell.rank;
      row.samples = cell.samples;
      row.error = std::numeric_limits<double>::quiet_NaN();
      row.solver_failed = true;
    }
    row.extrapolated = cell.extrapolated;
    rows[static_cast<std::size_t>(c)] = std::move(row);
  });
  return rows;
}

void write_csv(std::ostream& os, const std::vector<ExperimentRow>& rows) {
  os << "function,L,r,M,error,iters,seconds\n";
  char buf[64];
  for (const auto& row : rows) {
    os << row.function << ',' << row.order << ',' << row.rank << ',' << row.samples << ',';
    std::snprintf(buf, sizeof buf, "%.12g", row.error);
    os << buf << ',' << row.iterations << ',';
    std::snprintf(buf, sizeof buf, "%.3f", row.seconds);
    os << buf << '\n';
  }
}

std::string rows_to_json(const std::vector<ExperimentRow>& rows) {
  auto out = nlohmann::json::array();
  for (const auto& row : rows) {
    if (!row.model) continue;
    out.push_back({{"function", row.function},
                   {"L", row.order},
                   {"r", row.rank},
                   {"M", row.samples},
                   {"error", row.error},
                   {"extrapolated", row.extrapolated},
                   {"model", nlohmann::json::parse(model_to_json(*row.model))}});
  }
  return out.dump(1);
}

ScalingReport scaling_probe(const ScalingOptions& options) {
  ScalingReport report;
  AlsConfig cfg;
  cfg.rank = options.rank;
  cfg.max_iterations = options.sweeps;
  cfg.tolerance = std::numeric_limits<double>::min();
  cfg.restarts = 1;

  for (int order = options.min_order; order <= options.max_order; ++order) {
    FunctionSpec f;
    f.kind = FunctionKind::Gaussian;
    f.order = order;
    const auto data = generate_samples(f);
    const auto init = random_init(order, cfg.rank, 7);
    ScalingPoint point{order, cfg.rank, 0, std::numeric_limits<double>::infinity(), 0.0};
    for (int rep = 0; rep < options.repetitions; ++rep) {
      const auto start = Clock::now();
      const auto fit = als_fit_from(data, init, cfg);
      const double t = seconds_since(start);
      const int sweeps = std::max(fit.report.iterations, 1);
      point.seconds_per_sweep = std::min(point.seconds_per_sweep, t / sweeps);
      point.flops_per_sweep = static_cast<double>(fit.report.flops) / sweeps;
    }
    report.full.push_back(point);
  }
  for (std::size_t i = 1; i < report.full.size(); ++i) {
    report.full_time_ratios.push_back(report.full[i].seconds_per_sweep / report.full[i - 1].seconds_per_sweep);
  }

  FunctionSpec g;
  g.kind = FunctionKind::Gaussian;
  g.order = options.sparse_order;
  const auto data = generate_samples(g);
  const std::uint64_t n = std::uint64_t{1} << g.order;
  auto sparse_point = [&](std::size_t rank, std::uint64_t samples) {
    AlsConfig sc = cfg;
    sc.rank = rank;
    const auto positions = sample_points(SamplingStrategy::UniformRandom, samples, g.order, 11);
    const auto set = SampleSet::from_vector(data, positions);
    const auto start = Clock::now();
    const auto fit = als_sparse_fit_from(set, random_init(g.order, rank, 7), sc);
    const int sweeps = std::max(fit.report.iterations, 1);
    return ScalingPoint{g.order, rank, samples, seconds_since(start) / sweeps,
                        static_cast<double>(fit.report.flops) / sweeps};
  };
  const std::size_t r = options.sparse_rank;
  const std::uint64_t m = options.sparse_samples ? options.sparse_samples
                                                 : 2 * static_cast<std::uint64_t>(g.order) * r;
  report.sparse.push_back(sparse_point(r, std::min(n, m)));
  report.sparse.push_back(sparse_point(r, std::min(n, 2 * m)));
  report.sparse.push_back(sparse_point(2 * r, std::min(n, m)));
  report.sparse_sample_ratio = report.sparse[1].flops_per_sweep / report.sparse[0].flops_per_sweep;
  report.sparse_rank_ratio = report.sparse[2].flops_per_sweep / report.sparse[0].flops_per_sweep;
  return report;
}

}  // namespace qcp
