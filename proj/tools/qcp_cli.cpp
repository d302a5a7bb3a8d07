// qcp: compress function samples into quantized canonical (QCP) models.
//
//   qcp fit     --function gaussian:1 -L 15 -r 5 --normalized
//   qcp interp  --function gaussian:50 --interval 0 0.25 -L 12 -r 8 -M 384
//   qcp table   1 --out table1.csv
//   qcp scaling

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qcp/experiments.hpp"

namespace {

struct CommonArgs {
  std::string function = "gaussian:1";
  std::vector<double> interval{0.0, 1.0};
  int order = 15;
  std::size_t rank = 1;
  double tolerance = 1e-8;
  int max_iterations = 1000;
  int restarts = 5;
  std::uint64_t seed = 1;
  bool normalized = false;
  bool balance = false;
  std::string out;
  std::string model_out;
};

void add_fit_options(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--function", args.function, "kind:parameter, kind in exp_decay|gaussian|sine|monomial")
      ->capture_default_str();
  cmd->add_option("--interval", args.interval, "interval endpoints a b")->expected(2)->capture_default_str();
  cmd->add_option("-L,--order", args.order, "number of binary modes (grid has 2^L points)")
      ->check(CLI::Range(1, qcp::kMaxOrder))
      ->capture_default_str();
  cmd->add_option("-r,--rank", args.rank, "CP rank")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--tol", args.tolerance, "stop when the largest factor change is below this")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--maxiter", args.max_iterations, "maximum ALS sweeps")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--restarts", args.restarts, "random restarts")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--seed", args.seed, "RNG seed")->capture_default_str();
  cmd->add_flag("--normalized", args.normalized, "pin row 1 of modes 1..L-1 to ones");
  cmd->add_flag("--balance", args.balance, "rebalance column scales after each sweep");
  cmd->add_option("--out", args.out, "CSV output path (default stdout)");
  cmd->add_option("--model-out", args.model_out, "write the fitted model to this file");
}

qcp::FunctionSpec make_spec(const CommonArgs& args) {
  auto spec = qcp::parse_function(args.function);
  spec.a = args.interval.at(0);
  spec.b = args.interval.at(1);
  spec.order = args.order;
  spec.validate();
  return spec;
}

qcp::AlsConfig make_config(const CommonArgs& args) {
  qcp::AlsConfig cfg;
  cfg.rank = args.rank;
  cfg.tolerance = args.tolerance;
  cfg.max_iterations = args.max_iterations;
  cfg.restarts = args.restarts;
  cfg.seed = args.seed;
  cfg.normalized = args.normalized;
  cfg.balance_columns = args.balance;
  cfg.validate();
  return cfg;
}

void emit_rows(const std::string& path, const std::vector<qcp::ExperimentRow>& rows) {
  if (path.empty()) {
    qcp::write_csv(std::cout, rows);
    return;
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path);
  qcp::write_csv(os, rows);
}

void print_summary(const std::vector<qcp::ExperimentRow>& rows) {
  for (const auto& row : rows) {
    std::fprintf(stderr, "%-24s L=%-2d r=%-2zu M=%-5llu error=%.6g iters=%d %.2fs%s%s\n", row.function.c_str(),
                 row.order, row.rank, static_cast<unsigned long long>(row.samples), row.error, row.iterations,
                 row.seconds, row.solver_failed ? " [solver failure]" : "",
                 row.extrapolated ? " [extrapolated: no published value]" : "");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantized canonical (QCP) approximation and sparse interpolation of function samples"};
  app.require_subcommand(1);

  CommonArgs fit_args;
  auto* fit = app.add_subcommand("fit", "full-data ALS fit of a sampled function");
  add_fit_options(fit, fit_args);

  CommonArgs interp_args;
  interp_args.order = 12;
  std::uint64_t samples = 0;
  std::string strategy = "uniform";
  auto* interp = app.add_subcommand("interp", "sparse interpolation from M sampled grid points");
  add_fit_options(interp, interp_args);
  interp->add_option("-M,--samples", samples, "number of sampled points (default 4 L r)");
  interp->add_option("--strategy", strategy, "sampling strategy")
      ->check(CLI::IsMember({"uniform", "stratified"}))
      ->capture_default_str();

  int table_id = 1;
  qcp::TableOptions table_opts;
  int table_order = 0;
  std::size_t table_rank = 0;
  int table_restarts = 0;
  double table_tol = 0.0;
  int table_maxiter = 0;
  std::string table_out;
  std::string table_models;
  std::string table_strategy = "uniform";
  auto* table = app.add_subcommand("table", "reproduce one of the error-vs-rank tables (1-4)");
  table->add_option("id", table_id, "table number")->required()->check(CLI::Range(1, 4));
  table->add_option("-L,--order", table_order, "override the grid order");
  table->add_option("-r,--rank", table_rank, "largest rank to run");
  table->add_option("--restarts", table_restarts, "random restarts per cell");
  table->add_option("--tol", table_tol, "ALS tolerance")->check(CLI::PositiveNumber);
  table->add_option("--maxiter", table_maxiter, "maximum ALS sweeps")->check(CLI::PositiveNumber);
  table->add_option("--seed", table_opts.seed, "RNG seed")->capture_default_str();
  table->add_option("--strategy", table_strategy, "sampling strategy for table 4")
      ->check(CLI::IsMember({"uniform", "stratified"}));
  table->add_option("--out", table_out, "CSV output path (default stdout)");
  table->add_option("--model-out", table_models, "write a JSON array of fitted models");

  qcp::ScalingOptions scaling_opts;
  auto* scaling = app.add_subcommand("scaling", "per-sweep cost of full and sparse ALS");
  scaling->add_option("--min-L", scaling_opts.min_order, "smallest order")->capture_default_str();
  scaling->add_option("--max-L", scaling_opts.max_order, "largest order")->capture_default_str();
  scaling->add_option("-r,--rank", scaling_opts.rank, "rank for full ALS timings")->capture_default_str();
  scaling->add_option("--sweeps", scaling_opts.sweeps, "sweeps per timing")->capture_default_str();
  scaling->add_option("--reps", scaling_opts.repetitions, "timing repetitions")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*fit) {
      const auto spec = make_spec(fit_args);
      const auto cfg = make_config(fit_args);
      qcp::CpModel model;
      auto row = qcp::run_full_fit(spec, cfg, &model);
      print_summary({row});
      emit_rows(fit_args.out, {row});
      if (!fit_args.model_out.empty()) qcp::save_model(fit_args.model_out, model);
      return row.solver_failed ? 2 : 0;
    }
    if (*interp) {
      const auto spec = make_spec(interp_args);
      const auto cfg = make_config(interp_args);
      const std::uint64_t m = samples ? samples : 4 * static_cast<std::uint64_t>(spec.order) * cfg.rank;
      const auto strat = strategy == "stratified" ? qcp::SamplingStrategy::Stratified
                                                  : qcp::SamplingStrategy::UniformRandom;
      qcp::CpModel model;
      auto row = qcp::run_sparse_fit(spec, m, strat, cfg, &model);
      print_summary({row});
      emit_rows(interp_args.out, {row});
      if (!interp_args.model_out.empty()) qcp::save_model(interp_args.model_out, model);
      return row.solver_failed ? 2 : 0;
    }
    if (*table) {
      if (table_order > 0) table_opts.order = table_order;
      if (table_rank > 0) table_opts.max_rank = table_rank;
      if (table_restarts > 0) table_opts.restarts = table_restarts;
      if (table_tol > 0) table_opts.tolerance = table_tol;
      if (table_maxiter > 0) table_opts.max_iterations = table_maxiter;
      table_opts.keep_models = !table_models.empty();
      table_opts.strategy = table_strategy == "stratified" ? qcp::SamplingStrategy::Stratified
                                                           : qcp::SamplingStrategy::UniformRandom;
      const auto rows = qcp::run_table(table_id, table_opts);
      print_summary(rows);
      emit_rows(table_out, rows);
      if (!table_models.empty()) {
        std::ofstream os(table_models);
        if (!os) throw std::runtime_error("cannot open " + table_models);
        os << qcp::rows_to_json(rows) << '\n';
      }
      return 0;
    }
    if (*scaling) {
      const auto report = qcp::scaling_probe(scaling_opts);
      std::printf("kind,L,r,M,seconds_per_sweep,flops_per_sweep\n");
      for (const auto& p : report.full) {
        std::printf("full,%d,%zu,0,%.6g,%.6g\n", p.order, p.rank, p.seconds_per_sweep, p.flops_per_sweep);
      }
      for (const auto& p : report.sparse) {
        std::printf("sparse,%d,%zu,%llu,%.6g,%.6g\n", p.order, p.rank, static_cast<unsigned long long>(p.samples),
                    p.seconds_per_sweep, p.flops_per_sweep);
      }
      for (std::size_t i = 0; i < report.full_time_ratios.size(); ++i) {
        std::fprintf(stderr, "full ALS time ratio L=%d -> %d: %.3f\n", report.full[i].order,
                     report.full[i + 1].order, report.full_time_ratios[i]);
      }
      std::fprintf(stderr, "sparse ALS flop ratio M -> 2M: %.3f\n", report.sparse_sample_ratio);
      std::fprintf(stderr, "sparse ALS flop ratio r -> 2r: %.3f\n", report.sparse_rank_ratio);
      return 0;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "qcp: %s\n", e.what());
    return 1;
  }
  return 0;
}
