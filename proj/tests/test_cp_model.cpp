#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "oracles.hpp"
#include "qcp/cp_model.hpp"

using qcp::CpModel;
using qcp::FactorMatrix;

namespace {

CpModel random_model(std::mt19937_64& gen, int order, std::size_t rank) {
  std::vector<FactorMatrix> factors;
  for (int m = 0; m < order; ++m) factors.push_back(qcp::oracle::random_factor(gen, rank));
  return CpModel(std::move(factors));
}

std::vector<double> kron(const std::vector<double>& b, const std::vector<double>& c) {
  std::vector<double> out;
  for (double x : b)
    for (double y : c) out.push_back(x * y);
  return out;
}

}  // namespace

TEST_CASE("eval_entry of the rank-1 exponential model is a geometric sequence") {
  const auto model = qcp::exp_rank1_model(1.0, 0.0, 1.0, 4);
  const double q = std::exp(-1.0 / 15.0);
  for (std::uint64_t i = 1; i <= 16; ++i) {
    CHECK(qcp::eval_linear(model, i) == doctest::Approx(std::pow(q, static_cast<double>(i - 1))).epsilon(1e-14));
  }
  CHECK_THROWS_AS(qcp::eval_entry(model, qcp::MultiIndex({1, 2})), std::invalid_argument);
}

TEST_CASE("all-ones rank-1 model evaluates to one everywhere") {
  const CpModel ones(std::vector<FactorMatrix>(6, FactorMatrix(1, {1.0, 1.0})));
  for (std::uint64_t i = 1; i <= 64; ++i) CHECK(qcp::eval_linear(ones, i) == 1.0);
}

TEST_CASE("exp_rank1_model factors") {
  const auto model = qcp::exp_rank1_model(1.0, 0.0, 1.0, 4);
  const double q = std::exp(-1.0 / 15.0);
  REQUIRE(model.order() == 4);
  REQUIRE(model.rank() == 1);
  for (int p = 1; p <= 4; ++p) {
    CHECK(model.factor(p)(0, 0) == 1.0);
    CHECK(model.factor(p)(1, 0) == doctest::Approx(std::pow(q, std::pow(2.0, p - 1))).epsilon(1e-15));
  }
  const auto flat = qcp::reconstruct(qcp::exp_rank1_model(0.0, 0.0, 1.0, 5));
  for (double v : flat.values()) CHECK(v == 1.0);
  CHECK_THROWS_AS(qcp::exp_rank1_model(1.0, 1.0, 1.0, 4), std::invalid_argument);
}

TEST_CASE("exp_rank1_model reproduces direct exponentiation on the grid") {
  const int order = 10;
  const auto values = qcp::reconstruct(qcp::exp_rank1_model(2.0, 0.0, 1.0, order));
  const double h = 1.0 / static_cast<double>((1 << order) - 1);
  for (std::size_t k = 0; k < values.size(); ++k) {
    const double want = std::exp(-2.0 * static_cast<double>(k) * h);
    REQUIRE(std::abs(values[k] - want) <= 1e-14 * want);
  }
}

TEST_CASE("reconstruct of the exponential model at L=4") {
  const auto v = qcp::reconstruct(qcp::exp_rank1_model(1.0, 0.0, 1.0, 4));
  const double q = std::exp(-1.0 / 15.0);
  REQUIRE(v.size() == 16);
  for (std::size_t k = 0; k < 16; ++k) CHECK(v[k] == doctest::Approx(std::pow(q, static_cast<double>(k))).epsilon(1e-14));
}

TEST_CASE("reconstruct of a model with a zero column factor is zero") {
  std::mt19937_64 gen(1);
  auto model = random_model(gen, 5, 1);
  model.factor(3) = FactorMatrix(1, {0.0, 0.0});
  const auto v = qcp::reconstruct(model);
  for (double x : v.values()) CHECK(x == 0.0);
}

TEST_CASE("reconstruct equals explicit sum of 4-fold Kronecker products") {
  std::mt19937_64 gen(42);
  const auto model = random_model(gen, 4, 2);
  std::vector<double> expected(16, 0.0);
  for (std::size_t k = 0; k < 2; ++k) {
    auto col = [&](int mode) { return std::vector<double>{model.factor(mode)(0, k), model.factor(mode)(1, k)}; };
    // Mode 1 varies fastest, so it is the innermost Kronecker factor.
    const auto term = kron(kron(kron(col(4), col(3)), col(2)), col(1));
    for (std::size_t i = 0; i < 16; ++i) expected[i] += term[i];
  }
  const auto got = qcp::reconstruct(model);
  for (std::size_t i = 0; i < 16; ++i) CHECK(got[i] == doctest::Approx(expected[i]).epsilon(1e-14));
}

TEST_CASE("reconstruct is bit-identical to eval_entry, including across blocks") {
  std::mt19937_64 gen(7);
  for (int order : {1, 4, 13, 14}) {
    const auto model = random_model(gen, order, 3);
    const auto full = qcp::reconstruct(model);
    for (std::uint64_t i = 1; i <= full.size(); i += (order > 12 ? 37 : 1)) {
      REQUIRE(full.at(i) == qcp::eval_linear(model, i));
    }
    REQUIRE(full.at(full.size()) == qcp::eval_linear(model, full.size()));
  }
}

TEST_CASE("permuting rank terms leaves the reconstruction unchanged") {
  std::mt19937_64 gen(3);
  const auto model = random_model(gen, 8, 4);
  const std::vector<std::size_t> perm{2, 0, 3, 1};
  std::vector<FactorMatrix> permuted;
  for (const auto& f : model.factors()) {
    FactorMatrix g(4);
    for (std::size_t k = 0; k < 4; ++k) {
      g(0, k) = f(0, perm[k]);
      g(1, k) = f(1, perm[k]);
    }
    permuted.push_back(g);
  }
  const auto a = qcp::reconstruct(model);
  const auto b = qcp::reconstruct(CpModel(permuted));
  for (std::size_t i = 0; i < a.size(); ++i) REQUIRE(std::abs(a[i] - b[i]) <= 1e-14);
}

TEST_CASE("max_error and Frobenius norm") {
  std::mt19937_64 gen(11);
  const auto model = random_model(gen, 6, 2);
  auto data = qcp::reconstruct(model);
  CHECK(qcp::max_error(model, data) <= 1e-14);

  const auto exact = qcp::exp_rank1_model(1.0, 0.0, 1.0, 12);
  std::vector<double> samples(4096);
  const double h = 1.0 / 4095.0;
  for (std::size_t k = 0; k < samples.size(); ++k) samples[k] = std::exp(-static_cast<double>(k) * h);
  CHECK(qcp::max_error(exact, qcp::QuantizedVector(samples, 12)) <= 1e-14);

  const double delta = 0.125;
  data.mutable_values()[17] += delta;
  CHECK(qcp::max_error(model, data) == doctest::Approx(delta).epsilon(1e-12));

  const auto full = qcp::reconstruct(model);
  double sumsq = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) sumsq += (full[i] - data[i]) * (full[i] - data[i]);
  CHECK(qcp::error_norms(model, data).frobenius == doctest::Approx(std::sqrt(sumsq)).epsilon(1e-14));

  CHECK_THROWS_AS(qcp::max_error(model, qcp::QuantizedVector(std::vector<double>(8), 3)), std::invalid_argument);
}

TEST_CASE("model construction invariants") {
  CHECK_THROWS_AS(CpModel(std::vector<FactorMatrix>{}), std::invalid_argument);
  CHECK_THROWS_AS(CpModel({FactorMatrix(2), FactorMatrix(3)}), std::invalid_argument);
  CHECK_THROWS_AS(FactorMatrix(0), std::invalid_argument);
  CHECK_THROWS_AS(FactorMatrix(1, {1.0, NAN}), std::invalid_argument);
  CHECK_THROWS_AS(CpModel({FactorMatrix(1, {2.0, 1.0}), FactorMatrix(1, {1.0, 1.0})}, qcp::Format::Normalized),
                  std::invalid_argument);
  const CpModel normalized({FactorMatrix(1, {1.0, 0.5}), FactorMatrix(1, {3.0, 1.0})}, qcp::Format::Normalized);
  CHECK(normalized.parameter_count() == 3);
  CHECK(CpModel::zeros(5, 2).parameter_count() == 20);
}

TEST_CASE("model file round trip") {
  std::mt19937_64 gen(5);
  const auto model = random_model(gen, 7, 3);
  std::stringstream ss;
  qcp::write_model(ss, model);
  std::string first;
  std::getline(ss, first);
  CHECK(first == "7 3");
  ss.seekg(0);
  const auto back = qcp::read_model(ss);
  REQUIRE(back.order() == 7);
  REQUIRE(back.rank() == 3);
  for (int m = 1; m <= 7; ++m) CHECK(back.factor(m) == model.factor(m));

  std::stringstream truncated("3 2\n1 2\n3 4\n");
  CHECK_THROWS_AS(qcp::read_model(truncated), std::runtime_error);
  std::stringstream bad("0 2\n");
  CHECK_THROWS_AS(qcp::read_model(bad), std::runtime_error);
}

TEST_CASE("model JSON dump") {
  const auto model = qcp::exp_rank1_model(1.0, 0.0, 1.0, 3);
  const auto j = nlohmann::json::parse(qcp::model_to_json(model));
  CHECK(j["order"] == 3);
  CHECK(j["rank"] == 1);
  REQUIRE(j["factors"].size() == 3);
  CHECK(j["factors"][0][0][0] == 1.0);
  CHECK(j["factors"][2][1][0].get<double>() == doctest::Approx(model.factor(3)(1, 0)));
}
