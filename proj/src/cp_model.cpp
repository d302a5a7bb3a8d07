#include "qcp/cp_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace qcp {

namespace {

constexpr int kBlockBits = 12;

}  // namespace

CpModel::CpModel(std::vector<FactorMatrix> factors, Format format)
    : factors_(std::move(factors)), format_(format) {
  if (factors_.empty()) throw std::invalid_argument("model needs at least one mode");
  if (factors_.size() > static_cast<std::size_t>(kMaxOrder)) throw std::invalid_argument("model order too large");
  const std::size_t r = factors_.front().rank();
  if (r == 0) throw std::invalid_argument("model rank must be >= 1");
  for (const auto& f : factors_) {
    if (f.rank() != r) throw std::invalid_argument("all factors must have the same rank");
  }
  if (format_ == Format::Normalized && !satisfies_normalization(factors_)) {
    throw std::invalid_argument("normalized model must have row 1 equal to one in modes 1..L-1");
  }
}

CpModel CpModel::zeros(int order, std::size_t rank) {
  if (order < 1) throw std::invalid_argument("order must be >= 1");
  return CpModel(std::vector<FactorMatrix>(static_cast<std::size_t>(order), FactorMatrix(rank)));
}

std::size_t CpModel::parameter_count() const noexcept {
  const auto l = factors_.size();
  return format_ == Format::Normalized ? (l + 1) * rank() : 2 * l * rank();
}

bool satisfies_normalization(std::span<const FactorMatrix> factors) {
  for (std::size_t m = 0; m + 1 < factors.size(); ++m) {
    for (double v : factors[m].row(0)) {
      if (v != 1.0) return false;
    }
  }
  return true;
}

double eval_entry(const CpModel& model, const MultiIndex& index) {
  if (index.order() != model.order()) {
    throw std::invalid_argument("multi-index order " + std::to_string(index.order()) +
                                " does not match model order " + std::to_string(model.order()));
  }
  const auto digits = index.digits();
  const auto factors = model.factors();
  double sum = 0.0;
  for (std::size_t k = 0; k < model.rank(); ++k) {
    double prod = factors[0](static_cast<std::size_t>(digits[0] - 1), k);
    for (std::size_t v = 1; v < factors.size(); ++v) {
      prod *= factors[v](static_cast<std::size_t>(digits[v] - 1), k);
    }
    sum += prod;
  }
  return sum;
}

double eval_linear(const CpModel& model, std::uint64_t linear_index) {
  return eval_entry(model, linear_to_multi(linear_index, model.order()));
}

void for_each_block(const CpModel& model,
                    const std::function<void(std::size_t, std::span<const double>)>& visit) {
  const int order = model.order();
  const std::size_t r = model.rank();
  const int low_bits = std::min(order, kBlockBits);
  const std::size_t block = std::size_t{1} << low_bits;
  const std::size_t blocks = std::size_t{1} << (order - low_bits);
  const auto factors = model.factors();

  // Products over the low modes for every rank term, built by doubling in
  // mode order so the multiplication sequence matches eval_entry.
  std::vector<double> low(r * block);
  for (std::size_t k = 0; k < r; ++k) {
    double* v = low.data() + k * block;
    v[0] = factors[0](0, k);
    v[1] = factors[0](1, k);
    for (int m = 1; m < low_bits; ++m) {
      const std::size_t len = std::size_t{1} << m;
      const double a0 = factors[static_cast<std::size_t>(m)](0, k);
      const double a1 = factors[static_cast<std::size_t>(m)](1, k);
      for (std::size_t j = 0; j < len; ++j) {
        v[j + len] = v[j] * a1;
        v[j] = v[j] * a0;
      }
    }
  }

  std::vector<double> out(block);
  std::vector<double> high(static_cast<std::size_t>(order - low_bits));
  for (std::size_t b = 0; b < blocks; ++b) {
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t k = 0; k < r; ++k) {
      for (std::size_t h = 0; h < high.size(); ++h) {
        const std::size_t mode = static_cast<std::size_t>(low_bits) + h;
        high[h] = factors[mode]((b >> h) & 1U, k);
      }
      const double* v = low.data() + k * block;
      for (std::size_t j = 0; j < block; ++j) {
        double prod = v[j];
        for (double c : high) prod *= c;
        out[j] += prod;
      }
    }
    visit(b * block, out);
  }
}

QuantizedVector reconstruct(const CpModel& model) {
  std::vector<double> values(std::size_t{1} << model.order());
  for_each_block(model, [&](std::size_t offset, std::span<const double> chunk) {
    std::copy(chunk.begin(), chunk.end(), values.begin() + static_cast<std::ptrdiff_t>(offset));
  });
  return QuantizedVector(std::move(values), model.order());
}

CpModel exp_rank1_model(double lambda, double a, double b, int order) {
  if (order < 1 || order > kMaxOrder) throw std::invalid_argument("order out of range");
  if (!(b > a)) throw std::invalid_argument("interval must satisfy b > a");
  const double h = (b - a) / static_cast<double>((std::uint64_t{1} << order) - 1);
  std::vector<FactorMatrix> factors;
  factors.reserve(static_cast<std::size_t>(order));
  for (int p = 0; p < order; ++p) {
    const double stride = static_cast<double>(std::uint64_t{1} << p);
    factors.emplace_back(1, std::vector<double>{1.0, std::exp(-lambda * h * stride)});
  }
  return CpModel(std::move(factors));
}

ErrorNorms error_norms(const CpModel& model, const QuantizedVector& data) {
  if (model.order() != data.order()) {
    throw std::invalid_argument("model order " + std::to_string(model.order()) +
                                " does not match data order " + std::to_string(data.order()));
  }
  const auto values = data.values();
  double max_abs = 0.0;
  double sumsq = 0.0;
  for_each_block(model, [&](std::size_t offset, std::span<const double> chunk) {
    for (std::size_t j = 0; j < chunk.size(); ++j) {
      const double d = chunk[j] - values[offset + j];
      max_abs = std::max(max_abs, std::abs(d));
      sumsq += d * d;
    }
  });
  return {max_abs, std::sqrt(sumsq)};
}

double max_error(const CpModel& model, const QuantizedVector& data) {
  return error_norms(model, data).max_abs;
}

void write_model(std::ostream& os, const CpModel& model) {
  os << model.order() << ' ' << model.rank() << '\n';
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const auto& f : model.factors()) {
    for (std::size_t row = 0; row < 2; ++row) {
      for (std::size_t k = 0; k < f.rank(); ++k) {
        if (k) os << ' ';
        os << f(row, k);
      }
      os << '\n';
    }
  }
}

CpModel read_model(std::istream& is) {
  long long order = 0;
  long long rank = 0;
  if (!(is >> order >> rank)) throw std::runtime_error("model file: missing order/rank header");
  if (order < 1 || order > kMaxOrder || rank < 1 || rank > 1'000'000) {
    throw std::runtime_error("model file: invalid order or rank");
  }
  std::vector<FactorMatrix> factors;
  factors.reserve(static_cast<std::size_t>(order));
  for (long long m = 0; m < order; ++m) {
    std::vector<double> data(2 * static_cast<std::size_t>(rank));
    for (double& x : data) {
      if (!(is >> x)) throw std::runtime_error("model file: truncated factor data");
    }
    factors.emplace_back(static_cast<std::size_t>(rank), std::move(data));
  }
  const Format format = satisfies_normalization(factors) && order > 1 ? Format::Normalized : Format::Free;
  return CpModel(std::move(factors), format);
}

void save_model(const std::string& path, const CpModel& model) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  write_model(os, model);
  if (!os) throw std::runtime_error("failed writing " + path);
}

CpModel load_model(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  return read_model(is);
}

std::string model_to_json(const CpModel& model) {
  nlohmann::json j;
  j["order"] = model.order();
  j["rank"] = model.rank();
  j["format"] = model.format() == Format::Normalized ? "normalized" : "free";
  auto& factors = j["factors"] = nlohmann::json::array();
  for (const auto& f : model.factors()) {
    factors.push_back({std::vector<double>(f.row(0).begin(), f.row(0).end()),
                       std::vector<double>(f.row(1).begin(), f.row(1).end())});
  }
  return j.dump();
}

}  // namespace qcp
