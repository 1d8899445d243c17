#include "noisycover/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "noisycover/dataio.hpp"
#include "noisycover/kernels.hpp"

namespace noisycover {

void NetworkArch::validate() const {
  if (widths.empty()) throw std::invalid_argument("architecture needs at least one layer");
  if (input_dim < 1) throw std::invalid_argument("input_dim must be >= 1");
  for (int p : widths) {
    if (p < 1) throw std::invalid_argument("layer widths must be >= 1");
  }
  if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be > 0");
  if (!(sigma >= 0.0)) throw std::invalid_argument("sigma must be >= 0");
}

void ParamSet::check_against(const NetworkArch& arch) const {
  if (depth() != arch.depth()) {
    throw std::invalid_argument("parameter depth " + std::to_string(depth()) +
                                " != architecture depth " +
                                std::to_string(arch.depth()));
  }
  for (int i = 0; i < depth(); ++i) {
    const Matrix& w = weights[i];
    if (w.rows() != arch.layer_dim(i) || w.cols() != arch.layer_dim(i + 1)) {
      throw std::invalid_argument("layer " + std::to_string(i + 1) +
                                  " has the wrong shape");
    }
    if (!w.allFinite()) {
      throw std::invalid_argument("layer " + std::to_string(i + 1) +
                                  " has non-finite entries");
    }
  }
}

bool ParamSet::operator==(const ParamSet& other) const {
  if (weights.size() != other.weights.size()) return false;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i].rows() != other.weights[i].rows() ||
        weights[i].cols() != other.weights[i].cols() ||
        weights[i] != other.weights[i]) {
      return false;
    }
  }
  return true;
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be > 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) {
    throw std::invalid_argument("momentum must lie in [0, 1)");
  }
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (epochs < 0) throw std::invalid_argument("epochs must be >= 0");
  if (mc_samples_eval < 1) throw std::invalid_argument("mc_samples_eval must be >= 1");
}

ParamSet init_params(const NetworkArch& arch, std::uint64_t seed) {
  arch.validate();
  Rng rng(seed);
  ParamSet params;
  for (int i = 0; i < arch.depth(); ++i) {
    const int fan_in = arch.layer_dim(i);
    const int fan_out = arch.layer_dim(i + 1);
    const double limit = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> dist(-limit, limit);
    Matrix w(fan_in, fan_out);
    for (int r = 0; r < fan_in; ++r) {
      for (int c = 0; c < fan_out; ++c) w(r, c) = dist(rng);
    }
    params.weights.push_back(std::move(w));
  }
  return params;
}

namespace {

Vector as_vector(std::span<const double> x) {
  return Eigen::Map<const Vector>(x.data(), static_cast<Eigen::Index>(x.size()));
}

void check_input(const ParamSet& params, std::span<const double> x) {
  if (static_cast<int>(x.size()) != params.input_dim()) {
    throw std::invalid_argument("input has dimension " + std::to_string(x.size()) +
                                ", network expects " +
                                std::to_string(params.input_dim()));
  }
}

}  // namespace

Vector forward_deterministic(const ParamSet& params, std::span<const double> x) {
  check_input(params, x);
  Vector z = as_vector(x);
  for (const Matrix& w : params.weights) {
    z = (w.transpose() * z).unaryExpr([](double v) { return activation(v); });
  }
  return z;
}

Vector forward_noisy(const ParamSet& params, std::span<const double> x,
                     double sigma, Rng& rng) {
  check_input(params, x);
  if (sigma == 0.0) return forward_deterministic(params, x);
  std::normal_distribution<double> noise(0.0, sigma);
  Vector z = as_vector(x);
  for (const Matrix& w : params.weights) {
    z = (w.transpose() * z).unaryExpr([](double v) { return activation(v); });
    for (Eigen::Index j = 0; j < z.size(); ++j) z[j] += noise(rng);
  }
  return z;
}

Vector expected_output(const ParamSet& params, std::span<const double> x,
                       double sigma, int n_samples, Rng& rng) {
  if (n_samples < 1) throw std::invalid_argument("n_samples must be >= 1");
  if (sigma == 0.0) return forward_deterministic(params, x);
  Vector sum = forward_noisy(params, x, sigma, rng);
  for (int s = 1; s < n_samples; ++s) sum += forward_noisy(params, x, sigma, rng);
  return sum / static_cast<double>(n_samples);
}

double margin(std::span<const double> u, int y) {
  const int k = static_cast<int>(u.size());
  if (k < 2) throw std::invalid_argument("margin needs at least two classes");
  if (y < 0 || y >= k) throw std::out_of_range("label out of range");
  double best_other = -std::numeric_limits<double>::infinity();
  for (int j = 0; j < k; ++j) {
    if (j != y) best_other = std::max(best_other, u[j]);
  }
  return u[y] - best_other;
}

double ramp(double x, double gamma) {
  if (!(gamma > 0.0)) throw std::invalid_argument("ramp margin must be > 0");
  if (x <= -gamma) return 0.0;
  if (x > 0.0) return 1.0;
  return 1.0 + x / gamma;
}

int argmax_lowest(std::span<const double> u) {
  int best = 0;
  for (int j = 1; j < static_cast<int>(u.size()); ++j) {
    if (u[j] > u[best]) best = j;
  }
  return best;
}

int zero_one_loss(std::span<const double> u, int y) {
  const int k = static_cast<int>(u.size());
  if (k < 2) throw std::invalid_argument("0-1 loss needs at least two classes");
  if (y < 0 || y >= k) throw std::out_of_range("label out of range");
  return argmax_lowest(u) != y ? 1 : 0;
}

Rng example_stream(std::uint64_t seed, std::uint64_t index) {
  // splitmix64 finalizer over (seed, index)
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return Rng(z);
}

LossReport evaluate(const ParamSet& params, const Dataset& data, double gamma,
                    EvalMode mode, double sigma, std::uint64_t seed) {
  if (data.size() == 0) throw std::invalid_argument("cannot evaluate on an empty dataset");
  if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be > 0");
  const int k = params.output_dim();
  for (int y : data.labels) {
    if (y < 0 || y >= k) throw std::out_of_range("label out of range");
  }
  const Matrix out = kernels::batch_outputs_parallel(params, data, mode, sigma, seed);
  double ramp_sum = 0.0;
  std::int64_t errors = 0;
  std::vector<double> u(static_cast<std::size_t>(k));
  for (std::int64_t i = 0; i < data.size(); ++i) {
    for (int j = 0; j < k; ++j) u[j] = out(i, j);
    ramp_sum += ramp(-margin(u, data.labels[i]), gamma);
    errors += zero_one_loss(u, data.labels[i]);
  }
  LossReport report;
  report.sample_count = data.size();
  report.ramp_loss = ramp_sum / static_cast<double>(data.size());
  report.zero_one_loss = static_cast<double>(errors) / static_cast<double>(data.size());
  return report;
}

}  // namespace noisycover
