#include "noisycover/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "noisycover/oracle.hpp"

namespace noisycover::kernels {

namespace {

constexpr Eigen::Index kBlockRows = 32;

void apply_activation(Matrix& z) {
  z = z.unaryExpr([](double v) { return activation(v); });
}

/// Outputs for rows [begin, end) of the dataset, batched through GEMMs.
/// Noise for example i is drawn from example_stream(seed, i) in the same
/// order forward_noisy would consume it: sample by sample, layer by layer,
/// one fresh normal_distribution per sample.
Matrix block_outputs(const ParamSet& params, const Dataset& data,
                     Eigen::Index begin, Eigen::Index end, EvalMode mode,
                     double sigma, std::uint64_t seed) {
  const Eigen::Index rows = end - begin;
  Matrix z = data.images.middleRows(begin, rows) * params.weights.front();
  apply_activation(z);
  const bool noisy = mode.kind == EvalMode::Kind::kExpected && sigma > 0.0;
  if (!noisy) {
    for (int l = 1; l < params.depth(); ++l) {
      z = z * params.weights[l];
      apply_activation(z);
    }
    return z;
  }

  const int samples = mode.n_samples;
  const int depth = params.depth();
  std::vector<Matrix> noise(depth);
  for (int l = 0; l < depth; ++l) {
    noise[l].resize(rows * samples, params.weights[l].cols());
  }
  for (Eigen::Index b = 0; b < rows; ++b) {
    Rng rng = example_stream(seed, static_cast<std::uint64_t>(begin + b));
    for (int s = 0; s < samples; ++s) {
      std::normal_distribution<double> dist(0.0, sigma);
      const Eigen::Index r = b * samples + s;
      for (int l = 0; l < depth; ++l) {
        for (Eigen::Index j = 0; j < noise[l].cols(); ++j) noise[l](r, j) = dist(rng);
      }
    }
  }

  Matrix zs(rows * samples, z.cols());
  for (Eigen::Index b = 0; b < rows; ++b) {
    zs.middleRows(b * samples, samples).rowwise() = z.row(b);
  }
  zs += noise[0];
  for (int l = 1; l < depth; ++l) {
    zs = zs * params.weights[l];
    apply_activation(zs);
    zs += noise[l];
  }
  Matrix mean(rows, zs.cols());
  for (Eigen::Index b = 0; b < rows; ++b) {
    mean.row(b) = zs.middleRows(b * samples, samples).colwise().sum() /
                  static_cast<double>(samples);
  }
  return mean;
}

void check_eval_args(const ParamSet& params, const Dataset& data, EvalMode mode) {
  if (data.dim() != params.input_dim()) {
    throw std::invalid_argument("dataset dimension does not match the network input");
  }
  if (mode.kind == EvalMode::Kind::kExpected && mode.n_samples < 1) {
    throw std::invalid_argument("n_samples must be >= 1");
  }
}

}  // namespace

Matrix batch_outputs_serial(const ParamSet& params, const Dataset& data,
                            EvalMode mode, double sigma, std::uint64_t seed) {
  check_eval_args(params, data, mode);
  Matrix out(data.size(), params.output_dim());
  for (std::int64_t i = 0; i < data.size(); ++i) {
    if (mode.kind == EvalMode::Kind::kDeterministic) {
      out.row(i) = forward_deterministic(params, data.row(i)).transpose();
    } else {
      Rng rng = example_stream(seed, static_cast<std::uint64_t>(i));
      out.row(i) =
          expected_output(params, data.row(i), sigma, mode.n_samples, rng).transpose();
    }
  }
  return out;
}

Matrix batch_outputs_parallel(const ParamSet& params, const Dataset& data,
                              EvalMode mode, double sigma, std::uint64_t seed) {
  check_eval_args(params, data, mode);
  const Eigen::Index m = data.size();
  Matrix out(m, params.output_dim());
  const Eigen::Index blocks = (m + kBlockRows - 1) / kBlockRows;
#pragma omp parallel for schedule(dynamic)
  for (Eigen::Index blk = 0; blk < blocks; ++blk) {
    const Eigen::Index begin = blk * kBlockRows;
    const Eigen::Index end = std::min(m, begin + kBlockRows);
    out.middleRows(begin, end - begin) =
        block_outputs(params, data, begin, end, mode, sigma, seed);
  }
  return out;
}

namespace {

inline double gaussian_density(double d, double sigma) {
  const double inv = 1.0 / (sigma * std::sqrt(2.0 * std::numbers::pi));
  return inv * std::exp(-0.5 * (d * d) / (sigma * sigma));
}

inline double smooth_at(std::span<const double> centres, std::span<const double> values,
                        double h_in, double sigma, double x) {
  const double reach = 8.0 * sigma;
  auto lo = std::lower_bound(centres.begin(), centres.end(), x - reach);
  auto hi = std::upper_bound(centres.begin(), centres.end(), x + reach);
  double acc = 0.0;
  for (auto it = lo; it != hi; ++it) {
    const auto j = static_cast<std::size_t>(it - centres.begin());
    acc += values[j] * gaussian_density(x - *it, sigma);
  }
  return acc * h_in;
}

}  // namespace

std::vector<double> gaussian_smooth_serial(std::span<const double> centres,
                                           std::span<const double> values,
                                           double h_in, double sigma, double x0,
                                           double h_out, std::size_t n_out) {
  std::vector<double> out(n_out);
  for (std::size_t k = 0; k < n_out; ++k) {
    out[k] = smooth_at(centres, values, h_in, sigma, x0 + static_cast<double>(k) * h_out);
  }
  return out;
}

std::vector<double> gaussian_smooth_parallel(std::span<const double> centres,
                                             std::span<const double> values,
                                             double h_in, double sigma, double x0,
                                             double h_out, std::size_t n_out) {
  std::vector<double> out(n_out);
  const auto n = static_cast<std::int64_t>(n_out);
#pragma omp parallel for schedule(static)
  for (std::int64_t k = 0; k < n; ++k) {
    out[k] = smooth_at(centres, values, h_in, sigma, x0 + static_cast<double>(k) * h_out);
  }
  return out;
}

std::vector<double> distances_serial(const Matrix& query, std::span<const Matrix> pool,
                                     bool sup) {
  const auto metric = sup ? ExtendedMetric::kSup : ExtendedMetric::kL2;
  std::vector<double> out(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) {
    out[i] = extended_distance(query, pool[i], metric);
  }
  return out;
}

std::vector<double> distances_parallel(const Matrix& query, std::span<const Matrix> pool,
                                       bool sup) {
  const auto metric = sup ? ExtendedMetric::kSup : ExtendedMetric::kL2;
  std::vector<double> out(pool.size());
  const auto n = static_cast<std::int64_t>(pool.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    out[i] = extended_distance(query, pool[i], metric);
  }
  return out;
}

}  // namespace noisycover::kernels
