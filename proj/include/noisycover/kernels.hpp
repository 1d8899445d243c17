#pragma once

// Data-parallel inner loops. Every OpenMP kernel has a serial twin with the
// same contract; the serial versions are the test references and the
// benchmark baseline.

#include <cstdint>
#include <span>
#include <vector>

#include "noisycover/dataio.hpp"
#include "noisycover/mlp.hpp"

namespace noisycover::kernels {

/// Output rows (one per example) for the whole dataset. Deterministic mode
/// ignores sigma/seed; expected mode averages n_samples noisy passes whose
/// noise comes from example_stream(seed, i).
Matrix batch_outputs_serial(const ParamSet& params, const Dataset& data,
                            EvalMode mode, double sigma, std::uint64_t seed);
Matrix batch_outputs_parallel(const ParamSet& params, const Dataset& data,
                              EvalMode mode, double sigma, std::uint64_t seed);

/// (f * g)(x_k) on the grid x_k = x0 + k h_out for a Gaussian g of scale
/// sigma, with f given by cell values at centres[j] and cell width h_in.
/// Terms with |x - y| > 8 sigma are dropped.
std::vector<double> gaussian_smooth_serial(std::span<const double> centres,
                                           std::span<const double> values,
                                           double h_in, double sigma, double x0,
                                           double h_out, std::size_t n_out);
std::vector<double> gaussian_smooth_parallel(std::span<const double> centres,
                                             std::span<const double> values,
                                             double h_in, double sigma, double x0,
                                             double h_out, std::size_t n_out);

/// Distances from `query` to every point in `pool`.
std::vector<double> distances_serial(const Matrix& query,
                                     std::span<const Matrix> pool, bool sup);
std::vector<double> distances_parallel(const Matrix& query,
                                       std::span<const Matrix> pool, bool sup);

}  // namespace noisycover::kernels
