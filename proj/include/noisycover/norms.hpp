#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "noisycover/mlp.hpp"

namespace noisycover {

// Convention: W has shape fan_in x fan_out and column j holds the incoming
// weights of output neuron j, so "a neuron's incoming weights" is a column.

/// Largest column l1 norm.
double one_inf_norm(const Matrix& w);

/// Sum of column l2 norms.
double two_one_norm(const Matrix& w);

/// sqrt(sum w_ij^2), unnormalized.
double frobenius_norm(const Matrix& w);

struct SpectralEstimate {
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Top singular value by power iteration on W^T W from a seeded unit start
/// vector. Stops when the relative change of the Rayleigh quotient drops below
/// tol. On non-convergence the best estimate is returned with converged=false.
SpectralEstimate spectral_norm(const Matrix& w, double tol = 1e-10,
                               int max_iter = 1000, std::uint64_t seed = 7);

/// Architecture counts and per-layer norms.
///
/// W_rvo, r_rvo and d_max only exist for T >= 2; they stay empty for a single
/// layer and the bounds that need them throw.
struct ArchQuantifiers {
  std::optional<std::int64_t> d_max;
  std::optional<std::int64_t> w_rvo;
  std::int64_t w_win = 0;
  std::optional<std::int64_t> r_rvo;
  std::int64_t w = 0;
  double v = 0.0;
  std::vector<double> s;  // spectral norms
  std::vector<double> b;  // (2,1) norms
  double x_frob = 0.0;

  bool operator==(const ArchQuantifiers&) const = default;
};

/// Size-only quantities; norms left zero.
ArchQuantifiers arch_counts(const NetworkArch& arch);

/// All fields, from trained weights and the normalized input norm.
ArchQuantifiers quantifiers(const NetworkArch& arch, const ParamSet& params,
                            double x_frob);

}  // namespace noisycover
