#pragma once

#include <functional>
#include <span>
#include <vector>

#include "noisycover/mlp.hpp"

namespace noisycover {

/// Exact TV between N(mu1, sigma^2) and N(mu2, sigma^2): 2 Phi(|d|/(2 sigma)) - 1.
double tv_gaussians_1d(double mu1, double mu2, double sigma);

/// The Pinsker-derived upper bound |mu1 - mu2| / (2 sigma).
double tv_gaussians_bound(double mu1, double mu2, double sigma);

/// Half the l1 distance between two discrete distributions.
double tv_discrete(std::span<const double> p, std::span<const double> q);

struct DpiResult {
  double tv_in = 0.0;
  double tv_out = 0.0;
};

/// Pushes p and q through a row-stochastic channel (rows = input symbols)
/// and reports TV before and after.
DpiResult dpi_check(const Matrix& channel, std::span<const double> p,
                    std::span<const double> q);

/// A density on [-B, B] sampled at cell centres -B + (j + 1/2) h.
struct Density1D {
  double support = 1.0;  // B
  double step = 0.01;    // h
  std::vector<double> values;

  double center(std::size_t j) const {
    return -support + (static_cast<double>(j) + 0.5) * step;
  }
  double mass() const;

  /// Samples f on n cells and rescales so the midpoint-rule mass is 1.
  static Density1D from_function(const std::function<double(double)>& f,
                                 double support, std::size_t cells);
  /// All mass in the cell containing x0.
  static Density1D point_mass(double x0, double support, std::size_t cells);
};

struct GaussianMixture1D {
  std::vector<double> means;
  std::vector<double> weights;
  double sigma = 1.0;
};

struct GmmEstimate {
  GaussianMixture1D mixture;
  double tv_error = 0.0;  // measured by quadrature
  double bound = 0.0;     // 2 eta / sigma
};

/// Approximates f * N(0, sigma^2) by equal-variance Gaussians centred at
/// -B + (2a+1) eta, a = 0..ceil(B/eta)-1, weighted by f's mass in
/// [-B + 2a eta, -B + 2(a+1) eta]. TV is measured on a uniform grid truncated
/// at B + 2 eta + 8 sigma. Throws if f.step > sigma/50.
GmmEstimate gmm_estimate_1d(const Density1D& f, double sigma, double eta);

enum class ExtendedMetric { kSup, kL2 };

/// Distance between two restrictions (m x p): the per-row l2 distances
/// aggregated by max (kSup) or sqrt(mean of squares) (kL2).
double extended_distance(const Matrix& a, const Matrix& b, ExtendedMetric metric);

/// In-order greedy internal cover: a point farther than epsilon from every
/// existing centre becomes a new centre. Returns the centre indices, which
/// form an epsilon-cover that is also epsilon-separated.
std::vector<std::size_t> greedy_cover_centers(std::span<const Matrix> points,
                                              double epsilon,
                                              ExtendedMetric metric);

std::size_t greedy_cover(std::span<const Matrix> points, double epsilon,
                         ExtendedMetric metric);

/// Size of a smallest internal epsilon-cover by branch and bound. At most
/// kMaxExactCoverPoints points.
inline constexpr std::size_t kMaxExactCoverPoints = 20;
std::size_t exact_cover(std::span<const Matrix> points, double epsilon,
                        ExtendedMetric metric);

}  // namespace noisycover
