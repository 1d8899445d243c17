#include "noisycover/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "noisycover/kernels.hpp"

namespace noisycover {

double tv_gaussians_1d(double mu1, double mu2, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
  return std::erf(std::abs(mu1 - mu2) / (2.0 * sigma * std::numbers::sqrt2));
}

double tv_gaussians_bound(double mu1, double mu2, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
  return std::abs(mu1 - mu2) / (2.0 * sigma);
}

double tv_discrete(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw std::invalid_argument("distributions differ in size");
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) acc += std::abs(p[i] - q[i]);
  return 0.5 * acc;
}

DpiResult dpi_check(const Matrix& channel, std::span<const double> p,
                    std::span<const double> q) {
  const auto k = static_cast<std::size_t>(channel.rows());
  if (p.size() != k || q.size() != k) {
    throw std::invalid_argument("channel rows must match the input alphabet");
  }
  if ((channel.array() < 0.0).any()) throw std::invalid_argument("channel has negative entries");
  for (Eigen::Index r = 0; r < channel.rows(); ++r) {
    if (std::abs(channel.row(r).sum() - 1.0) > 1e-9) {
      throw std::invalid_argument("channel is not row-stochastic");
    }
  }
  const Eigen::Map<const Vector> pv(p.data(), static_cast<Eigen::Index>(k));
  const Eigen::Map<const Vector> qv(q.data(), static_cast<Eigen::Index>(k));
  const Vector po = channel.transpose() * pv;
  const Vector qo = channel.transpose() * qv;
  DpiResult out;
  out.tv_in = tv_discrete(p, q);
  out.tv_out = 0.5 * (po - qo).cwiseAbs().sum();
  return out;
}

double Density1D::mass() const {
  double acc = 0.0;
  for (double v : values) acc += v;
  return acc * step;
}

Density1D Density1D::from_function(const std::function<double(double)>& f, double support,
                                   std::size_t cells) {
  if (!(support > 0.0) || cells == 0) throw std::invalid_argument("empty density support");
  Density1D d;
  d.support = support;
  d.step = 2.0 * support / static_cast<double>(cells);
  d.values.resize(cells);
  for (std::size_t j = 0; j < cells; ++j) {
    const double v = f(d.center(j));
    if (v < 0.0) throw std::invalid_argument("density values must be nonnegative");
    d.values[j] = v;
  }
  const double mass = d.mass();
  if (!(mass > 0.0)) throw std::invalid_argument("density has zero mass");
  for (double& v : d.values) v /= mass;
  return d;
}

Density1D Density1D::point_mass(double x0, double support, std::size_t cells) {
  if (!(support > 0.0) || cells == 0) throw std::invalid_argument("empty density support");
  if (std::abs(x0) > support) throw std::invalid_argument("point mass outside the support");
  Density1D d;
  d.support = support;
  d.step = 2.0 * support / static_cast<double>(cells);
  d.values.assign(cells, 0.0);
  const auto j = std::min(cells - 1, static_cast<std::size_t>((x0 + support) / d.step));
  d.values[j] = 1.0 / d.step;
  return d;
}

GmmEstimate gmm_estimate_1d(const Density1D& f, double sigma, double eta) {
  if (!(sigma > 0.0) || !(eta > 0.0)) throw std::invalid_argument("sigma and eta must be positive");
  if (f.values.empty()) throw std::invalid_argument("empty density");
  if (f.step > sigma / 50.0) {
    throw std::invalid_argument("density grid too coarse: step must be <= sigma/50");
  }
  const double b = f.support;
  const auto k = static_cast<std::size_t>(std::ceil(b / eta));

  GmmEstimate out;
  out.bound = 2.0 * eta / sigma;
  out.mixture.sigma = sigma;
  out.mixture.weights.assign(k, 0.0);
  for (std::size_t a = 0; a < k; ++a) {
    out.mixture.means.push_back(-b + (2.0 * static_cast<double>(a) + 1.0) * eta);
  }
  std::vector<double> centres(f.values.size());
  for (std::size_t j = 0; j < f.values.size(); ++j) {
    centres[j] = f.center(j);
    const auto a = std::min(k - 1, static_cast<std::size_t>((centres[j] + b) / (2.0 * eta)));
    out.mixture.weights[a] += f.values[j] * f.step;
  }

  const double reach = b + 2.0 * eta + 8.0 * sigma;
  const double h_out = std::min(sigma / 20.0, f.step);
  const auto n_out = static_cast<std::size_t>(std::ceil(2.0 * reach / h_out)) + 1;
  const auto conv = kernels::gaussian_smooth_parallel(centres, f.values, f.step, sigma, -reach,
                                                      h_out, n_out);
  const auto mix = kernels::gaussian_smooth_parallel(out.mixture.means, out.mixture.weights, 1.0,
                                                     sigma, -reach, h_out, n_out);
  double acc = 0.0;
  for (std::size_t i = 0; i < n_out; ++i) acc += std::abs(conv[i] - mix[i]);
  out.tv_error = 0.5 * acc * h_out;
  return out;
}

double extended_distance(const Matrix& a, const Matrix& b, ExtendedMetric metric) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument("restrictions differ in shape");
  }
  if (a.rows() == 0) return 0.0;
  const Vector row_sq = (a - b).rowwise().squaredNorm();
  if (metric == ExtendedMetric::kSup) return std::sqrt(row_sq.maxCoeff());
  return std::sqrt(row_sq.mean());
}

std::vector<std::size_t> greedy_cover_centers(std::span<const Matrix> points, double epsilon,
                                              ExtendedMetric metric) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  std::vector<std::size_t> idx;
  std::vector<Matrix> centres;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto d =
        kernels::distances_parallel(points[i], centres, metric == ExtendedMetric::kSup);
    if (std::none_of(d.begin(), d.end(), [&](double v) { return v <= epsilon; })) {
      idx.push_back(i);
      centres.push_back(points[i]);
    }
  }
  return idx;
}

std::size_t greedy_cover(std::span<const Matrix> points, double epsilon, ExtendedMetric metric) {
  return greedy_cover_centers(points, epsilon, metric).size();
}

namespace {

void branch_cover(const std::vector<std::uint32_t>& reach, std::uint32_t covered,
                  std::uint32_t all, std::size_t used, std::size_t& best) {
  if (covered == all) {
    best = std::min(best, used);
    return;
  }
  if (used + 1 >= best) return;
  // some centre must cover the first uncovered point
  const auto u = static_cast<std::size_t>(std::countr_one(covered));
  for (std::size_t c = 0; c < reach.size(); ++c) {
    if (reach[c] & (1u << u)) branch_cover(reach, covered | reach[c], all, used + 1, best);
  }
}

}  // namespace

std::size_t exact_cover(std::span<const Matrix> points, double epsilon, ExtendedMetric metric) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  if (points.size() > kMaxExactCoverPoints) {
    throw std::invalid_argument("exact cover limited to " + std::to_string(kMaxExactCoverPoints) +
                                " points");
  }
  const std::size_t n = points.size();
  if (n == 0) return 0;
  std::vector<std::uint32_t> reach(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (extended_distance(points[i], points[j], metric) <= epsilon) reach[i] |= 1u << j;
    }
  }
  std::size_t best = n;
  branch_cover(reach, 0, (1u << n) - 1, 0, best);
  return best;
}

}  // namespace noisycover
