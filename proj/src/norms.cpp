#include "noisycover/norms.hpp"

#include <algorithm>
#include <cmath>

namespace noisycover {

double one_inf_norm(const Matrix& w) {
  if (w.size() == 0) return 0.0;
  return w.cwiseAbs().colwise().sum().maxCoeff();
}

double two_one_norm(const Matrix& w) {
  if (w.size() == 0) return 0.0;
  return w.colwise().norm().sum();
}

double frobenius_norm(const Matrix& w) { return w.norm(); }

SpectralEstimate spectral_norm(const Matrix& w, double tol, int max_iter,
                               std::uint64_t seed) {
  SpectralEstimate est;
  if (w.size() == 0 || w.isZero(0.0)) {
    est.converged = true;
    return est;
  }
  Rng rng(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  Vector v(w.cols());
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = dist(rng);
  v.normalize();

  double lambda = 0.0;
  for (int it = 1; it <= max_iter; ++it) {
    const Vector wv = w * v;
    Vector next = w.transpose() * wv;
    const double rayleigh = wv.squaredNorm();  // v^T W^T W v with |v| = 1
    est.iterations = it;
    const double norm = next.norm();
    if (norm == 0.0) {
      // start vector in the null space; restart from a fresh direction
      for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = dist(rng);
      v.normalize();
      continue;
    }
    v = next / norm;
    if (it > 1 && std::abs(rayleigh - lambda) <= tol * rayleigh) {
      lambda = std::max(lambda, rayleigh);
      est.converged = true;
      break;
    }
    lambda = rayleigh;
  }
  est.value = std::sqrt(lambda);
  return est;
}

ArchQuantifiers arch_counts(const NetworkArch& arch) {
  arch.validate();
  const int t = arch.depth();
  const auto p = [&](int i) { return static_cast<std::int64_t>(arch.layer_dim(i)); };
  ArchQuantifiers q;
  for (int i = 2; i <= t; ++i) q.w_win += p(i) * p(i - 1);
  if (t >= 2) {
    std::int64_t d_max = 0;
    for (int i = 1; i <= t - 1; ++i) d_max = std::max(d_max, p(i));
    q.d_max = d_max;
    std::int64_t w_rvo = p(0) * p(1);
    for (int i = 2; i <= t - 1; ++i) w_rvo += p(i) * p(i - 1);
    w_rvo += p(t - 1);
    q.w_rvo = w_rvo;
    std::int64_t r_rvo = 1;
    for (int i = 1; i <= t - 1; ++i) r_rvo += p(i);
    q.r_rvo = r_rvo;
  }
  q.w = std::max({p(0), q.d_max.value_or(0), p(t)});
  q.s.assign(static_cast<std::size_t>(t), 0.0);
  q.b.assign(static_cast<std::size_t>(t), 0.0);
  return q;
}

ArchQuantifiers quantifiers(const NetworkArch& arch, const ParamSet& params,
                            double x_frob) {
  params.check_against(arch);
  ArchQuantifiers q = arch_counts(arch);
  for (int i = 0; i < params.depth(); ++i) {
    const Matrix& w = params.weights[i];
    q.v = std::max(q.v, one_inf_norm(w));
    q.s[i] = spectral_norm(w).value;
    q.b[i] = two_one_norm(w);
  }
  q.x_frob = x_frob;
  return q;
}

}  // namespace noisycover
