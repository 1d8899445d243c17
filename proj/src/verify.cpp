#include "noisycover/verify.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "noisycover/bounds.hpp"
#include "noisycover/norms.hpp"
#include "noisycover/oracle.hpp"

namespace noisycover {

namespace {

constexpr double kTolerance = 1e-12;

void record(CheckResult& r, double violation) {
  ++r.trials;
  r.max_violation = std::max(r.max_violation, violation);
  if (violation > kTolerance) r.pass = false;
}

std::vector<double> random_distribution(std::size_t k, Rng& rng) {
  std::exponential_distribution<double> e(1.0);
  std::vector<double> p(k);
  double s = 0.0;
  for (double& v : p) s += (v = e(rng));
  for (double& v : p) v /= s;
  return p;
}

CheckResult check_tv_bound(const VerifyOptions& opt, Rng& rng) {
  CheckResult r{"tv_gaussian_bound"};
  std::uniform_real_distribution<double> mu(-5.0, 5.0);
  std::uniform_real_distribution<double> log_sigma(-2.0, 1.0);
  for (int t = 0; t < opt.trials; ++t) {
    const double a = mu(rng);
    const double b = mu(rng);
    const double s = std::pow(10.0, log_sigma(rng));
    double bound = tv_gaussians_bound(a, b, s);
    if (opt.inject_faulty_tv_bound) bound *= 0.25;
    record(r, tv_gaussians_1d(a, b, s) - std::min(1.0, bound));
  }
  return r;
}

CheckResult check_dpi(const VerifyOptions& opt, Rng& rng) {
  CheckResult r{"data_processing"};
  std::uniform_int_distribution<int> size(2, 6);
  for (int t = 0; t < opt.trials; ++t) {
    const auto k_in = static_cast<std::size_t>(size(rng));
    const auto k_out = static_cast<std::size_t>(size(rng));
    Matrix channel(k_in, k_out);
    for (std::size_t i = 0; i < k_in; ++i) {
      const auto row = random_distribution(k_out, rng);
      for (std::size_t j = 0; j < k_out; ++j) channel(i, j) = row[j];
    }
    const auto p = random_distribution(k_in, rng);
    const auto q = random_distribution(k_in, rng);
    const DpiResult d = dpi_check(channel, p, q);
    record(r, d.tv_out - d.tv_in);
  }
  return r;
}

CheckResult check_gmm(const VerifyOptions& opt, Rng& rng) {
  CheckResult r{"gmm_smoothing"};
  std::uniform_real_distribution<double> sigma_d(0.1, 1.0);
  std::uniform_real_distribution<double> support_d(0.25, 2.0);
  std::uniform_real_distribution<double> eta_d(0.01, 0.5);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_int_distribution<int> shape(0, 2);
  for (int t = 0; t < opt.trials; ++t) {
    const double sigma = sigma_d(rng);
    const double b = support_d(rng);
    const double eta = eta_d(rng);
    const auto cells = static_cast<std::size_t>(std::ceil(100.0 * b / sigma));
    Density1D f;
    switch (shape(rng)) {
      case 0:
        f = Density1D::point_mass(b * unit(rng), b, cells);
        break;
      case 1:
        f = Density1D::from_function([](double) { return 1.0; }, b, cells);
        break;
      default: {
        const double c1 = b * unit(rng);
        const double c2 = b * unit(rng);
        const double w = 0.05 + 0.5 * std::abs(unit(rng)) * b;
        f = Density1D::from_function(
            [&](double x) {
              return std::exp(-0.5 * (x - c1) * (x - c1) / (w * w)) +
                     0.5 * std::exp(-0.5 * (x - c2) * (x - c2) / (w * w));
            },
            b, cells);
      }
    }
    const GmmEstimate g = gmm_estimate_1d(f, sigma, eta);
    record(r, g.tv_error - g.bound);
  }
  return r;
}

CheckResult check_toy_cover(const VerifyOptions& opt) {
  CheckResult r{"greedy_cover_vs_lipschitz"};
  const std::vector<double> eps{0.05, 0.1, 0.2};
  for (const auto& c : toy_cover_vs_lipschitz(opt.seed, eps)) {
    record(r, std::log(static_cast<double>(c.greedy_size)) - c.ln_bound);
  }
  return r;
}

// The covering number N(eps) is nonincreasing in eps. In-order greedy sizes
// are not monotone themselves but stay within [N(eps), N(eps/2)].
CheckResult check_cover_monotone(const VerifyOptions& opt, Rng& rng) {
  CheckResult r{"cover_monotone"};
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> eps_d(0.1, 2.0);
  const int instances = std::max(1, opt.trials / 10);
  for (int t = 0; t < instances; ++t) {
    std::vector<Matrix> pts(14);
    for (Matrix& p : pts) p = Matrix::NullaryExpr(3, 2, [&] { return gauss(rng); });
    const auto metric = t % 2 == 0 ? ExtendedMetric::kSup : ExtendedMetric::kL2;
    std::vector<double> eps(8);
    for (double& e : eps) e = eps_d(rng);
    std::sort(eps.begin(), eps.end(), std::greater<>());
    std::size_t previous = 0;
    for (double e : eps) {
      const std::size_t n = exact_cover(pts, e, metric);
      const std::size_t g = greedy_cover(pts, e, metric);
      const std::size_t half = exact_cover(pts, e / 2, metric);
      double violation = previous > n ? static_cast<double>(previous - n) : 0.0;
      if (g < n) violation = std::max(violation, static_cast<double>(n - g));
      if (g > half) violation = std::max(violation, static_cast<double>(g - half));
      record(r, violation);
      previous = n;
    }
  }
  return r;
}

}  // namespace

std::vector<ToyCoverComparison> toy_cover_vs_lipschitz(std::uint64_t seed,
                                                       std::span<const double> epsilons,
                                                       int configs, int inputs, double v_max,
                                                       double gamma) {
  if (configs < 1 || inputs < 1) throw std::invalid_argument("toy fixture needs samples");
  NetworkArch arch{2, {2, 2}, 0.0, gamma};
  Rng rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> scale(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);

  std::vector<Vector> xs(static_cast<std::size_t>(inputs));
  std::vector<int> ys(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    xs[i] = Vector::NullaryExpr(2, [&] { return unit(rng); });
    ys[i] = coin(rng) ? 1 : 0;
  }

  std::vector<Matrix> restrictions;
  for (int c = 0; c < configs; ++c) {
    ParamSet params;
    for (int l = 1; l <= arch.depth(); ++l) {
      Matrix w = Matrix::NullaryExpr(arch.layer_dim(l - 1), arch.layer_dim(l),
                                     [&] { return unit(rng); });
      for (Eigen::Index j = 0; j < w.cols(); ++j) {
        const double l1 = w.col(j).cwiseAbs().sum();
        if (l1 > 0.0) w.col(j) *= v_max * scale(rng) / l1;
      }
      params.weights.push_back(std::move(w));
    }
    Matrix losses(inputs, 1);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const Vector u =
          forward_deterministic(params, std::span<const double>(xs[i].data(), 2));
      const std::span<const double> us(u.data(), static_cast<std::size_t>(u.size()));
      losses(static_cast<Eigen::Index>(i), 0) = ramp(-margin(us, ys[i]), gamma);
    }
    restrictions.push_back(std::move(losses));
  }

  BoundQuery q;
  q.method = Method::kLipschitz;
  q.m = LogReal::from_value(inputs);
  q.gamma = gamma;
  q.arch = arch;
  q.quant = arch_counts(arch);
  q.quant.v = v_max;

  std::vector<ToyCoverComparison> out;
  for (double e : epsilons) {
    q.epsilon = e;
    out.push_back({e, greedy_cover(restrictions, e, ExtendedMetric::kL2), ln_cover(q).ln_n});
  }
  return out;
}

std::vector<CheckResult> run_verification(const VerifyOptions& options) {
  if (options.trials < 1) throw std::invalid_argument("trials must be >= 1");
  Rng rng(options.seed);
  std::vector<CheckResult> out;
  out.push_back(check_tv_bound(options, rng));
  out.push_back(check_dpi(options, rng));
  out.push_back(check_gmm(options, rng));
  out.push_back(check_toy_cover(options));
  out.push_back(check_cover_monotone(options, rng));
  return out;
}

bool all_passed(const std::vector<CheckResult>& results) {
  return std::all_of(results.begin(), results.end(), [](const CheckResult& r) { return r.pass; });
}

nlohmann::json to_json(const std::vector<CheckResult>& results) {
  auto arr = nlohmann::json::array();
  for (const auto& r : results) {
    arr.push_back({{"check", r.check},
                   {"trials", r.trials},
                   {"max_violation", r.max_violation},
                   {"pass", r.pass}});
  }
  return arr;
}

}  // namespace noisycover
