#include "noisycover/genbound.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

namespace noisycover {

DudleyResult dudley_integral(const LnCoverAtScale& ln_cover, LogReal m, const DudleyGrid& grid) {
  if (grid.points < 2 || !(grid.lo > 0.0) || !(grid.hi > grid.lo)) {
    throw std::invalid_argument("Dudley grid needs >= 2 points with 0 < lo < hi");
  }
  const auto n = static_cast<std::size_t>(grid.points);
  std::vector<double> nu(n);
  std::vector<double> root(n);
  const double ratio = std::log(grid.hi / grid.lo) / static_cast<double>(n - 1);
  for (std::size_t j = 0; j < n; ++j) {
    nu[j] = j + 1 == n ? grid.hi : grid.lo * std::exp(ratio * static_cast<double>(j));
    root[j] = std::sqrt(std::max(0.0, ln_cover(nu[j])));
  }
  const double scale = 12.0 * std::exp(-0.5 * m.ln());

  DudleyResult best;
  best.value = std::numeric_limits<double>::infinity();
  double tail = 0.0;  // integral from nu[j] to hi
  for (std::size_t j = n; j-- > 0;) {
    if (j + 1 < n) tail += 0.5 * (root[j] + root[j + 1]) * (nu[j + 1] - nu[j]);
    const double value = 4.0 * nu[j] + scale * tail;
    if (value < best.value) {
      best.value = value;
      best.best_epsilon = nu[j];
      best.integral = tail;
    }
  }
  return best;
}

GbResult full_gb(const LnCoverAtScale& ln_cover, LogReal m, double ramp_loss, double delta,
                 const DudleyGrid& grid) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
  const DudleyResult d = dudley_integral(ln_cover, m, grid);
  GbResult out;
  out.delta = delta;
  out.best_epsilon = d.best_epsilon;
  out.integral_value = d.integral;
  out.gb_value = 2.0 * d.value +
                 3.0 * std::sqrt(std::log(2.0 / delta) / 2.0) * std::exp(-0.5 * m.ln());
  out.risk_bound = ramp_loss + out.gb_value;
  return out;
}

double nvac_epsilon(double ramp_loss) {
  if (!(ramp_loss >= 0.0)) throw std::invalid_argument("ramp loss must be >= 0");
  if (ramp_loss >= 1.0) {
    throw std::invalid_argument("ramp loss >= 1: the bound is vacuous already");
  }
  return (1.0 - ramp_loss) / 10.0;
}

bool nvac_condition_holds(double ln_n, double epsilon, LogReal m_total) {
  if (ln_n <= 0.0) return true;
  if (m_total.representable()) {
    const double lhs = 36.0 * ln_n / (epsilon * epsilon);
    if (std::isfinite(lhs)) return lhs <= m_total.value();
  }
  return std::log(36.0) + std::log(ln_n) - 2.0 * std::log(epsilon) <= m_total.ln();
}

namespace {

// 2^53: above this, consecutive integers are not all representable.
constexpr double kExactIntegerLimit = 9007199254740992.0;

}  // namespace

NvacResult solve_nvac_generic(const LnCoverAtSize& ln_cover, double epsilon, double m,
                              const NvacSearch& search) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("NVAC epsilon must be positive");
  if (!(m >= 1.0) || !std::isfinite(m)) throw std::invalid_argument("m must be >= 1");
  NvacResult out;
  out.epsilon_used = epsilon;

  const double ln_m = std::log(m);
  auto holds_at = [&](double ln_total) {
    const LogReal total = LogReal::from_log(ln_total);
    if (search.floor && !(total > *search.floor)) return false;
    try {
      return nvac_condition_holds(ln_cover(total), epsilon, total);
    } catch (const BoundError& e) {
      if (e.kind() == BoundError::Kind::kSampleTooSmall) return false;
      throw;
    }
  };

  const double ceiling = search.ceiling_log10 * std::numbers::ln10;
  double lo = ln_m;
  double hi = ln_m;
  if (!holds_at(ln_m)) {
    if (search.floor) lo = std::max(lo, search.floor->ln());
    double step = std::numbers::ln2;
    hi = lo + step;
    while (!holds_at(std::min(hi, ceiling))) {
      if (hi >= ceiling) {
        out.converged = false;
        out.diagnostics = "no crossing below log10 M = " + std::to_string(search.ceiling_log10);
        out.n_star = std::numeric_limits<double>::infinity();
        out.n_star_log10 = search.ceiling_log10 - ln_m / std::numbers::ln10;
        out.nvac_log10 = search.ceiling_log10;
        return out;
      }
      lo = hi;
      step *= 2.0;
      hi = lo + step;
    }
    hi = std::min(hi, ceiling);
    const double tol = std::log1p(search.rel_tol) * 1e-3;
    while (hi - lo > tol) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      (holds_at(mid) ? hi : lo) = mid;
    }
  }

  const double ln_n = hi - ln_m;
  if (ln_n < std::log(kExactIntegerLimit)) {
    double n = std::max(1.0, std::ceil(std::exp(ln_n) * (1.0 - 1e-12)));
    auto ok = [&](double k) { return holds_at(ln_m + std::log(k)); };
    while (n > 1.0 && ok(n - 1.0)) n -= 1.0;
    while (!ok(n)) n += 1.0;
    out.n_star = n;
    out.n_star_log10 = std::log10(n);
    out.nvac = m * n;
    out.nvac_log10 = std::log10(m * n);
  } else {
    out.n_star = std::exp(ln_n);
    out.n_star_log10 = ln_n / std::numbers::ln10;
    out.nvac_log10 = hi / std::numbers::ln10;
    if (std::isfinite(out.n_star) && std::isfinite(m * out.n_star)) out.nvac = m * out.n_star;
    if (!std::isfinite(out.n_star)) out.n_star = std::numeric_limits<double>::infinity();
  }
  out.converged = true;
  return out;
}

NvacResult solve_nvac(Method method, const NetworkArch& arch, const ArchQuantifiers& quant,
                      double m, double gamma, double ramp_loss, LogReal sigma) {
  const double eps = nvac_epsilon(ramp_loss);
  BoundQuery base;
  base.method = method;
  base.epsilon = eps;
  base.gamma = gamma;
  base.sigma = sigma;
  base.arch = arch;
  base.quant = quant;
  NvacSearch search;
  if (method == Method::kPdim) search.floor = LogReal::from_value(pdim_constant(quant));
  NvacResult out = solve_nvac_generic(
      [&](LogReal total) {
        BoundQuery q = base;
        q.m = total;
        return ln_cover(q).ln_n;
      },
      eps, m, search);
  out.method = method;
  out.method_name = std::string(to_string(method));
  out.ramp_loss_input = ramp_loss;
  return out;
}

NvacResult solve_nvac_constant(double ln_n, double m, double ramp_loss) {
  const double eps = nvac_epsilon(ramp_loss);
  NvacResult out = solve_nvac_generic([ln_n](LogReal) { return ln_n; }, eps, m);
  out.method_name = "constant";
  out.ramp_loss_input = ramp_loss;
  return out;
}

nlohmann::json to_json(const NvacResult& r) {
  nlohmann::json j = {{"method", r.method_name},
                      {"epsilon", r.epsilon_used},
                      {"ramp_loss", r.ramp_loss_input},
                      {"n_star_log10", r.n_star_log10},
                      {"log10_nvac", r.nvac_log10},
                      {"converged", r.converged}};
  j["n_star"] = std::isfinite(r.n_star) ? nlohmann::json(r.n_star) : nlohmann::json(nullptr);
  j["nvac"] = r.nvac ? nlohmann::json(*r.nvac) : nlohmann::json(nullptr);
  if (!r.diagnostics.empty()) j["diagnostics"] = r.diagnostics;
  return j;
}

}  // namespace noisycover
