#pragma once

#include <functional>
#include <optional>
#include <string>

#include <json.hpp>

#include "noisycover/bounds.hpp"
#include "noisycover/log_real.hpp"

namespace noisycover {

/// nu -> ln N(nu) at a fixed sample size.
using LnCoverAtScale = std::function<double(double nu)>;
/// M -> ln N(eps, M) at a fixed scale.
using LnCoverAtSize = std::function<double(LogReal m)>;

struct DudleyGrid {
  int points = 200;
  double lo = 1e-4;
  double hi = 0.5;  // c_x / 2 with c_x = 1
};

struct DudleyResult {
  double value = 0.0;         // 4 eps + (12/sqrt m) int_eps^{1/2} sqrt(ln N)
  double best_epsilon = 0.0;
  double integral = 0.0;      // the integral at best_epsilon
};

/// Grid minimum over eps of the chaining bound. The integral is a trapezoid
/// rule on a geometric grid of nu from grid.lo to grid.hi.
DudleyResult dudley_integral(const LnCoverAtScale& ln_cover, LogReal m,
                             const DudleyGrid& grid = {});

struct GbResult {
  double gb_value = 0.0;
  double best_epsilon = 0.0;
  double delta = 0.01;
  double integral_value = 0.0;
  double risk_bound = 0.0;  // ramp_loss + gb_value
};

/// GB = 2 * dudley + 3 sqrt(ln(2/delta) / (2m)).
GbResult full_gb(const LnCoverAtScale& ln_cover, LogReal m, double ramp_loss,
                 double delta = 0.01, const DudleyGrid& grid = {});

struct NvacResult {
  Method method = Method::kOurs;
  std::string method_name;    // "constant" for the closed-form self test
  double epsilon_used = 0.0;
  double ramp_loss_input = 0.0;
  double n_star = 0.0;        // +inf when beyond double range
  double n_star_log10 = 0.0;
  double nvac_log10 = 0.0;
  std::optional<double> nvac; // m * n_star when representable
  bool converged = false;
  std::string diagnostics;
};

/// eps = (1 - ramp_loss)/10.
double nvac_epsilon(double ramp_loss);

struct NvacSearch {
  /// Exclusive lower bound on M (pdim needs M > P).
  std::optional<LogReal> floor;
  double ceiling_log10 = 400.0;
  double rel_tol = 1e-6;
};

/// Smallest integer n >= 1 with 36 ln N(eps, m n) / eps^2 <= m n, i.e.
/// (6/sqrt(mn)) sqrt(ln N) <= eps. Exponential step growth in ln M, then
/// bisection, then an integer-level correction while n fits in a double
/// mantissa. BoundError::kSampleTooSmall inside the callback counts as "not yet
/// satisfied".
NvacResult solve_nvac_generic(const LnCoverAtSize& ln_cover, double epsilon,
                              double m, const NvacSearch& search = {});

/// Full pipeline for one bound method: eps from the ramp loss, the method's
/// ln N as a function of M, and the pdim floor.
NvacResult solve_nvac(Method method, const NetworkArch& arch,
                      const ArchQuantifiers& quant, double m, double gamma,
                      double ramp_loss, LogReal sigma);

/// Closed-form self test: ln N constant in M.
NvacResult solve_nvac_constant(double ln_n, double m, double ramp_loss);

/// 36 ln N(eps, M) / eps^2 <= M evaluated at ln M, in log space.
bool nvac_condition_holds(double ln_n, double epsilon, LogReal m_total);

nlohmann::json to_json(const NvacResult& r);

}  // namespace noisycover
