#include "noisycover/bounds.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace noisycover {

namespace {

const double kLnMaxDouble = std::log(std::numeric_limits<double>::max());

void check_common(const BoundQuery& q) {
  if (!(q.epsilon > 0.0) || !std::isfinite(q.epsilon)) {
    throw BoundError(BoundError::Kind::kInvalidQuery, "epsilon must be a positive finite value");
  }
  if (!(q.gamma > 0.0) || !std::isfinite(q.gamma)) {
    throw BoundError(BoundError::Kind::kInvalidQuery, "gamma must be a positive finite value");
  }
  if (q.m.ln() < 0.0) {
    throw BoundError(BoundError::Kind::kInvalidQuery, "sample count m must be >= 1");
  }
  if (q.arch.widths.empty()) {
    throw BoundError(BoundError::Kind::kInvalidQuery, "query has no architecture");
  }
}

std::int64_t require(const std::optional<std::int64_t>& v, const char* name) {
  if (!v) {
    throw BoundError(BoundError::Kind::kInvalidQuery,
                     std::string(name) + " is undefined for a single-layer network");
  }
  return *v;
}

LnCover finish(const BoundQuery& q, double ln_n) {
  if (!std::isfinite(ln_n)) {
    throw BoundError(BoundError::Kind::kOverflow, "ln N is not finite",
                     std::numeric_limits<double>::infinity());
  }
  // A covering number is at least 1; a negative closed form carries no extra
  // information.
  return LnCover{std::max(0.0, ln_n), q};
}

/// The un-margined noisy-network bound with scale ln_eps in log space.
double ours_core(const NetworkArch& arch, double ln_eps, double ln_m, double ln_sigma) {
  const int t = arch.depth();
  if (t < 2) {
    throw BoundError(BoundError::Kind::kInvalidQuery,
                     "the noisy-network bound needs at least two layers");
  }
  const double ln_t = std::log(static_cast<double>(t));
  const double p_t = arch.layer_dim(t);
  const double half_ln_pt = 0.5 * std::log(p_t);
  const double ln_eps_sigma = ln_eps + ln_sigma;

  double total = 0.0;
  for (int i = 2; i <= t; ++i) {
    const double p_prev = arch.layer_dim(i - 1);
    const double p_i = arch.layer_dim(i);
    // x = ln(5 T sqrt(p_T) p_{i-1} / (eps sigma)); the inner logarithm is
    // ln(e^x - 1) and must be >= 0 for the square root.
    const double x = std::log(5.0) + ln_t + half_ln_pt + std::log(p_prev) - ln_eps_sigma;
    if (!(x > std::numbers::ln2)) {
      throw BoundError(BoundError::Kind::kLogDomain,
                       "noisy-network bound: eps*sigma too large for layer " +
                           std::to_string(i) + " (inner logarithm out of domain)");
    }
    const double inner = x + std::log1p(-std::exp(-x));
    const double term = std::log(30.0) + 1.5 * (ln_t + half_ln_pt) +
                        2.5 * std::log(p_prev) + 0.5 * std::log(inner) -
                        1.5 * ln_eps - 2.0 * ln_sigma + std::log(x);
    total += p_i * p_prev * term;
  }
  const double d_p1 = static_cast<double>(arch.layer_dim(0)) * arch.layer_dim(1);
  total += d_p1 * (ln_t + 1.0 + ln_m + half_ln_pt - std::numbers::ln2 - ln_eps_sigma);
  return total;
}

}  // namespace

std::string_view to_string(Method m) {
  switch (m) {
    case Method::kOurs: return "ours";
    case Method::kNormBased: return "norm_based";
    case Method::kPdim: return "pdim";
    case Method::kLipschitz: return "lipschitz";
    case Method::kSpectral: return "spectral";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  for (Method m : kAllMethods) {
    if (to_string(m) == name) return m;
  }
  throw std::invalid_argument("unknown bound method '" + std::string(name) + "'");
}

double LnCover::log10_n() const { return ln_n / std::numbers::ln10; }

LnCover ln_cover_ours(const BoundQuery& q) {
  check_common(q);
  // Ramp composition rescales the cover radius to gamma*eps/2.
  const double ln_eps = std::log(q.gamma) + std::log(q.epsilon) - std::numbers::ln2;
  return finish(q, ours_core(q.arch, ln_eps, q.m.ln(), q.sigma.ln()));
}

double ln_cover_ours_unmargined(const NetworkArch& arch, double epsilon, LogReal m,
                                LogReal sigma) {
  if (!(epsilon > 0.0)) {
    throw BoundError(BoundError::Kind::kInvalidQuery, "epsilon must be positive");
  }
  return std::max(0.0, ours_core(arch, std::log(epsilon), m.ln(), sigma.ln()));
}

LnCover ln_cover_norm_based(const BoundQuery& q) {
  check_common(q);
  if (!(q.quant.v > 0.0)) {
    throw BoundError(BoundError::Kind::kInvalidQuery, "norm-based bound needs V > 0");
  }
  const double t = q.arch.depth();
  const double p_t = q.arch.num_classes();
  const double d = q.arch.input_dim;
  // ln(ln N) = ln(ln 2 * log2 N)
  const double ln_ln_n = std::log(std::numbers::ln2) + std::log(p_t / 2.0) +
                         2.0 * t * std::log(2.0 * std::sqrt(p_t) / (q.gamma * q.epsilon)) +
                         t * (t + 1.0) * std::log(2.0 * q.quant.v) +
                         std::log(std::log2(2.0 * d + 2.0));
  if (ln_ln_n > kLnMaxDouble) {
    const double log10_ln_n = ln_ln_n / std::numbers::ln10;
    throw BoundError(BoundError::Kind::kOverflow,
                     "bound astronomically vacuous: log10(ln N) = " + std::to_string(log10_ln_n),
                     log10_ln_n);
  }
  return finish(q, std::exp(ln_ln_n));
}

double pdim_constant(const ArchQuantifiers& quant) {
  const double w = static_cast<double>(require(quant.w_rvo, "W_rvo")) + 2.0;
  const double r = static_cast<double>(require(quant.r_rvo, "r_rvo"));
  return (w * r) * (w * r) + 11.0 * w * r * std::log2(18.0 * w * r * r);
}

LnCover ln_cover_pdim(const BoundQuery& q) {
  check_common(q);
  const double p = pdim_constant(q.quant);
  const double ln_p = std::log(p);
  if (!(q.m.ln() > ln_p)) {
    throw BoundError(BoundError::Kind::kSampleTooSmall,
                     "pseudo-dimension bound needs m > P = " + std::to_string(p), p);
  }
  const double p_t = q.arch.num_classes();
  const double ln_arg = std::numbers::ln2 + 0.5 * std::log(p_t) + 1.0 + q.m.ln() - ln_p -
                        std::log(q.gamma) - std::log(q.epsilon);
  return finish(q, p_t * p * ln_arg);
}

LnCover ln_cover_lipschitz(const BoundQuery& q) {
  check_common(q);
  const double w = static_cast<double>(require(q.quant.w_rvo, "W_rvo"));
  const double v = q.quant.v;
  if (!(v > 1.0)) {
    throw BoundError(BoundError::Kind::kLipschitzV, "Lipschitz bound undefined for V <= 1");
  }
  const double p_t = q.arch.num_classes();
  const double t = q.arch.depth();
  const double ln_arg = std::log(4.0) + 1.0 + q.m.ln() + 0.5 * std::log(p_t) + std::log(w) +
                        t * std::log(v) - std::log(q.gamma) - std::log(q.epsilon) -
                        std::log(v - 1.0);
  return finish(q, p_t * w * ln_arg);
}

LnCover ln_cover_spectral(const BoundQuery& q) {
  check_common(q);
  const auto& s = q.quant.s;
  const auto& b = q.quant.b;
  if (s.size() != static_cast<std::size_t>(q.arch.depth()) || b.size() != s.size()) {
    throw BoundError(BoundError::Kind::kInvalidQuery,
                     "spectral bound needs one (s_i, b_i) pair per layer");
  }
  bool zero_product = !(q.quant.x_frob > 0.0);
  double sum = 0.0;
  double ln_prod = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (b[i] > 0.0 && !(s[i] > 0.0)) {
      throw BoundError(BoundError::Kind::kSpectralZeroNorm,
                       "spectral bound: s_" + std::to_string(i + 1) + " = 0 with b_" +
                           std::to_string(i + 1) + " > 0");
    }
    if (!(s[i] > 0.0)) {
      zero_product = true;
      continue;
    }
    sum += std::cbrt((b[i] / s[i]) * (b[i] / s[i]));
    ln_prod += 2.0 * std::log(s[i]);
  }
  if (zero_product || sum == 0.0) return finish(q, 0.0);
  const double w = static_cast<double>(q.quant.w);
  const double ln_ln_n = std::log(4.0) + 2.0 * std::log(q.quant.x_frob) +
                         std::log(std::log(2.0 * w * w)) - 2.0 * std::log(q.gamma) -
                         2.0 * std::log(q.epsilon) + ln_prod + 3.0 * std::log(sum);
  if (ln_ln_n > kLnMaxDouble) {
    const double log10_ln_n = ln_ln_n / std::numbers::ln10;
    throw BoundError(BoundError::Kind::kOverflow,
                     "bound astronomically vacuous: log10(ln N) = " + std::to_string(log10_ln_n),
                     log10_ln_n);
  }
  return finish(q, std::exp(ln_ln_n));
}

LnCover ln_cover(const BoundQuery& q) {
  switch (q.method) {
    case Method::kOurs: return ln_cover_ours(q);
    case Method::kNormBased: return ln_cover_norm_based(q);
    case Method::kPdim: return ln_cover_pdim(q);
    case Method::kLipschitz: return ln_cover_lipschitz(q);
    case Method::kSpectral: return ln_cover_spectral(q);
  }
  throw std::logic_error("unhandled method");
}

bool depends_on_m(Method m) {
  return m == Method::kOurs || m == Method::kPdim || m == Method::kLipschitz;
}

bool depends_on_weights(Method m) {
  return m == Method::kNormBased || m == Method::kLipschitz || m == Method::kSpectral;
}

nlohmann::json to_json(const LnCover& c) {
  const auto& q = c.query;
  return {{"method", to_string(q.method)},
          {"epsilon", q.epsilon},
          {"m", q.m.value()},
          {"log10_m", q.m.log10()},
          {"gamma", q.gamma},
          {"sigma", q.sigma.value()},
          {"log10_sigma", q.sigma.log10()},
          {"ln_n", c.ln_n},
          {"log10_n", c.log10_n()}};
}

}  // namespace noisycover
