#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include <json.hpp>

#include "noisycover/log_real.hpp"
#include "noisycover/mlp.hpp"
#include "noisycover/norms.hpp"

namespace noisycover {

enum class Method { kOurs, kNormBased, kPdim, kLipschitz, kSpectral };

std::string_view to_string(Method m);
/// Accepts "ours", "norm_based", "pdim", "lipschitz", "spectral".
Method parse_method(std::string_view name);
inline constexpr Method kAllMethods[] = {Method::kOurs, Method::kLipschitz,
                                         Method::kPdim, Method::kSpectral,
                                         Method::kNormBased};

/// One evaluation of ln N_U(epsilon, F_gamma, m, l2-extended).
struct BoundQuery {
  Method method = Method::kOurs;
  double epsilon = 0.1;
  LogReal m = LogReal::from_value(1.0);
  double gamma = 0.1;
  LogReal sigma = LogReal::from_value(0.05);  // used by kOurs only
  NetworkArch arch;
  ArchQuantifiers quant;
};

struct LnCover {
  double ln_n = 0.0;
  BoundQuery query;

  double log10_n() const;
};

/// A bound that cannot be evaluated for this query. `kind` lets callers react
/// (the NVAC solver uses kSampleTooSmall to raise its search floor).
class BoundError : public std::domain_error {
 public:
  enum class Kind {
    kInvalidQuery,     // non-positive epsilon/gamma, missing quantifier ...
    kLogDomain,        // an inner logarithm leaves its domain
    kSampleTooSmall,   // pdim: m <= P; `required` holds P
    kLipschitzV,       // V <= 1
    kSpectralZeroNorm, // s_i = 0 with b_i > 0
    kOverflow,         // ln N beyond double range; `required` holds log10(ln N)
  };

  BoundError(Kind kind, const std::string& what, double required = 0.0)
      : std::domain_error(what), kind_(kind), required_(required) {}
  Kind kind() const { return kind_; }
  double required() const { return required_; }

 private:
  Kind kind_;
  double required_;
};

/// Noisy-network bound for the ramp-loss class:
///   sum_{i=2}^T p_i p_{i-1} ln(30 (2T sqrt(p_T))^{3/2} p_{i-1}^{5/2}
///       sqrt(ln(((10/gamma) T sqrt(p_T) p_{i-1} - eps sigma)/(eps sigma)))
///       / ((gamma eps)^{3/2} sigma^2) * ln(10 T p_{i-1} sqrt(p_T)/(gamma eps sigma)))
///   + d p_1 ln(T e m sqrt(p_T)/(gamma eps sigma)).
/// Requires T >= 2 and, per layer, (10/gamma) T sqrt(p_T) p_{i-1} > 2 eps sigma
/// so that the square root sees a nonnegative logarithm.
LnCover ln_cover_ours(const BoundQuery& q);

/// The same bound for the network class itself (no ramp composition):
/// ln_cover_ours at epsilon' = gamma*epsilon/2 is exactly this at epsilon.
double ln_cover_ours_unmargined(const NetworkArch& arch, double epsilon,
                                LogReal m, LogReal sigma);

/// log2 N <= (p_T/2) (2 sqrt(p_T)/(gamma eps))^{2T} (2V)^{T(T+1)} log2(2d+2).
LnCover ln_cover_norm_based(const BoundQuery& q);

/// Pseudo-dimension constant P for the per-output real-valued networks.
double pdim_constant(const ArchQuantifiers& quant);

/// ln N <= p_T P ln(2 sqrt(p_T) e m / (P gamma eps)), valid for m > P.
LnCover ln_cover_pdim(const BoundQuery& q);

/// ln N <= p_T W_rvo ln(4 e m sqrt(p_T) W_rvo V^T / (gamma eps (V-1))), V > 1.
LnCover ln_cover_lipschitz(const BoundQuery& q);

/// ln N <= 4 |X|_F^2 ln(2 w^2)/(gamma^2 eps^2) prod s_i^2 (sum (b_i/s_i)^{2/3})^3.
LnCover ln_cover_spectral(const BoundQuery& q);

/// Dispatch on q.method.
LnCover ln_cover(const BoundQuery& q);

/// True for methods whose value changes with m.
bool depends_on_m(Method m);
/// True for methods that read weight norms (need a trained checkpoint).
bool depends_on_weights(Method m);

/// {method, epsilon, m, gamma, sigma, ln_n, log10_n} plus log10_m and
/// log10_sigma, which stay exact when m or sigma leave double range.
nlohmann::json to_json(const LnCover& c);

}  // namespace noisycover
