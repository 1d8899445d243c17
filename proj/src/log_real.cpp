#include "noisycover/log_real.hpp"

#include <cstdio>

namespace noisycover {

std::string LogReal::to_string() const {
  char buf[64];
  if (representable()) {
    std::snprintf(buf, sizeof buf, "%.15g", value());
    return buf;
  }
  const double l10 = log10();
  double exponent = std::floor(l10);
  double mantissa = std::pow(10.0, l10 - exponent);
  if (mantissa >= 9.9999999999999) {
    mantissa = 1.0;
    exponent += 1.0;
  }
  std::snprintf(buf, sizeof buf, "%.15ge%.0f", mantissa, exponent);
  return buf;
}

}  // namespace noisycover
