#pragma once

#include <cmath>
#include <compare>
#include <limits>
#include <stdexcept>
#include <string>

namespace noisycover {

/// A strictly positive real held by its natural logarithm.
///
/// Sample counts in the NVAC search and noise scales in the sigma sweep run
/// far outside double range (M up to 1e400, sigma down to 1e-350), so every
/// bound formula consumes these through ln() only.
class LogReal {
 public:
  LogReal() = default;

  static LogReal from_value(double x) {
    if (!(x > 0.0) || !std::isfinite(x)) {
      throw std::invalid_argument("LogReal requires a finite positive value");
    }
    return LogReal(std::log(x));
  }
  static LogReal from_log(double ln_x) {
    if (!std::isfinite(ln_x)) {
      throw std::invalid_argument("LogReal requires a finite logarithm");
    }
    return LogReal(ln_x);
  }
  static LogReal from_log10(double log10_x) {
    return from_log(log10_x * std::log(10.0));
  }

  double ln() const { return ln_; }
  double log10() const { return ln_ / std::log(10.0); }

  /// exp(ln); 0 or +inf outside double range.
  double value() const { return std::exp(ln_); }
  bool representable() const {
    return ln_ < std::log(std::numeric_limits<double>::max()) &&
           ln_ > std::log(std::numeric_limits<double>::min());
  }

  friend LogReal operator*(LogReal a, LogReal b) { return LogReal(a.ln_ + b.ln_); }
  friend LogReal operator/(LogReal a, LogReal b) { return LogReal(a.ln_ - b.ln_); }
  friend auto operator<=>(LogReal a, LogReal b) = default;

  /// Decimal text that survives values outside double range, e.g. "1e-350".
  std::string to_string() const;

 private:
  explicit LogReal(double ln_x) : ln_(ln_x) {}
  double ln_ = 0.0;
};

}  // namespace noisycover
