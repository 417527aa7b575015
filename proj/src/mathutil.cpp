#include "qpcrfbi/mathutil.hpp"

namespace qpcrfbi {

double log_norm_sf(double x) {
  if (x < 0.0) {
    return std::log(norm_sf(x));
  }
  if (x <= 35.0) {
    return std::log(0.5 * std::erfc(x * 0.7071067811865475244));
  }
  // Asymptotic tail: sf(x) = pdf(x)/x (1 - 1/x^2 + 3/x^4 - 15/x^6 + ...)
  double ix2 = 1.0 / (x * x);
  double series = -ix2 * (1.0 - ix2 * (3.0 - 15.0 * ix2));
  return -0.5 * x * x - std::log(x) - 0.91893853320467274178032973640562 +
         std::log1p(series);
}

}  // namespace qpcrfbi
