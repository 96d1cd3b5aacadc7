#include "edgesched/sim/power.hpp"

#include <cmath>

#include "edgesched/core/errors.hpp"

namespace edgesched {

double interpolate_power(const Host& host, double utilization) {
  if (!(utilization >= 0.0 && utilization <= 1.0)) {
    throw DomainError("utilization " + std::to_string(utilization) + " outside [0,1]");
  }
  const double pos = utilization * 10.0;
  const double nearest = std::round(pos);
  // Grid points come back verbatim; 0.3 * 10 is not exactly 3 in binary.
  if (std::abs(pos - nearest) < 1e-9) {
    return host.power_curve[static_cast<std::size_t>(nearest)];
  }
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const double frac = pos - static_cast<double>(lo);
  return host.power_curve[lo] + (host.power_curve[lo + 1] - host.power_curve[lo]) * frac;
}

}  // namespace edgesched
