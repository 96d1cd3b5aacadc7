#pragma once

#include "edgesched/core/model.hpp"

namespace edgesched {

/// Watts drawn by `host` at CPU utilization `utilization` in [0,1], linearly
/// interpolated between the two bracketing points of the 10% power grid.
/// Throws DomainError outside [0,1].
double interpolate_power(const Host& host, double utilization);

}  // namespace edgesched
