#pragma once

// Least-squares convergence rates on log-log data.

#include <span>
#include <utility>

namespace bergman {

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

/// Fits log err = intercept + slope * log k. Needs at least three points
/// with k > 0 and err > 0 (InvalidArgument otherwise); DegenerateFit when
/// every error is below 1e-13, i.e. the data are exact.
RateFit fit_rate(std::span<const std::pair<double, double>> points);

}  // namespace bergman
