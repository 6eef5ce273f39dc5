#include "bergman/fit.hpp"

#include <cmath>

#include "bergman/error.hpp"

namespace bergman {

RateFit fit_rate(std::span<const std::pair<double, double>> points) {
  if (points.size() < 3) throw Error(ErrorCode::InvalidArgument, "a rate fit needs at least three points");
  bool exact = true;
  for (const auto& [k, err] : points) exact = exact && !(err >= 1e-13);
  if (exact) throw Error(ErrorCode::DegenerateFit, "all errors are below 1e-13 (exact)");
  double sx = 0.0, sy = 0.0;
  for (const auto& [k, err] : points) {
    if (!(k > 0.0) || !(err > 0.0) || !std::isfinite(err)) {
      throw Error(ErrorCode::InvalidArgument, "rate fit needs positive finite k and errors");
    }
    sx += std::log(k);
    sy += std::log(err);
  }
  const double n = static_cast<double>(points.size());
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& [k, err] : points) {
    const double x = std::log(k) - mx, y = std::log(err) - my;
    sxx += x * x;
    sxy += x * y;
    syy += y * y;
  }
  if (sxx == 0.0) throw Error(ErrorCode::DegenerateFit, "all k values coincide");
  RateFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = syy == 0.0 ? 1.0 : sxy * sxy / (sxx * syy);
  return fit;
}

}  // namespace bergman
