#pragma once

#include <vector>

namespace fracwkb {

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

/// Ordinary least squares y = slope x + intercept. Throws InsufficientData
/// with fewer than two points or a degenerate abscissa.
LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

/// Fit of log(y) against log(x); nonpositive entries are rejected.
LinearFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace fracwkb
