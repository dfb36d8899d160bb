#pragma once

#include <span>
#include <vector>

namespace homlab {

/// Ordinary least squares y = intercept + slope * x.
struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double rms = 0.0;
  std::vector<double> residuals;
};

LinearFit fit_line(std::span<const double> x, std::span<const double> y);

/// Power-law fit y ~ C x^rate, i.e. a line through (log x, log y).
/// When `drop_outlier_at_largest_x` is set and the point with the largest x
/// has |residual| > 2 * rms, the fit is redone without it.
struct RateFit {
  LinearFit line;
  double rate = 0.0;
  bool excluded_largest = false;
  int points_used = 0;
};

/// Throws FitFailed with fewer than `min_points` positive data points.
RateFit fit_power_law(std::span<const double> x, std::span<const double> y, bool drop_outlier_at_largest_x,
                      int min_points = 3);

/// Exponential decay y ~ A exp(-rate t) fitted on log|y| over t in [t0, t1].
struct DecayFit {
  double rate = 0.0;
  double r_squared = 0.0;
  int points_used = 0;
};

DecayFit fit_exponential_decay(std::span<const double> t, std::span<const double> y, double t0, double t1);

}  // namespace homlab
