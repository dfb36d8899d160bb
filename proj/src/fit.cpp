#include "homlab/fit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "homlab/errors.hpp"

namespace homlab {

LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) throw Error(ErrorCode::FitFailed, "need at least two matched points");
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw Error(ErrorCode::FitFailed, "degenerate abscissae");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  fit.residuals.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    fit.residuals[i] = y[i] - (fit.intercept + fit.slope * x[i]);
    ss_res += fit.residuals[i] * fit.residuals[i];
  }
  fit.rms = std::sqrt(ss_res / n);
  fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  return fit;
}

RateFit fit_power_law(std::span<const double> x, std::span<const double> y, bool drop_outlier_at_largest_x,
                      int min_points) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] > 0.0 && y[i] > 0.0) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    }
  }
  if (static_cast<int>(lx.size()) < min_points) {
    throw Error(ErrorCode::FitFailed, "power-law fit needs " + std::to_string(min_points) + " positive points");
  }
  RateFit out;
  out.line = fit_line(lx, ly);
  out.points_used = static_cast<int>(lx.size());
  if (drop_outlier_at_largest_x && static_cast<int>(lx.size()) > min_points) {
    // The in-sample residual of a single point is bounded by sqrt(n) * rms, so
    // a small set can never flag it. Compare instead the residual of the point
    // against the line fitted without it.
    const auto largest = std::distance(lx.begin(), std::max_element(lx.begin(), lx.end()));
    std::vector<double> rx = lx, ry = ly;
    rx.erase(rx.begin() + largest);
    ry.erase(ry.begin() + largest);
    const LinearFit reduced = fit_line(rx, ry);
    const double predicted = reduced.intercept + reduced.slope * lx[largest];
    if (std::abs(ly[largest] - predicted) > 2.0 * out.line.rms + 1e-12) {
      out.line = reduced;
      out.excluded_largest = true;
      out.points_used = static_cast<int>(rx.size());
    }
  }
  out.rate = out.line.slope;
  return out;
}

DecayFit fit_exponential_decay(std::span<const double> t, std::span<const double> y, double t0, double t1) {
  std::vector<double> tx, ly;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] >= t0 && t[i] <= t1 && std::abs(y[i]) > 0.0) {
      tx.push_back(t[i]);
      ly.push_back(std::log(std::abs(y[i])));
    }
  }
  if (tx.size() < 3) throw Error(ErrorCode::FitFailed, "fewer than three points in the decay window");
  const LinearFit line = fit_line(tx, ly);
  return DecayFit{-line.slope, line.r_squared, static_cast<int>(tx.size())};
}

}  // namespace homlab
