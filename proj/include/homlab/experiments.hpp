#pragma once

// Config-driven studies: pathwise convergence to the homogenised limit,
// second-moment convergence for the rescaled and white-noise limits, and the
// semigroup remainder scaling.

#include <functional>
#include <span>
#include <string>

#include "homlab/config.hpp"
#include "homlab/report.hpp"

namespace homlab {

using Progress = std::function<void(const std::string&)>;

struct MeanSE {
  double mean = 0.0;
  double se = 0.0;
  int batches = 0;
};

/// Mean and the standard error from `batches` contiguous batch means
/// (fewer when there are fewer values). Summation order is fixed.
MeanSE batch_means(std::span<const double> values, int batches);

/// Runs f(0..n-1) on up to `threads` workers (0 = hardware concurrency).
/// The first exception by index is rethrown after all workers finish.
void parallel_for(int n, int threads, const std::function<void(int)>& f);

/// Sobolev index of the error norm: just above the threshold for each limit.
double default_sobolev_index(LimitRule rule, double alpha, double eta);

ExperimentReport run_thm1_convergence(const ExperimentConfig& config, const Progress& progress = {});
ExperimentReport run_variance_study(const ExperimentConfig& config, LimitRule target, const Progress& progress = {});
ExperimentReport run_semigroup_study(const ExperimentConfig& config, const Progress& progress = {});
/// Assumption validators on the coefficients and on the noise at the first eps.
ExperimentReport run_noise_check(const ExperimentConfig& config);
/// study.paths trajectories at the first eps, one table per path.
ExperimentReport run_simulation(const ExperimentConfig& config, const Progress& progress = {});

/// Dispatches on config.study.kind.
ExperimentReport run_study(const ExperimentConfig& config, const Progress& progress = {});

}  // namespace homlab
