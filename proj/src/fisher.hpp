#pragma once

#include <cstdint>
#include <vector>

#include "protocol.hpp"

namespace seqmag::fisher {

struct FisherEstimate {
  std::vector<std::uint64_t> checkpoints;
  std::vector<double> mean_fisher;  // detuning units, s^2
  std::vector<double> std_error;
  int runs = 0;
  int aborted_runs = 0;  // underflow-aborted trajectories, excluded
  double d_phi_used = 0;
};

// Monte Carlo estimate of the record Fisher information: per run the squared
// central difference of the record log-likelihood, averaged across runs.
// Run r uses seed base_seed + r; execution is parallel, the reduction is a
// deterministic fold in run order.
FisherEstimate estimate_fisher(const ProtocolParams& params, int runs,
                               std::uint64_t base_seed);

struct ExhaustiveFisher {
  double fisher = 0;             // sum_X p_X ((logp+ - logp-)/(2 d_phi))^2 tau^2
  double total_probability = 0;  // sum_X p_X, must be 1
};
// Enumerates all 2^N records (N <= 24 guard); same finite-difference
// derivative as the Monte Carlo estimator.
ExhaustiveFisher exhaustive_record_fisher(const ProtocolParams& params);

struct ScalingFit {
  double exponent = 0;
  double ci = 0;  // 95% bootstrap half-width
  int points = 0;
};
// Least-squares slope of log(mean_FI) vs log(N) over checkpoints with
// N_lo <= N <= N_hi; needs at least 5 checkpoints in the window.
ScalingFit fit_scaling_exponent(const FisherEstimate& estimate,
                                std::uint64_t n_lo, std::uint64_t n_hi);
// Same fit for an arbitrary (x, y) power law, used by parameter sweeps.
ScalingFit fit_power_law(const std::vector<double>& x,
                         const std::vector<double>& y, int min_points = 2);

}  // namespace seqmag::fisher
