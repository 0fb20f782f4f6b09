#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "protocol.hpp"
#include "states.hpp"

namespace seqmag::entanglement {

struct Bipartition {
  int M1 = 0, M2 = 0;
};
// (ceil(M/2), floor(M/2))
Bipartition equal_bipartition(int M);

// Singular values of the bipartite coefficient matrix, descending; squares
// sum to 1 for a normalized state.
Eigen::VectorXd schmidt_coefficients(const DickeVector& state,
                                     const Bipartition& split);

// Pure-state logarithmic negativity 2 log2(sum_i alpha_i), in ebits.
double log_negativity(const DickeVector& state, const Bipartition& split);

struct EntanglementTrace {
  std::vector<std::uint64_t> checkpoints;
  std::vector<Bipartition> splits;
  // mean_ln[s][i], std_error[s][i]: split s, checkpoint i
  std::vector<std::vector<double>> mean_ln;
  std::vector<std::vector<double>> std_error;
  int runs = 0;
};

// Mean logarithmic negativity along trajectories; pure states only, so
// gamma2 must be 0. Parallel across seeds base_seed + r.
EntanglementTrace entanglement_trace(const ProtocolParams& params,
                                     const std::vector<Bipartition>& splits,
                                     int runs, std::uint64_t base_seed);

}  // namespace seqmag::entanglement
