#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "rng.hpp"
#include "states.hpp"

namespace seqmag {

struct ProtocolParams {
  int M = 1;
  double beta = 0.0;        // entangling angle per measurement, (0, pi/4]
  double phi = 0.0;         // detuning phase per step, phi = delta * tau_m
  double tau_m = 1.0;       // seconds between measurements
  double gamma2 = 0.0;      // per-step nuclear dephasing rate tau_m / T2
  double polarization = 1.0;
  double alpha = 0.5 * kPi;  // sensor readout-basis angle; pi/2 = Y basis
  std::uint64_t n_max = 1;
  double d_phi = 0.0;        // finite-difference half-step; <= 0 -> default
  bool mixed_initial = false;  // sample +-x per spin each run
  std::optional<SpinEnsembleSpec> ensemble;  // default: homogeneous +x
  std::vector<std::uint64_t> checkpoints;    // empty -> powers of two

  void validate() const;
  SpinEnsembleSpec effective_ensemble() const;
  double effective_d_phi() const;
  std::vector<std::uint64_t> effective_checkpoints() const;
};

// Default checkpoint grids on [1, n_max]: powers of two, optionally with
// half-octave midpoints.
std::vector<std::uint64_t> power_of_two_checkpoints(std::uint64_t n_max,
                                                    bool half_octave = false,
                                                    std::uint64_t n_min = 2);

struct TrajectoryCheckpoint {
  std::uint64_t n = 0;
  double logp_center = 0, logp_plus = 0, logp_minus = 0;
  double norm_drift = 0;  // |norm - 1| after the renormalized update
};

struct TrajectoryRecord {
  std::uint64_t seed = 0;
  std::uint64_t n_steps = 0;
  std::vector<std::uint64_t> outcome_words;  // bit n of word n/64; 1 = '-'
  std::vector<TrajectoryCheckpoint> checkpoints;

  bool outcome(std::uint64_t n) const {
    return (outcome_words[n >> 6] >> (n & 63)) & 1;
  }
};

// Conditional evolution operators of the register given sensor outcome.
// U+ = (e^{-i 2 beta Jx} + e^{-i alpha} e^{+i 2 beta Jx})/2 in the Dicke
// basis; U- carries the opposite sign. U+^dag U+ + U-^dag U- = 1.
struct EntanglingKraus {
  Eigen::MatrixXcd U_plus, U_minus;
  Eigen::MatrixXcd branch_neg;  // e^{-i 2 beta Jx}
  Eigen::MatrixXcd branch_pos;  // e^{+i 2 beta Jx}
};
EntanglingKraus entangling_kraus(int M, double beta, double alpha = 0.5 * kPi);

// diag( exp(-i phi (M/2 - k)) ), k = 0..M
Eigen::VectorXcd free_evolution(int M, double phi);

// p(+) for a normalized state; norm drift beyond 1e-8 is a hard error.
double measure_probability(const DickeVector& state, const EntanglingKraus& k);
// Product state: the two product-unitary branches are accumulated per group
// and summed coherently before squaring.
double measure_probability(const GroupedState& state,
                           const std::vector<EntanglingKraus>& per_group,
                           double alpha = 0.5 * kPi);

// Stochastic single-trajectory unraveling of collective dephasing: one
// z-rotation e^{-i theta Jz} per call with theta ~ N(0, 2 gamma2), so that
// single-spin transverse coherence decays as e^{-gamma2} per step on average.
DickeVector dephase(const DickeVector& state, double gamma2, Rng& rng);
GroupedState dephase(const GroupedState& state, double gamma2, Rng& rng);

// Draws |+x> / |-x> per spin with probability (1 +- P)/2 and regroups into
// two permutation-symmetric groups (the all-one-sign edge case gives one).
GroupedState sample_mixed_initial(const SpinEnsembleSpec& spec, double P,
                                  Rng& rng);

// ---------------------------------------------------------------------------
// Trajectory engine. One step = free precession (+ dephasing) followed by a
// weak collective measurement; the post-measurement state is renormalized.
// Sibling registers at phi +- d_phi are driven through the same outcomes and
// accumulate the record log-likelihood for finite-difference estimation.
//
// gamma2 = 0 evolves pure states in the per-group Jx eigenbasis (one dense
// mode-multiply per step). gamma2 > 0 evolves density matrices so that the
// record likelihood is taken under the averaged dephasing channel
// rho_kk' *= exp(-gamma2 (m_k - m_k')^2) rather than one noise realization.
class TrajectoryEngine {
 public:
  struct Options {
    bool track_siblings = true;
    bool record_outcomes = false;
  };

  TrajectoryEngine(const ProtocolParams& params, std::uint64_t seed);
  TrajectoryEngine(const ProtocolParams& params, std::uint64_t seed,
                   Options opt);
  ~TrajectoryEngine();
  TrajectoryEngine(TrajectoryEngine&&) noexcept;
  TrajectoryEngine& operator=(TrajectoryEngine&&) noexcept;

  // Samples (or forces) one outcome; returns it (false = '+', true = '-').
  bool step();
  bool step_forced(bool outcome);

  std::uint64_t n_done() const;
  double last_p_plus() const;
  double logp(int sibling) const;  // 0 = center, 1 = +d_phi, 2 = -d_phi
  double norm_drift() const;       // |norm - 1| of the center register
  // Center state as Dicke amplitudes in the Jz basis (pure path only).
  DickeVector state_dicke() const;
  bool is_pure_path() const;
  const std::vector<std::uint64_t>& outcome_words() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Full protocol run with checkpointed likelihoods; deterministic in
// (params, seed). A per-step probability below 1e-300 aborts with a
// diagnostic (ErrorCode::runtime).
TrajectoryRecord run_trajectory(const ProtocolParams& params,
                                std::uint64_t seed);

}  // namespace seqmag
