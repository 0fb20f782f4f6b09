#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "protocol.hpp"
#include "states.hpp"

namespace seqmag::oracle {

// Reference protocol engine over the full 2^M space, independent of the
// Dicke-basis implementation. Supports per-spin couplings and initial
// orientations; M <= 12.
class FullSpaceEngine {
 public:
  struct Spin {
    double beta = 0.0;
    double phase0 = 0.0;  // initial in-plane angle from +x
    bool flipped = false; // start along -x instead of +x
  };

  FullSpaceEngine(std::vector<Spin> spins, double phi, double alpha,
                  std::uint64_t seed);
  // Homogeneous register along +x.
  FullSpaceEngine(int M, double beta, double phi, std::uint64_t seed,
                  double alpha = 0.5 * kPi);

  bool step();                    // samples via the same uniform-draw rule
  bool step_forced(bool outcome);
  double last_p_plus() const { return last_p_; }
  double logp() const { return logp_; }
  const Eigen::VectorXcd& state() const { return psi_; }
  std::uint64_t n_done() const { return n_; }

 private:
  bool advance(bool forced, bool outcome);
  void apply_branch(Eigen::VectorXcd& v, int sign) const;

  std::vector<Spin> spins_;
  int M_ = 0;
  double phi_ = 0, alpha_ = 0;
  Rng rng_;
  Eigen::VectorXcd psi_, work_a_, work_b_;
  Eigen::VectorXcd free_diag_;
  double last_p_ = 0.5, logp_ = 0;
  std::uint64_t n_ = 0;
};

// log-probability of a forced outcome record, full-space evaluation
double full_record_logp(int M, double beta, double phi, double alpha,
                        const std::vector<bool>& outcomes);

// Averaged-state propagation in the full space with per-spin dephasing
// (phase damping with coherence factor e^{-gamma2} per step per spin).
// Returns <Jx> after n steps of free evolution + dephasing, no measurement.
double full_space_dephased_jx(int M, double phi, double gamma2, int steps);

// ---------------------------------------------------------------------------
// Built-in cross-checks (CLI `validate`).
struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ValidationReport {
  std::vector<CheckResult> checks;
  bool all_passed() const;
  std::string to_string() const;
};

// max_M bounds the full-space comparisons (clamped to [2, 12]).
ValidationReport run_validation(int max_M, std::uint64_t seed = 20240901);

}  // namespace seqmag::oracle
