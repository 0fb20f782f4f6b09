#pragma once

#include <Eigen/Dense>
#include <array>
#include <vector>

#include "common.hpp"

namespace seqmag {

// One permutation-symmetric group of spins-1/2. initial_bloch with norm < 1
// encodes partial polarization (only meaningful for sampled mixed states).
struct SpinGroup {
  int size = 0;
  std::array<double, 3> initial_bloch{1.0, 0.0, 0.0};
  double beta = 0.0;  // per-measurement entangling angle, radians
  double phi0 = 0.0;  // initial in-plane phase offset, radians
};

struct SpinEnsembleSpec {
  int M = 0;
  std::vector<SpinGroup> groups;

  // Homogeneous register: all spins along +x with a common coupling.
  static SpinEnsembleSpec homogeneous(int M, double beta);
  void validate() const;  // sizes sum to M, |bloch| <= 1
};

// Pure collective state of M spins in the (M+1)-dimensional symmetric
// subspace, stored in the Jz eigenbasis. Index k = number of excitations,
// Jz eigenvalue m_k = M/2 - k.
struct DickeVector {
  int M = 0;
  Eigen::VectorXcd amplitudes;  // length M+1

  double norm() const { return amplitudes.norm(); }
  void check_normalized(double tol = 1e-8) const;
};

// Tensor product of per-group Dicke vectors.
struct GroupedState {
  std::vector<DickeVector> groups;
  int total_spins() const;
};

// Small-M reference representation over the full 2^M space.
// Qubit q maps to bit q of the basis index; a set bit means a flipped spin.
struct FullState {
  int M = 0;
  Eigen::VectorXcd amplitudes;  // length 2^M
};

inline constexpr int kFullSpaceMaxM = 12;  // memory guard for the 2^M oracle

// log C(n, k), valid for n up to ~10^6 (lgamma-based)
double log_binomial(int n, int k);

// Angular momentum matrices for J = M/2 in the Jz eigenbasis,
// Jz = diag(M/2, M/2-1, ..., -M/2).
struct CollectiveOperators {
  Eigen::MatrixXcd Jx, Jy, Jz;
};
CollectiveOperators collective_operators(int M);

// Jx is real symmetric; Jx = V diag(d) V^T with V orthogonal and
// d = (-M/2, ..., M/2) ascending. Basis bridge used by the trajectory engine.
struct JxEigen {
  Eigen::MatrixXd V;
  Eigen::VectorXd d;
};
JxEigen jx_eigenbasis(int M);

// Spin coherent state |theta, phi>^(x M) in the Dicke basis; bloch must be
// unit length. (+1,0,0) gives |+x>^(x M).
DickeVector spin_coherent(int M, const std::array<double, 3>& bloch);
DickeVector plus_x_state(int M);

// Dicke level k -> normalized symmetric superposition of all C(M,k)
// basis states with k flips. M <= 12.
FullState dicke_to_full(const DickeVector& state);

// Coefficient matrix of the (M1 | M2) bipartition:
// C(k1, k2) = amp(k1+k2) * sqrt( C(M1,k1) C(M2,k2) / C(M,k1+k2) ).
// Squared Frobenius norm equals the squared state norm.
Eigen::MatrixXcd bipartite_expand(const DickeVector& state, int M1, int M2);

}  // namespace seqmag
