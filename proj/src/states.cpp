#include "states.hpp"

#include <cmath>

namespace seqmag {

SpinEnsembleSpec SpinEnsembleSpec::homogeneous(int M, double beta) {
  SpinEnsembleSpec spec;
  spec.M = M;
  spec.groups.push_back(SpinGroup{M, {1.0, 0.0, 0.0}, beta, 0.0});
  return spec;
}

void SpinEnsembleSpec::validate() const {
  require(M >= 1, "ensemble: M must be >= 1");
  require(!groups.empty(), "ensemble: at least one group required");
  int total = 0;
  for (const auto& g : groups) {
    require(g.size >= 1, "ensemble: group sizes must be positive");
    const double b2 = g.initial_bloch[0] * g.initial_bloch[0] +
                      g.initial_bloch[1] * g.initial_bloch[1] +
                      g.initial_bloch[2] * g.initial_bloch[2];
    require(b2 <= 1.0 + 1e-12, "ensemble: |initial_bloch| must be <= 1");
    total += g.size;
  }
  require(total == M, "ensemble: group sizes must sum to M");
}

void DickeVector::check_normalized(double tol) const {
  require(std::abs(norm() - 1.0) <= tol,
          "state norm drifted beyond tolerance (integration drift)",
          ErrorCode::runtime);
}

int GroupedState::total_spins() const {
  int total = 0;
  for (const auto& g : groups) total += g.M;
  return total;
}

double log_binomial(int n, int k) {
  if (k < 0 || k > n) return -std::numeric_limits<double>::infinity();
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

CollectiveOperators collective_operators(int M) {
  require(M >= 1, "collective_operators: M must be >= 1");
  const int dim = M + 1;
  const double J = 0.5 * M;
  Eigen::MatrixXcd Jp = Eigen::MatrixXcd::Zero(dim, dim);
  Eigen::MatrixXcd Jz = Eigen::MatrixXcd::Zero(dim, dim);
  for (int k = 0; k <= M; ++k) {
    const double m = J - k;
    Jz(k, k) = m;
    if (k >= 1) Jp(k - 1, k) = std::sqrt(J * (J + 1) - m * (m + 1));
  }
  const Eigen::MatrixXcd Jm = Jp.adjoint();
  CollectiveOperators ops;
  ops.Jx = 0.5 * (Jp + Jm);
  ops.Jy = cd(0, -0.5) * (Jp - Jm);
  ops.Jz = Jz;
  return ops;
}

JxEigen jx_eigenbasis(int M) {
  const Eigen::MatrixXd Jx = collective_operators(M).Jx.real();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(Jx);
  require(solver.info() == Eigen::Success, "Jx eigendecomposition failed",
          ErrorCode::runtime);
  JxEigen out;
  out.V = solver.eigenvectors();
  // spectrum is exactly {-M/2, ..., M/2}; snap to remove solver noise
  out.d = Eigen::VectorXd::LinSpaced(M + 1, -0.5 * M, 0.5 * M);
  return out;
}

DickeVector spin_coherent(int M, const std::array<double, 3>& bloch) {
  require(M >= 1, "spin_coherent: M must be >= 1");
  const double r = std::sqrt(bloch[0] * bloch[0] + bloch[1] * bloch[1] +
                             bloch[2] * bloch[2]);
  require(std::abs(r - 1.0) <= 1e-9,
          "spin_coherent: bloch vector must be unit length");
  const double theta = std::acos(bloch[2] / r);
  const double phi = std::atan2(bloch[1], bloch[0]);
  const double lc = std::log(std::cos(0.5 * theta));
  const double ls = std::log(std::sin(0.5 * theta));
  DickeVector state;
  state.M = M;
  state.amplitudes.resize(M + 1);
  for (int k = 0; k <= M; ++k) {
    double logmag;
    if (k == 0)
      logmag = M * lc;
    else if (k == M)
      logmag = M * ls;
    else
      logmag = 0.5 * log_binomial(M, k) + (M - k) * lc + k * ls;
    state.amplitudes(k) = std::exp(logmag) * std::exp(cd(0, k * phi));
  }
  state.amplitudes.normalize();
  return state;
}

DickeVector plus_x_state(int M) { return spin_coherent(M, {1.0, 0.0, 0.0}); }

FullState dicke_to_full(const DickeVector& state) {
  const int M = state.M;
  require(M >= 1 && M <= kFullSpaceMaxM,
          "dicke_to_full: M must be in [1, 12] (memory guard)");
  FullState full;
  full.M = M;
  full.amplitudes = Eigen::VectorXcd::Zero(std::size_t(1) << M);
  std::vector<double> inv_sqrt_binom(M + 1);
  for (int k = 0; k <= M; ++k)
    inv_sqrt_binom[k] = std::exp(-0.5 * log_binomial(M, k));
  for (std::uint32_t idx = 0; idx < (std::uint32_t(1) << M); ++idx) {
    const int k = __builtin_popcount(idx);
    full.amplitudes(idx) = state.amplitudes(k) * inv_sqrt_binom[k];
  }
  return full;
}

Eigen::MatrixXcd bipartite_expand(const DickeVector& state, int M1, int M2) {
  require(M1 >= 1 && M2 >= 1 && M1 + M2 == state.M,
          "bipartite_expand: split sizes must be >= 1 and sum to M");
  const int M = state.M;
  Eigen::MatrixXcd coeff(M1 + 1, M2 + 1);
  for (int k1 = 0; k1 <= M1; ++k1) {
    for (int k2 = 0; k2 <= M2; ++k2) {
      const double w = std::exp(0.5 * (log_binomial(M1, k1) +
                                       log_binomial(M2, k2) -
                                       log_binomial(M, k1 + k2)));
      coeff(k1, k2) = state.amplitudes(k1 + k2) * w;
    }
  }
  return coeff;
}

}  // namespace seqmag
