#include "oracle.hpp"

#include <cmath>
#include <sstream>

#include "entanglement.hpp"
#include "fisher.hpp"

namespace seqmag::oracle {

FullSpaceEngine::FullSpaceEngine(std::vector<Spin> spins, double phi,
                                 double alpha, std::uint64_t seed)
    : spins_(std::move(spins)),
      M_(static_cast<int>(spins_.size())),
      phi_(phi),
      alpha_(alpha),
      rng_(seed) {
  require(M_ >= 1 && M_ <= kFullSpaceMaxM,
          "full-space engine: M must be in [1, 12]");
  const std::size_t dim = std::size_t(1) << M_;
  psi_.resize(dim);
  work_a_.resize(dim);
  work_b_.resize(dim);
  // product state: spin q along (cos a, sin a, 0), a = phase0 (+pi if flipped)
  psi_.setConstant(1.0);
  for (int q = 0; q < M_; ++q) {
    const double a = spins_[q].phase0 + (spins_[q].flipped ? kPi : 0.0);
    const cd up = 1.0 / std::sqrt(2.0);
    const cd dn = std::exp(cd(0, a)) / std::sqrt(2.0);
    for (std::size_t idx = 0; idx < dim; ++idx)
      psi_(idx) *= ((idx >> q) & 1) ? dn : up;
  }
  free_diag_.resize(dim);
  for (std::size_t idx = 0; idx < dim; ++idx) {
    const int flips = __builtin_popcountll(idx);
    free_diag_(idx) = std::exp(cd(0, -phi_ * (0.5 * M_ - flips)));
  }
}

FullSpaceEngine::FullSpaceEngine(int M, double beta, double phi,
                                 std::uint64_t seed, double alpha)
    : FullSpaceEngine(std::vector<Spin>(std::size_t(M), Spin{beta, 0.0, false}),
                      phi, alpha, seed) {}

void FullSpaceEngine::apply_branch(Eigen::VectorXcd& v, int sign) const {
  // exp(-i sign beta_q sigma_x^(q)) applied per spin
  const std::size_t dim = v.size();
  for (int q = 0; q < M_; ++q) {
    const double b = sign * spins_[q].beta;
    const cd cmat = std::cos(b);
    const cd smat = cd(0, -std::sin(b));
    const std::size_t bit = std::size_t(1) << q;
    for (std::size_t idx = 0; idx < dim; ++idx) {
      if (idx & bit) continue;
      const cd v0 = v(idx), v1 = v(idx | bit);
      v(idx) = cmat * v0 + smat * v1;
      v(idx | bit) = smat * v0 + cmat * v1;
    }
  }
}

bool FullSpaceEngine::advance(bool forced, bool outcome) {
  psi_.array() *= free_diag_.array();
  work_a_ = psi_;
  apply_branch(work_a_, +1);
  work_b_ = psi_;
  apply_branch(work_b_, -1);
  const cd phase = std::exp(cd(0, -alpha_));
  Eigen::VectorXcd u_plus = 0.5 * (work_a_ + phase * work_b_);
  double p_plus = std::min(1.0, std::max(0.0, u_plus.squaredNorm()));
  last_p_ = p_plus;
  bool out = forced ? outcome : (rng_.uniform() >= p_plus);
  if (!out) {
    psi_ = u_plus / std::sqrt(p_plus);
    logp_ += std::log(p_plus);
  } else {
    Eigen::VectorXcd u_minus = 0.5 * (work_a_ - phase * work_b_);
    const double p_minus = u_minus.squaredNorm();
    psi_ = u_minus / std::sqrt(p_minus);
    logp_ += std::log(p_minus);
  }
  ++n_;
  return out;
}

bool FullSpaceEngine::step() { return advance(false, false); }
bool FullSpaceEngine::step_forced(bool outcome) {
  return advance(true, outcome);
}

double full_record_logp(int M, double beta, double phi, double alpha,
                        const std::vector<bool>& outcomes) {
  FullSpaceEngine eng(M, beta, phi, 0, alpha);
  for (bool x : outcomes) eng.step_forced(x);
  return eng.logp();
}

double full_space_dephased_jx(int M, double phi, double gamma2, int steps) {
  require(M >= 1 && M <= 8, "full_space_dephased_jx: M must be in [1, 8]");
  const std::size_t dim = std::size_t(1) << M;
  Eigen::MatrixXcd rho(dim, dim);
  {
    Eigen::VectorXcd psi = Eigen::VectorXcd::Constant(dim, 1.0);
    psi /= std::sqrt(static_cast<double>(dim));
    rho = psi * psi.adjoint();
  }
  // free evolution phases
  Eigen::VectorXcd diag(dim);
  for (std::size_t idx = 0; idx < dim; ++idx)
    diag(idx) = std::exp(cd(0, -phi * (0.5 * M - __builtin_popcountll(idx))));
  const double lam = std::exp(-gamma2);  // per-spin coherence factor
  for (int s = 0; s < steps; ++s) {
    rho = diag.asDiagonal() * rho * diag.conjugate().asDiagonal();
    // per-spin phase damping: off-diagonal in sigma_z^(q) scaled by lam
    for (int q = 0; q < M; ++q) {
      const std::size_t bit = std::size_t(1) << q;
      for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = 0; j < dim; ++j)
          if ((i & bit) != (j & bit)) rho(i, j) *= lam;
    }
  }
  // <Jx> = sum_q <sigma_x^(q)>/2
  double jx = 0;
  for (int q = 0; q < M; ++q) {
    const std::size_t bit = std::size_t(1) << q;
    for (std::size_t i = 0; i < dim; ++i)
      if (!(i & bit)) jx += 2.0 * rho(i | bit, i).real() * 0.5;
  }
  return jx;
}

// ---------------------------------------------------------------------------

bool ValidationReport::all_passed() const {
  for (const auto& c : checks)
    if (!c.passed) return false;
  return true;
}

std::string ValidationReport::to_string() const {
  std::ostringstream os;
  for (const auto& c : checks)
    os << (c.passed ? "[ok]   " : "[FAIL] ") << c.name
       << (c.detail.empty() ? "" : ": " + c.detail) << "\n";
  os << (all_passed() ? "all checks passed" : "CHECKS FAILED") << "\n";
  return os.str();
}

ValidationReport run_validation(int max_M, std::uint64_t seed) {
  max_M = std::max(2, std::min(max_M, kFullSpaceMaxM));
  ValidationReport rep;
  auto add = [&rep](const std::string& name, bool ok,
                    const std::string& detail) {
    rep.checks.push_back({name, ok, detail});
  };

  {  // su(2) algebra and Casimir
    double worst = 0;
    for (int M = 1; M <= max_M; ++M) {
      const auto ops = collective_operators(M);
      const double J = 0.5 * M;
      const Eigen::MatrixXcd comm =
          ops.Jx * ops.Jy - ops.Jy * ops.Jx - cd(0, 1) * ops.Jz;
      const Eigen::MatrixXcd casimir =
          ops.Jx * ops.Jx + ops.Jy * ops.Jy + ops.Jz * ops.Jz -
          J * (J + 1) * Eigen::MatrixXcd::Identity(M + 1, M + 1);
      worst = std::max({worst, comm.cwiseAbs().maxCoeff(),
                        casimir.cwiseAbs().maxCoeff()});
    }
    std::ostringstream os;
    os << "max residual " << worst;
    add("collective operator algebra", worst < 1e-10, os.str());
  }

  {  // Kraus completeness
    double worst = 0;
    for (int M : {1, 2, 5, std::min(max_M * 2, 40)}) {
      for (double beta : {1e-4, 0.006366, 0.1, 0.25 * kPi}) {
        const auto k = entangling_kraus(M, beta);
        const Eigen::MatrixXcd res =
            k.U_plus.adjoint() * k.U_plus + k.U_minus.adjoint() * k.U_minus -
            Eigen::MatrixXcd::Identity(M + 1, M + 1);
        worst = std::max(worst, res.cwiseAbs().maxCoeff());
      }
    }
    std::ostringstream os;
    os << "max residual " << worst;
    add("Kraus completeness", worst < 1e-12, os.str());
  }

  {  // Dicke engine vs full-space engine, shared uniform stream
    double worst_p = 0;
    bool bits_equal = true;
    for (int M = 1; M <= max_M; ++M) {
      ProtocolParams p;
      p.M = M;
      p.beta = 0.04;
      p.phi = 0.7;
      p.n_max = 100;
      p.d_phi = 1e-5;
      TrajectoryEngine dicke(p, seed + M);
      FullSpaceEngine full(M, p.beta, p.phi, seed + M);
      for (int n = 0; n < 100; ++n) {
        const bool a = dicke.step();
        const bool b = full.step();
        if (a != b) bits_equal = false;
        worst_p = std::max(worst_p,
                           std::abs(dicke.last_p_plus() - full.last_p_plus()));
      }
    }
    std::ostringstream os;
    os << "max |dp| " << worst_p;
    add("Dicke vs full-space trajectories", bits_equal && worst_p < 1e-10,
        os.str());
  }

  {  // Schmidt spectrum vs full-space SVD
    Rng rng(seed);
    double worst = 0;
    for (int M = 2; M <= max_M; ++M) {
      DickeVector s;
      s.M = M;
      s.amplitudes.resize(M + 1);
      for (int k = 0; k <= M; ++k)
        s.amplitudes(k) = cd(rng.normal(), rng.normal());
      s.amplitudes.normalize();
      const int M1 = M / 2 > 0 ? M / 2 : 1;
      const auto sv = entanglement::schmidt_coefficients(s, {M1, M - M1});
      // reshape the full-space vector into (2^M1) x (2^M2) and take its SVD
      const FullState full = dicke_to_full(s);
      Eigen::MatrixXcd mat(std::size_t(1) << M1, std::size_t(1) << (M - M1));
      for (std::size_t idx = 0; idx < (std::size_t(1) << M); ++idx)
        mat(idx & ((1u << M1) - 1), idx >> M1) = full.amplitudes(idx);
      Eigen::JacobiSVD<Eigen::MatrixXcd> svd(mat);
      Eigen::VectorXd ref = svd.singularValues();
      for (int i = 0; i < sv.size(); ++i) {
        const double r = i < ref.size() ? ref(i) : 0.0;
        worst = std::max(worst, std::abs(sv(i) - r));
      }
    }
    std::ostringstream os;
    os << "max |ds| " << worst;
    add("bipartite Schmidt spectrum vs full space", worst < 1e-9, os.str());
  }

  {  // exhaustive record sum and Fisher estimator, tiny N
    ProtocolParams p;
    p.M = 2;
    p.beta = 0.05;
    p.phi = 0.7;
    p.n_max = 8;
    p.d_phi = 1e-4;
    const auto ex = fisher::exhaustive_record_fisher(p);
    const bool sum_ok = std::abs(ex.total_probability - 1.0) < 1e-8;
    auto est = fisher::estimate_fisher(p, 3000, seed + 77);
    const double mc = est.mean_fisher.back();
    const double se = est.std_error.back();
    const double diff = std::abs(mc - ex.fisher);
    std::ostringstream os;
    os << "sum(p)-1 = " << ex.total_probability - 1.0 << ", |MC - exact| = "
       << diff << " vs 3se = " << 3 * se;
    add("exhaustive record oracle", sum_ok && diff <= 3 * se, os.str());
  }

  return rep;
}

}  // namespace seqmag::oracle
