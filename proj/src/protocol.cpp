#include "protocol.hpp"

#include <algorithm>
#include <cmath>

#include "analytic.hpp"

namespace seqmag {

namespace {

constexpr double kUnderflowFloor = 1e-300;

Eigen::VectorXcd z_phase_vector(const Eigen::VectorXd& m, double angle) {
  Eigen::VectorXcd out(m.size());
  for (Eigen::Index k = 0; k < m.size(); ++k)
    out(k) = std::exp(cd(0, -angle * m(k)));
  return out;
}

}  // namespace

void ProtocolParams::validate() const {
  require(M >= 1, "params: M must be >= 1");
  require(beta >= 0.0 && beta <= 0.25 * kPi + 1e-12,
          "params: beta must lie in [0, pi/4]");
  require(gamma2 >= 0.0, "params: gamma2 must be >= 0");
  require(tau_m > 0.0, "params: tau_m must be > 0");
  require(polarization >= 0.0 && polarization <= 1.0,
          "params: polarization must lie in [0, 1]");
  require(n_max >= 1, "params: N_max must be >= 1");
  if (d_phi > 0.0 && phi > 0.0)
    require(d_phi < phi, "params: d_phi must be small compared to phi");
  require(d_phi >= 0.0 || d_phi == -1.0, "params: d_phi must be >= 0");
  if (ensemble) {
    ensemble->validate();
    require(ensemble->M == M, "params: ensemble spin count must equal M");
    for (const auto& g : ensemble->groups)
      require(g.beta >= 0.0 && g.beta <= 0.25 * kPi + 1e-12,
              "params: group beta must lie in [0, pi/4]");
    if (mixed_initial)
      require(ensemble->groups.size() == 1,
              "params: mixed_initial requires a homogeneous ensemble");
  }
  for (auto c : checkpoints)
    require(c >= 1 && c <= n_max, "params: checkpoints must lie in [1, N_max]");
}

SpinEnsembleSpec ProtocolParams::effective_ensemble() const {
  if (ensemble) return *ensemble;
  return SpinEnsembleSpec::homogeneous(M, beta);
}

double ProtocolParams::effective_d_phi() const {
  if (d_phi > 0.0) return d_phi;
  double h = 1e-3 * std::max(phi, 0.01);
  // The central difference probes the record log-likelihood, whose
  // characteristic width in phi is 1/sqrt(I_N); h must stay well below it
  // at the largest checkpoint or the estimator saturates.
  if (beta > 0.0) {
    const double k0Ts = 0.5 * kPi * beta;
    const double g = analytic::decay_rate(beta, gamma2);
    const double n = static_cast<double>(n_max);
    double i_guess =
        analytic::fisher_closed_form(static_cast<std::int64_t>(n_max), M, k0Ts,
                                     1.0, g, phi > 0 ? phi : 0.7)
            .value +
        analytic::fisher_asymptote(n, M, k0Ts, 1.0,
                                   analytic::backaction_rate_exact(beta),
                                   gamma2)
            .value;
    if (i_guess > 0.0) h = std::min(h, 0.03 / std::sqrt(i_guess));
  }
  return std::max(h, 1e-12);
}

std::vector<std::uint64_t> ProtocolParams::effective_checkpoints() const {
  if (!checkpoints.empty()) {
    auto cps = checkpoints;
    std::sort(cps.begin(), cps.end());
    cps.erase(std::unique(cps.begin(), cps.end()), cps.end());
    return cps;
  }
  return power_of_two_checkpoints(n_max);
}

std::vector<std::uint64_t> power_of_two_checkpoints(std::uint64_t n_max,
                                                    bool half_octave,
                                                    std::uint64_t n_min) {
  std::vector<std::uint64_t> cps;
  for (std::uint64_t n = n_min; n <= n_max; n *= 2) {
    cps.push_back(n);
    if (half_octave) {
      const auto mid =
          static_cast<std::uint64_t>(std::llround(n * std::sqrt(2.0)));
      if (mid < n_max && n * 2 <= n_max) cps.push_back(mid);
    }
  }
  if (cps.empty() || cps.back() != n_max) cps.push_back(n_max);
  std::sort(cps.begin(), cps.end());
  cps.erase(std::unique(cps.begin(), cps.end()), cps.end());
  return cps;
}

EntanglingKraus entangling_kraus(int M, double beta, double alpha) {
  require(M >= 1, "entangling_kraus: M must be >= 1");
  require(beta >= 0.0 && beta <= 0.25 * kPi + 1e-12,
          "entangling_kraus: beta must lie in [0, pi/4]");
  const JxEigen jx = jx_eigenbasis(M);
  const int dim = M + 1;
  Eigen::VectorXcd eneg(dim), epos(dim);
  for (int j = 0; j < dim; ++j) {
    eneg(j) = std::exp(cd(0, -2.0 * beta * jx.d(j)));
    epos(j) = std::conj(eneg(j));
  }
  EntanglingKraus k;
  const Eigen::MatrixXcd Vc = jx.V.cast<cd>();
  k.branch_neg = Vc * eneg.asDiagonal() * Vc.transpose();
  k.branch_pos = Vc * epos.asDiagonal() * Vc.transpose();
  const cd phase = std::exp(cd(0, -alpha));
  k.U_plus = 0.5 * (k.branch_neg + phase * k.branch_pos);
  k.U_minus = 0.5 * (k.branch_neg - phase * k.branch_pos);
  return k;
}

Eigen::VectorXcd free_evolution(int M, double phi) {
  require(M >= 1, "free_evolution: M must be >= 1");
  Eigen::VectorXcd diag(M + 1);
  for (int k = 0; k <= M; ++k)
    diag(k) = std::exp(cd(0, -phi * (0.5 * M - k)));
  return diag;
}

double measure_probability(const DickeVector& state,
                           const EntanglingKraus& k) {
  state.check_normalized();
  const double p = (k.U_plus * state.amplitudes).squaredNorm();
  return std::min(1.0, std::max(0.0, p));
}

double measure_probability(const GroupedState& state,
                           const std::vector<EntanglingKraus>& per_group,
                           double alpha) {
  require(state.groups.size() == per_group.size(),
          "measure_probability: one Kraus pair per group required");
  cd z(1, 0);
  for (std::size_t g = 0; g < state.groups.size(); ++g) {
    state.groups[g].check_normalized();
    const Eigen::VectorXcd a = per_group[g].branch_neg * state.groups[g].amplitudes;
    const Eigen::VectorXcd b = per_group[g].branch_pos * state.groups[g].amplitudes;
    z *= a.dot(b);  // <A psi | B psi> per group, combined coherently
  }
  const double p = 0.5 + 0.5 * (std::exp(cd(0, -alpha)) * z).real();
  return std::min(1.0, std::max(0.0, p));
}

DickeVector dephase(const DickeVector& state, double gamma2, Rng& rng) {
  require(gamma2 >= 0.0, "dephase: gamma2 must be >= 0");
  if (gamma2 == 0.0) return state;
  const double theta = rng.normal() * std::sqrt(2.0 * gamma2);
  DickeVector out = state;
  for (int k = 0; k <= state.M; ++k)
    out.amplitudes(k) *= std::exp(cd(0, -theta * (0.5 * state.M - k)));
  return out;
}

GroupedState dephase(const GroupedState& state, double gamma2, Rng& rng) {
  require(gamma2 >= 0.0, "dephase: gamma2 must be >= 0");
  if (gamma2 == 0.0) return state;
  // one global rotation; the noise field is common to all groups
  const double theta = rng.normal() * std::sqrt(2.0 * gamma2);
  GroupedState out = state;
  for (auto& g : out.groups)
    for (int k = 0; k <= g.M; ++k)
      g.amplitudes(k) *= std::exp(cd(0, -theta * (0.5 * g.M - k)));
  return out;
}

GroupedState sample_mixed_initial(const SpinEnsembleSpec& spec, double P,
                                  Rng& rng) {
  spec.validate();
  require(spec.groups.size() == 1,
          "sample_mixed_initial: homogeneous ensemble required");
  require(P >= 0.0 && P <= 1.0, "sample_mixed_initial: P must lie in [0, 1]");
  int n_plus = 0;
  for (int s = 0; s < spec.M; ++s)
    if (rng.uniform() < 0.5 * (1.0 + P)) ++n_plus;
  GroupedState out;
  if (n_plus > 0) out.groups.push_back(plus_x_state(n_plus));
  if (n_plus < spec.M)
    out.groups.push_back(spin_coherent(spec.M - n_plus, {-1.0, 0.0, 0.0}));
  return out;
}

// ---------------------------------------------------------------------------

struct TrajectoryEngine::Impl {
  struct Group {
    int dim = 0;
    double beta = 0;
    Eigen::MatrixXd V;   // z <-> x, orthogonal
    Eigen::VectorXd d;   // Jx eigenvalues
    Eigen::VectorXd m;   // Jz eigenvalues
  };

  ProtocolParams params;
  Options opt;
  Rng rng;
  std::vector<Group> groups;
  int D = 0;
  std::vector<int> dims, strides;
  bool pure = true;
  int n_sib = 1;
  double phis[3] = {0, 0, 0};

  Eigen::VectorXd w_plus;            // flattened x-basis outcome weights
  Eigen::VectorXcd kr_plus, kr_minus;

  // pure path: x-basis states, per-sibling per-group step matrices
  std::vector<Eigen::VectorXcd> c;
  std::vector<std::vector<Eigen::MatrixXcd>> W;
  Eigen::VectorXcd vtmp;
  Eigen::MatrixXcd btmp;

  // density path: z-basis densities, per-sibling Hadamard masks
  std::vector<Eigen::MatrixXcd> R;
  std::vector<Eigen::MatrixXcd> E;
  Eigen::MatrixXcd Vfull, VfullT;  // z <-> x over the full register
  Eigen::MatrixXcd mtmp;

  std::uint64_t n = 0;
  double logp[3] = {0, 0, 0};
  double last_p = 0.5;
  std::vector<std::uint64_t> words;

  Impl(const ProtocolParams& p, std::uint64_t seed, Options o)
      : params(p), opt(o), rng(seed) {
    params.validate();
    const double dphi = params.effective_d_phi();
    phis[0] = params.phi;
    phis[1] = params.phi + dphi;
    phis[2] = params.phi - dphi;
    n_sib = opt.track_siblings ? 3 : 1;
    pure = (params.gamma2 == 0.0);

    SpinEnsembleSpec spec = params.effective_ensemble();
    std::vector<DickeVector> init;
    if (params.mixed_initial) {
      GroupedState sampled =
          sample_mixed_initial(spec, params.polarization, rng);
      SpinEnsembleSpec resampled;
      resampled.M = spec.M;
      for (const auto& g : sampled.groups) {
        resampled.groups.push_back(
            SpinGroup{g.M, {0, 0, 0}, spec.groups[0].beta, 0.0});
        init.push_back(g);
      }
      spec = resampled;
    } else {
      for (const auto& g : spec.groups) {
        std::array<double, 3> b = g.initial_bloch;
        const double r =
            std::sqrt(b[0] * b[0] + b[1] * b[1] + b[2] * b[2]);
        require(std::abs(r - 1.0) <= 1e-9,
                "engine: product initial state needs unit bloch vectors; "
                "use mixed_initial for partial polarization");
        const double c0 = std::cos(g.phi0), s0 = std::sin(g.phi0);
        std::array<double, 3> rotated{b[0] * c0 - b[1] * s0,
                                      b[0] * s0 + b[1] * c0, b[2]};
        init.push_back(spin_coherent(g.size, rotated));
      }
    }

    D = 1;
    for (std::size_t g = 0; g < spec.groups.size(); ++g) {
      Group grp;
      grp.dim = spec.groups[g].size + 1;
      grp.beta = spec.groups[g].beta;
      JxEigen jx = jx_eigenbasis(spec.groups[g].size);
      grp.V = std::move(jx.V);
      grp.d = std::move(jx.d);
      grp.m = Eigen::VectorXd(grp.dim);
      for (int k = 0; k < grp.dim; ++k)
        grp.m(k) = 0.5 * spec.groups[g].size - k;
      groups.push_back(std::move(grp));
      dims.push_back(groups.back().dim);
      D *= groups.back().dim;
    }
    strides.assign(groups.size(), 1);
    for (int g = static_cast<int>(groups.size()) - 2; g >= 0; --g)
      strides[g] = strides[g + 1] * dims[g + 1];

    if (!pure)
      require(D <= 2048, "engine: density path register too large");

    // flattened x-basis Kraus diagonals and z-basis Jz eigenvalues
    Eigen::VectorXd theta(D), mz(D);
    for (int idx = 0; idx < D; ++idx) {
      double th = 0, m = 0;
      int rem = idx;
      for (std::size_t g = 0; g < groups.size(); ++g) {
        const int k = rem / strides[g];
        rem -= k * strides[g];
        th += 2.0 * groups[g].beta * groups[g].d(k);
        m += groups[g].m(k);
      }
      theta(idx) = th;
      mz(idx) = m;
    }
    kr_plus.resize(D);
    kr_minus.resize(D);
    w_plus.resize(D);
    const cd ph = std::exp(cd(0, -params.alpha));
    for (int j = 0; j < D; ++j) {
      const cd eneg = std::exp(cd(0, -theta(j)));
      const cd epos = std::conj(eneg);
      kr_plus(j) = 0.5 * (eneg + ph * epos);
      kr_minus(j) = 0.5 * (eneg - ph * epos);
      w_plus(j) = std::norm(kr_plus(j));
    }

    // initial state in the z basis per group
    std::vector<Eigen::VectorXcd> zparts;
    for (std::size_t g = 0; g < groups.size(); ++g)
      zparts.push_back(init[g].amplitudes);

    if (pure) {
      std::vector<Eigen::VectorXcd> xparts;
      for (std::size_t g = 0; g < groups.size(); ++g)
        xparts.push_back(groups[g].V.transpose() * zparts[g]);
      Eigen::VectorXcd c0 = xparts[0];
      for (std::size_t g = 1; g < groups.size(); ++g) {
        Eigen::VectorXcd next(c0.size() * xparts[g].size());
        for (Eigen::Index i = 0; i < c0.size(); ++i)
          next.segment(i * xparts[g].size(), xparts[g].size()) =
              c0(i) * xparts[g];
        c0.swap(next);
      }
      c.assign(n_sib, c0);
      W.resize(n_sib);
      for (int s = 0; s < n_sib; ++s)
        for (std::size_t g = 0; g < groups.size(); ++g) {
          const Eigen::VectorXcd phase = z_phase_vector(groups[g].m, phis[s]);
          W[s].push_back(groups[g].V.transpose() *
                         phase.asDiagonal() * groups[g].V.cast<cd>());
        }
      vtmp.resize(D);
    } else {
      Eigen::VectorXcd psi = zparts[0];
      for (std::size_t g = 1; g < groups.size(); ++g) {
        Eigen::VectorXcd next(psi.size() * zparts[g].size());
        for (Eigen::Index i = 0; i < psi.size(); ++i)
          next.segment(i * zparts[g].size(), zparts[g].size()) =
              psi(i) * zparts[g];
        psi.swap(next);
      }
      R.assign(n_sib, psi * psi.adjoint());
      E.resize(n_sib);
      for (int s = 0; s < n_sib; ++s) {
        E[s].resize(D, D);
        for (int l = 0; l < D; ++l)
          for (int k = 0; k < D; ++k) {
            const double dm = mz(k) - mz(l);
            E[s](k, l) = std::exp(cd(-params.gamma2 * dm * dm, -phis[s] * dm));
          }
      }
      Vfull.resize(D, D);
      for (int col = 0; col < D; ++col)
        for (int row = 0; row < D; ++row) {
          double prod = 1.0;
          int r = row, q = col;
          for (std::size_t g = 0; g < groups.size(); ++g) {
            const int kr_ = r / strides[g], kc = q / strides[g];
            r -= kr_ * strides[g];
            q -= kc * strides[g];
            prod *= groups[g].V(kr_, kc);
          }
          Vfull(row, col) = prod;
        }
      VfullT = Vfull.transpose();
      mtmp.resize(D, D);
    }
    if (opt.record_outcomes) words.reserve(params.n_max / 64 + 1);
  }

  // v <- (x-basis step matrix for group g) applied along mode g
  void mode_apply(const Eigen::MatrixXcd& Wg, Eigen::VectorXcd& v, int g) {
    const int ng = dims[g], inner = strides[g];
    const int outer = D / (ng * inner);
    if (inner == 1 && outer == 1) {
      vtmp.noalias() = Wg * v;
      v.swap(vtmp);
      return;
    }
    for (int o = 0; o < outer; ++o) {
      Eigen::Map<Eigen::MatrixXcd> blk(v.data() + o * ng * inner, inner, ng);
      btmp.noalias() = blk * Wg.transpose();
      blk = btmp;
    }
  }

  void to_x_basis(Eigen::MatrixXcd& X) {
    mtmp.noalias() = VfullT * X;
    X.noalias() = mtmp * Vfull;
  }

  void to_z_basis(Eigen::MatrixXcd& X) {
    mtmp.noalias() = Vfull * X;
    X.noalias() = mtmp * VfullT;
  }

  bool advance(bool forced, bool forced_outcome) {
    double p_plus[3];
    if (pure) {
      for (int s = 0; s < n_sib; ++s) {
        for (std::size_t g = 0; g < groups.size(); ++g)
          mode_apply(W[s][g], c[s], static_cast<int>(g));
        double p = 0;
        for (int j = 0; j < D; ++j) p += w_plus(j) * std::norm(c[s](j));
        p_plus[s] = std::min(1.0, std::max(0.0, p));
      }
    } else {
      for (int s = 0; s < n_sib; ++s) {
        R[s].array() *= E[s].array();
        to_x_basis(R[s]);
        double p = 0;
        for (int j = 0; j < D; ++j) p += w_plus(j) * R[s](j, j).real();
        p_plus[s] = std::min(1.0, std::max(0.0, p));
      }
    }

    bool outcome;
    if (forced) {
      outcome = forced_outcome;
    } else {
      outcome = rng.uniform() >= p_plus[0];  // false = '+', true = '-'
    }
    last_p = p_plus[0];

    for (int s = 0; s < n_sib; ++s) {
      const double p = outcome ? 1.0 - p_plus[s] : p_plus[s];
      require(p >= kUnderflowFloor,
              "trajectory aborted: outcome probability underflow at step " +
                  std::to_string(n + 1),
              ErrorCode::runtime);
      const Eigen::VectorXcd& kr = outcome ? kr_minus : kr_plus;
      if (pure) {
        c[s].array() *= kr.array();
        c[s] *= 1.0 / std::sqrt(p);
      } else {
        const double inv_p = 1.0 / p;
        for (int l = 0; l < D; ++l) {
          const cd kl = std::conj(kr(l)) * inv_p;
          for (int k = 0; k < D; ++k) R[s](k, l) *= kr(k) * kl;
        }
        to_z_basis(R[s]);
      }
      logp[s] += std::log(p);
    }

    if (opt.record_outcomes) {
      if ((n & 63) == 0) words.push_back(0);
      if (outcome) words.back() |= (std::uint64_t(1) << (n & 63));
    }
    ++n;
    return outcome;
  }
};

TrajectoryEngine::TrajectoryEngine(const ProtocolParams& params,
                                   std::uint64_t seed)
    : TrajectoryEngine(params, seed, Options{}) {}

TrajectoryEngine::TrajectoryEngine(const ProtocolParams& params,
                                   std::uint64_t seed, Options opt)
    : impl_(std::make_unique<Impl>(params, seed, opt)) {}

TrajectoryEngine::~TrajectoryEngine() = default;
TrajectoryEngine::TrajectoryEngine(TrajectoryEngine&&) noexcept = default;
TrajectoryEngine& TrajectoryEngine::operator=(TrajectoryEngine&&) noexcept =
    default;

bool TrajectoryEngine::step() { return impl_->advance(false, false); }
bool TrajectoryEngine::step_forced(bool outcome) {
  return impl_->advance(true, outcome);
}
std::uint64_t TrajectoryEngine::n_done() const { return impl_->n; }
double TrajectoryEngine::last_p_plus() const { return impl_->last_p; }
double TrajectoryEngine::logp(int sibling) const {
  require(sibling >= 0 && sibling < impl_->n_sib, "logp: no such sibling");
  return impl_->logp[sibling];
}

double TrajectoryEngine::norm_drift() const {
  if (impl_->pure) return std::abs(impl_->c[0].norm() - 1.0);
  return std::abs(impl_->R[0].trace().real() - 1.0);
}

DickeVector TrajectoryEngine::state_dicke() const {
  require(impl_->pure, "state_dicke: density path has no pure state");
  require(impl_->groups.size() == 1,
          "state_dicke: only defined for a single group");
  DickeVector out;
  out.M = impl_->dims[0] - 1;
  out.amplitudes = impl_->groups[0].V * impl_->c[0];
  return out;
}

bool TrajectoryEngine::is_pure_path() const { return impl_->pure; }

const std::vector<std::uint64_t>& TrajectoryEngine::outcome_words() const {
  return impl_->words;
}

TrajectoryRecord run_trajectory(const ProtocolParams& params,
                                std::uint64_t seed) {
  TrajectoryEngine::Options opt;
  opt.track_siblings = true;
  opt.record_outcomes = true;
  TrajectoryEngine engine(params, seed, opt);
  const auto cps = params.effective_checkpoints();
  TrajectoryRecord rec;
  rec.seed = seed;
  std::size_t next_cp = 0;
  for (std::uint64_t n = 1; n <= params.n_max; ++n) {
    engine.step();
    if (next_cp < cps.size() && n == cps[next_cp]) {
      TrajectoryCheckpoint cp;
      cp.n = n;
      cp.logp_center = engine.logp(0);
      cp.logp_plus = engine.logp(1);
      cp.logp_minus = engine.logp(2);
      cp.norm_drift = engine.norm_drift();
      rec.checkpoints.push_back(cp);
      ++next_cp;
    }
  }
  rec.n_steps = params.n_max;
  rec.outcome_words = engine.outcome_words();
  return rec;
}

}  // namespace seqmag
