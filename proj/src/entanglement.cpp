#include "entanglement.hpp"

#include <cmath>

#include "threading.hpp"

namespace seqmag::entanglement {

Bipartition equal_bipartition(int M) {
  require(M >= 2, "equal_bipartition: M must be >= 2");
  return {(M + 1) / 2, M / 2};
}

Eigen::VectorXd schmidt_coefficients(const DickeVector& state,
                                     const Bipartition& split) {
  const Eigen::MatrixXcd coeff = bipartite_expand(state, split.M1, split.M2);
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(coeff);
  return svd.singularValues();
}

double log_negativity(const DickeVector& state, const Bipartition& split) {
  state.check_normalized();
  const Eigen::VectorXd sv = schmidt_coefficients(state, split);
  const double ln = 2.0 * std::log2(sv.sum());
  return std::max(0.0, ln);
}

EntanglementTrace entanglement_trace(const ProtocolParams& params,
                                     const std::vector<Bipartition>& splits,
                                     int runs, std::uint64_t base_seed) {
  params.validate();
  require(params.gamma2 == 0.0,
          "entanglement_trace: gamma2 must be 0 (pure-state formula)");
  require(!params.mixed_initial,
          "entanglement_trace: product initial state required");
  require(runs >= 1, "entanglement_trace: at least one run required");
  for (const auto& s : splits)
    require(s.M1 >= 1 && s.M2 >= 1 && s.M1 + s.M2 == params.M,
            "entanglement_trace: invalid bipartition");

  const auto cps = params.effective_checkpoints();
  const std::size_t n_splits = splits.size();
  // samples[r][s][i]
  std::vector<std::vector<std::vector<double>>> samples(
      runs, std::vector<std::vector<double>>(
                n_splits, std::vector<double>(cps.size(), 0.0)));

  parallel_for(static_cast<std::size_t>(runs), [&](std::size_t r) {
    TrajectoryEngine::Options opt;
    opt.track_siblings = false;
    TrajectoryEngine engine(params, base_seed + r, opt);
    std::size_t next_cp = 0;
    for (std::uint64_t n = 1; n <= params.n_max && next_cp < cps.size(); ++n) {
      engine.step();
      if (n == cps[next_cp]) {
        const DickeVector state = engine.state_dicke();
        for (std::size_t s = 0; s < n_splits; ++s)
          samples[r][s][next_cp] = log_negativity(state, splits[s]);
        ++next_cp;
      }
    }
  });

  EntanglementTrace out;
  out.checkpoints = cps;
  out.splits = splits;
  out.runs = runs;
  out.mean_ln.assign(n_splits, std::vector<double>(cps.size(), 0.0));
  out.std_error.assign(n_splits, std::vector<double>(cps.size(), 0.0));
  for (std::size_t s = 0; s < n_splits; ++s)
    for (std::size_t i = 0; i < cps.size(); ++i) {
      double sum = 0;
      for (int r = 0; r < runs; ++r) sum += samples[r][s][i];
      const double mean = sum / runs;
      double var = 0;
      for (int r = 0; r < runs; ++r) {
        const double d = samples[r][s][i] - mean;
        var += d * d;
      }
      out.mean_ln[s][i] = mean;
      out.std_error[s][i] = runs > 1 ? std::sqrt(var / (runs - 1) / runs) : 0.0;
    }
  return out;
}

}  // namespace seqmag::entanglement
