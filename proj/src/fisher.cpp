#include "fisher.hpp"

#include <algorithm>
#include <cmath>

#include "rng.hpp"
#include "threading.hpp"

namespace seqmag::fisher {

FisherEstimate estimate_fisher(const ProtocolParams& params, int runs,
                               std::uint64_t base_seed) {
  require(runs >= 2, "estimate_fisher: at least 2 runs required");
  params.validate();
  const auto cps = params.effective_checkpoints();
  const double d_phi = params.effective_d_phi();
  const double tau2 = params.tau_m * params.tau_m;

  // per-run estimator samples at every checkpoint; NaN marks an aborted run
  std::vector<std::vector<double>> samples(
      runs, std::vector<double>(cps.size(),
                                std::numeric_limits<double>::quiet_NaN()));
  parallel_for(static_cast<std::size_t>(runs), [&](std::size_t r) {
    try {
      TrajectoryEngine engine(params, base_seed + r);
      std::size_t next_cp = 0;
      for (std::uint64_t n = 1; n <= params.n_max && next_cp < cps.size();
           ++n) {
        engine.step();
        if (n == cps[next_cp]) {
          const double diff =
              (engine.logp(1) - engine.logp(2)) / (2.0 * d_phi);
          samples[r][next_cp] = diff * diff * tau2;
          ++next_cp;
        }
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::runtime) throw;
      // underflow abort: leave the run marked NaN and count it below
    }
  });

  FisherEstimate out;
  out.checkpoints = cps;
  out.d_phi_used = d_phi;
  out.mean_fisher.assign(cps.size(), 0.0);
  out.std_error.assign(cps.size(), 0.0);
  int surviving = 0;
  for (int r = 0; r < runs; ++r)
    if (!std::isnan(samples[r][0])) ++surviving;
  out.runs = surviving;
  out.aborted_runs = runs - surviving;
  require(surviving >= 2, "estimate_fisher: fewer than 2 surviving runs",
          ErrorCode::runtime);
  for (std::size_t i = 0; i < cps.size(); ++i) {
    double sum = 0;
    for (int r = 0; r < runs; ++r)
      if (!std::isnan(samples[r][i])) sum += samples[r][i];
    const double mean = sum / surviving;
    double var = 0;
    for (int r = 0; r < runs; ++r)
      if (!std::isnan(samples[r][i])) {
        const double d = samples[r][i] - mean;
        var += d * d;
      }
    var /= (surviving - 1);
    out.mean_fisher[i] = mean;
    out.std_error[i] = std::sqrt(var / surviving);
  }
  return out;
}

ExhaustiveFisher exhaustive_record_fisher(const ProtocolParams& params) {
  params.validate();
  require(params.n_max <= 24,
          "exhaustive_record_fisher: N must be <= 24 (2^N records)");
  const double d_phi = params.effective_d_phi();
  const double tau2 = params.tau_m * params.tau_m;
  const std::uint64_t n_records = std::uint64_t(1) << params.n_max;
  ExhaustiveFisher out;
  for (std::uint64_t rec = 0; rec < n_records; ++rec) {
    TrajectoryEngine engine(params, 0);
    for (std::uint64_t n = 0; n < params.n_max; ++n)
      engine.step_forced((rec >> n) & 1);
    const double p = std::exp(engine.logp(0));
    const double diff = (engine.logp(1) - engine.logp(2)) / (2.0 * d_phi);
    out.total_probability += p;
    out.fisher += p * diff * diff * tau2;
  }
  return out;
}

ScalingFit fit_power_law(const std::vector<double>& x,
                         const std::vector<double>& y, int min_points) {
  require(x.size() == y.size(), "fit_power_law: size mismatch");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i] > 0 && y[i] > 0) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    }
  const int n = static_cast<int>(lx.size());
  require(n >= min_points && n >= 2,
          "fit_power_law: not enough positive points in window");
  auto slope_of = [](const std::vector<double>& xs,
                     const std::vector<double>& ys) {
    const int m = static_cast<int>(xs.size());
    double mx = 0, my = 0;
    for (int i = 0; i < m; ++i) {
      mx += xs[i];
      my += ys[i];
    }
    mx /= m;
    my /= m;
    double sxx = 0, sxy = 0;
    for (int i = 0; i < m; ++i) {
      sxx += (xs[i] - mx) * (xs[i] - mx);
      sxy += (xs[i] - mx) * (ys[i] - my);
    }
    return sxy / sxx;
  };
  ScalingFit fit;
  fit.points = n;
  fit.exponent = slope_of(lx, ly);
  // pairs bootstrap for the confidence interval
  Rng rng(0x5ca1ab1e);
  std::vector<double> bs;
  std::vector<double> bx(n), by(n);
  for (int b = 0; b < 400; ++b) {
    for (int i = 0; i < n; ++i) {
      const int j = static_cast<int>(rng.uniform() * n);
      bx[i] = lx[j];
      by[i] = ly[j];
    }
    double sxx = 0, mx = 0;
    for (int i = 0; i < n; ++i) mx += bx[i];
    mx /= n;
    for (int i = 0; i < n; ++i) sxx += (bx[i] - mx) * (bx[i] - mx);
    if (sxx < 1e-12) continue;  // degenerate resample
    bs.push_back(slope_of(bx, by));
  }
  if (bs.size() >= 10) {
    std::sort(bs.begin(), bs.end());
    const double lo = bs[static_cast<std::size_t>(0.025 * (bs.size() - 1))];
    const double hi = bs[static_cast<std::size_t>(0.975 * (bs.size() - 1))];
    fit.ci = 0.5 * (hi - lo);
  }
  return fit;
}

ScalingFit fit_scaling_exponent(const FisherEstimate& estimate,
                                std::uint64_t n_lo, std::uint64_t n_hi) {
  require(n_lo < n_hi, "fit_scaling_exponent: degenerate window");
  std::vector<double> x, y;
  for (std::size_t i = 0; i < estimate.checkpoints.size(); ++i) {
    const auto n = estimate.checkpoints[i];
    if (n >= n_lo && n <= n_hi) {
      x.push_back(static_cast<double>(n));
      y.push_back(estimate.mean_fisher[i]);
    }
  }
  require(x.size() >= 5, "fit_scaling_exponent: window needs >= 5 checkpoints");
  return fit_power_law(x, y, 5);
}

}  // namespace seqmag::fisher
