#include "analytic.hpp"

#include <cmath>
#include <complex>

namespace seqmag::analytic {

double effective_beta(double A_perp, double Ts) {
  require(A_perp > 0 && Ts > 0, "effective_beta: inputs must be positive");
  return 2.0 * A_perp * Ts / kPi;
}

double heisenberg_uncertainty(int M, double T, const PhysicalConstants& c) {
  require(T > 0, "heisenberg_uncertainty: T must be positive");
  return c.hbar / (c.mu_n * (M + 1) * T);
}

double hl_fisher(int M, double N, double tau_m) {
  const double mt = (M + 1) * N * tau_m;
  return mt * mt;
}

double signal_probability(std::int64_t n, int M, double k0Ts, double phi) {
  const double c = std::cos(2.0 * M * k0Ts / kPi * std::cos(phi * n) - kPi / 4);
  return c * c;
}

double signal_probability_general(const std::vector<double>& couplings,
                                  const std::vector<double>& phases, double P,
                                  double alpha) {
  require(couplings.size() == phases.size(),
          "signal_probability_general: couplings/phases length mismatch");
  std::complex<double> prod_minus(1, 0), prod_plus(1, 0);
  for (std::size_t m = 0; m < couplings.size(); ++m) {
    const double c = std::cos(couplings[m]);
    const double s = std::sin(couplings[m]) * P * std::cos(phases[m]);
    prod_minus *= std::complex<double>(c, -s);
    prod_plus *= std::complex<double>(c, s);
  }
  const std::complex<double> i(0, 1);
  const std::complex<double> val = 0.25 * (std::cos(alpha) * (prod_minus + prod_plus) +
                                           i * std::sin(alpha) * (prod_minus - prod_plus));
  require(std::abs(val.imag()) < 1e-12,
          "signal_probability_general: non-real probability",
          ErrorCode::runtime);
  double p = 0.5 + val.real();
  return std::min(1.0, std::max(0.0, p));
}

double backaction_rate(double beta) { return beta * beta; }

double backaction_rate_exact(double beta) {
  return -std::log(0.5 * (1.0 + std::cos(2.0 * beta)));
}

double decay_rate(double beta, double gamma2) {
  require(gamma2 >= 0, "decay_rate: gamma2 must be >= 0");
  return backaction_rate_exact(beta) + gamma2;
}

double fisher_sum_exact(std::int64_t N, int M, double k0Ts, double tau_m,
                        double gamma, double phi) {
  require(N >= 1, "fisher_sum_exact: N must be >= 1");
  const double pref = 4.0 * tau_m * M * k0Ts / kPi;
  double acc = 0.0;
  for (std::int64_t n = 1; n <= N; ++n) {
    const double s = std::sin(phi * n);
    const double term = pref * std::exp(-gamma * n) * n * s;
    acc += term * term;
  }
  return acc;
}

ClosedFormFisher fisher_closed_form(std::int64_t N, int M, double k0Ts,
                                    double tau_m, double gamma, double phi) {
  require(N >= 1, "fisher_closed_form: N must be >= 1");
  require(gamma >= 0, "fisher_closed_form: gamma must be >= 0");
  ClosedFormFisher out;
  const double pref =
      2.0 * M * M * tau_m * tau_m * k0Ts * k0Ts / (kPi * kPi);
  const double gN = gamma * N;
  const double Nd = static_cast<double>(N);
  out.series = pref * (4.0 * Nd * Nd * Nd / 3.0 - 2.0 * gamma * Nd * Nd * Nd * Nd +
                       6.0 * gamma * gamma * Nd * Nd * Nd * Nd * Nd / 5.0);
  if (gamma == 0.0 || gN < 1e-4) {
    // series limit; the closed bracket loses all precision as gamma -> 0
    out.value = out.series;
  } else {
    const double bracket =
        1.0 - std::exp(-2.0 * gN) * (1.0 + 2.0 * gN * (1.0 + gN));
    out.value = pref * bracket / (gamma * gamma * gamma);
  }
  out.regime_ok = (std::max(gamma, 1.0 / Nd) < 2.0 * kPi * phi) &&
                  (M * k0Ts < 1.0);
  return out;
}

double uncertainty_bound(std::int64_t N, int M, double k0Ts, double tau_m,
                         const PhysicalConstants& c) {
  const double denom =
      8.0 * c.mu_n * c.mu_n * M * M * tau_m * tau_m * k0Ts * k0Ts;
  const double Nd = static_cast<double>(N);
  return std::sqrt(3.0 * kPi * kPi * c.hbar * c.hbar / denom / (Nd * Nd * Nd));
}

AsymptoticFisher fisher_asymptote(double N, int M, double k0Ts, double tau_m,
                                  double gamma_b, double gamma2) {
  require(gamma_b + gamma2 > 0, "fisher_asymptote: gamma_b + gamma2 must be > 0");
  const double beta = 2.0 * k0Ts / kPi;
  const double s = std::sin(2.0 * beta);
  const double g = gamma_b + gamma2;
  AsymptoticFisher out;
  out.value = s * s * s * s / (16.0 * g * g * g) * (0.5 * M * M) * tau_m *
              tau_m * N;
  if (M == 1) {
    out.corrected = 0.5 * out.value;
  } else {
    const double c = std::cos(2.0 * beta);
    out.corrected = out.value * std::pow(c, 2 * (M - 1));
  }
  return out;
}

double nv_alone_uncertainty(double T2_nv, double T,
                            const PhysicalConstants& c) {
  require(T2_nv > 0 && T > 0, "nv_alone_uncertainty: inputs must be positive");
  const double e = std::exp(1.0);
  return std::sqrt(2.0 * e * c.hbar * c.hbar / (c.mu_e * c.mu_e * T2_nv * T));
}

double crossover_M(double ratio) {
  require(ratio > 0, "crossover_M: ratio must be positive");
  const double e = std::exp(1.0);
  return std::sqrt(27.0 / (4.0 * e) * ratio);
}

double cramer_rao(double fisher_information) {
  require(fisher_information > 0, "cramer_rao: Fisher information must be > 0");
  return 1.0 / std::sqrt(fisher_information);
}

// ---------------------------------------------------------------------------

namespace {

double get(const std::map<std::string, double>& args, const std::string& key) {
  auto it = args.find(key);
  require(it != args.end(), "analytic: missing key '" + key + "'");
  return it->second;
}

double get_or(const std::map<std::string, double>& args,
              const std::string& key, double fallback) {
  auto it = args.find(key);
  return it == args.end() ? fallback : it->second;
}

PhysicalConstants constants_from(const std::map<std::string, double>& args) {
  PhysicalConstants c;
  c.hbar = get_or(args, "hbar", c.hbar);
  c.mu_n = get_or(args, "mu_n", c.mu_n);
  c.mu_e = get_or(args, "mu_e", c.mu_e);
  return c;
}

double beta_from(const std::map<std::string, double>& args) {
  if (args.count("beta")) {
    require(!args.count("k0Ts"), "analytic: give either beta or k0Ts, not both");
    return get(args, "beta");
  }
  return 2.0 * get(args, "k0Ts") / kPi;
}

}  // namespace

AnalyticResult evaluate(const std::string& op,
                        const std::map<std::string, double>& args) {
  AnalyticResult r;
  auto push = [&r](const std::string& name, double v) {
    r.names.push_back(name);
    r.values.push_back(v);
  };
  if (op == "effective_beta") {
    if (args.count("k0Ts"))
      push("beta", 2.0 * get(args, "k0Ts") / kPi);
    else
      push("beta", effective_beta(get(args, "A_perp"), get(args, "Ts")));
  } else if (op == "gamma_b") {
    push("gamma_b", backaction_rate(beta_from(args)));
  } else if (op == "gamma_b_exact") {
    push("gamma_b_exact", backaction_rate_exact(beta_from(args)));
  } else if (op == "decay_rate") {
    push("gamma", decay_rate(beta_from(args), get_or(args, "gamma2", 0.0)));
  } else if (op == "signal") {
    push("p", signal_probability(static_cast<std::int64_t>(get(args, "n")),
                                 static_cast<int>(get(args, "M")),
                                 get(args, "k0Ts"), get(args, "phi")));
  } else if (op == "fisher_sum") {
    push("I", fisher_sum_exact(static_cast<std::int64_t>(get(args, "N")),
                               static_cast<int>(get(args, "M")),
                               get(args, "k0Ts"), get_or(args, "tau_m", 1.0),
                               get(args, "gamma"), get(args, "phi")));
  } else if (op == "fisher_closed") {
    auto f = fisher_closed_form(static_cast<std::int64_t>(get(args, "N")),
                                static_cast<int>(get(args, "M")),
                                get(args, "k0Ts"), get_or(args, "tau_m", 1.0),
                                get(args, "gamma"), get_or(args, "phi", 0.7));
    push("I", f.value);
  } else if (op == "fisher_series") {
    auto f = fisher_closed_form(static_cast<std::int64_t>(get(args, "N")),
                                static_cast<int>(get(args, "M")),
                                get(args, "k0Ts"), get_or(args, "tau_m", 1.0),
                                get(args, "gamma"), get_or(args, "phi", 0.7));
    push("I_series", f.series);
  } else if (op == "fisher_asymptote") {
    auto f = fisher_asymptote(get(args, "N"), static_cast<int>(get(args, "M")),
                              get(args, "k0Ts"), get_or(args, "tau_m", 1.0),
                              get(args, "gamma_b"), get_or(args, "gamma2", 0.0));
    push("I", f.value);
    push("I_corrected", f.corrected);
  } else if (op == "hl_fisher") {
    push("I_hl", hl_fisher(static_cast<int>(get(args, "M")), get(args, "N"),
                           get_or(args, "tau_m", 1.0)));
  } else if (op == "heisenberg_db") {
    push("dB", heisenberg_uncertainty(static_cast<int>(get(args, "M")),
                                      get(args, "T"), constants_from(args)));
  } else if (op == "uncertainty_bound") {
    push("dB", uncertainty_bound(static_cast<std::int64_t>(get(args, "N")),
                                 static_cast<int>(get(args, "M")),
                                 get(args, "k0Ts"), get_or(args, "tau_m", 1.0),
                                 constants_from(args)));
  } else if (op == "nv_alone_db") {
    push("dB", nv_alone_uncertainty(get(args, "T2_nv"), get(args, "T"),
                                    constants_from(args)));
  } else if (op == "crossover_M") {
    push("M", crossover_M(get(args, "ratio")));
  } else if (op == "cramer_rao") {
    push("domega", cramer_rao(get(args, "I")));
  } else {
    throw Error(ErrorCode::invalid_argument, "analytic: unknown op '" + op + "'");
  }
  return r;
}

const std::vector<std::pair<std::string, std::string>>& op_catalog() {
  static const std::vector<std::pair<std::string, std::string>> cat = {
      {"effective_beta", "A_perp [rad/s], Ts [s] (or k0Ts [rad])"},
      {"gamma_b", "k0Ts|beta [rad] -> beta^2 [1/step]"},
      {"gamma_b_exact", "k0Ts|beta [rad] -> -log((1+cos 2beta)/2) [1/step]"},
      {"decay_rate", "k0Ts|beta [rad], gamma2 [1/step]"},
      {"signal", "n, M, k0Ts [rad], phi [rad/step]"},
      {"fisher_sum", "N, M, k0Ts [rad], gamma [1/step], phi [rad/step], tau_m [s]"},
      {"fisher_closed", "N, M, k0Ts [rad], gamma [1/step], tau_m [s]"},
      {"fisher_series", "N, M, k0Ts [rad], gamma [1/step], tau_m [s]"},
      {"fisher_asymptote", "N, M, k0Ts [rad], gamma_b, gamma2 [1/step], tau_m [s]"},
      {"hl_fisher", "M, N, tau_m [s]"},
      {"heisenberg_db", "M, T [s] (hbar, mu_n optional)"},
      {"uncertainty_bound", "N, M, k0Ts [rad], tau_m [s] (hbar, mu_n optional)"},
      {"nv_alone_db", "T2_nv [s], T [s] (hbar, mu_e optional)"},
      {"crossover_M", "ratio = (mu_e/mu_n)^2 T2_nv/T2_n"},
      {"cramer_rao", "I [s^2] -> delta omega [rad/s]"},
  };
  return cat;
}

}  // namespace seqmag::analytic
