#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "common.hpp"

namespace seqmag::analytic {

struct PhysicalConstants {
  double hbar = 1.054571817e-34;  // J s
  double mu_n = 1.41060679736e-26;  // J/T, proton
  double mu_e = 9.2847647043e-24;   // J/T, electron
};

// beta = 2 * A_perp * Ts / pi
double effective_beta(double A_perp, double Ts);

// Fully controlled (M+1)-particle Ramsey benchmark: dB = hbar/(mu_n (M+1) T).
double heisenberg_uncertainty(int M, double T, const PhysicalConstants& c);

// Benchmark Fisher information in detuning units: (M+1)^2 (N tau_m)^2.
double hl_fisher(int M, double N, double tau_m);

// Readout probability p_n = cos^2( (2 M k0Ts / pi) cos(phi n) - pi/4 ),
// valid for M k0Ts << 1 (not enforced).
double signal_probability(std::int64_t n, int M, double k0Ts, double phi);

// Exact product-form probability for per-spin couplings c_m = 4 A_perp^m Ts/pi
// (in radians), accumulated phases phase_m, polarization P and readout
// angle alpha.
double signal_probability_general(const std::vector<double>& couplings,
                                  const std::vector<double>& phases, double P,
                                  double alpha);

// Per-step sensor-induced decay of transverse spin coherence.
double backaction_rate(double beta);        // beta^2, leading order
double backaction_rate_exact(double beta);  // -log((1 + cos 2 beta)/2)
// Total per-step transverse decay: exact backaction plus nuclear dephasing.
double decay_rate(double beta, double gamma2);

// I_N = sum_{n=1}^N (4 tau_m M k_n Ts n / pi)^2 sin^2(phi n), k_n = k0 e^{-g n}
double fisher_sum_exact(std::int64_t N, int M, double k0Ts, double tau_m,
                        double gamma, double phi);

struct ClosedFormFisher {
  double value = 0;         // (2 M^2 tau^2 k0Ts^2/pi^2) * bracket / gamma^3
  double series = 0;        // small-gamma*N expansion (cubic law + corrections)
  bool regime_ok = false;   // max(gamma, 1/N) << 2 pi phi and M k0Ts << 1
};
ClosedFormFisher fisher_closed_form(std::int64_t N, int M, double k0Ts,
                                    double tau_m, double gamma,
                                    double phi = 0.7);

// dB <= sqrt( 3 pi^2 hbar^2 / (8 mu_n^2 M^2 tau^2 k0Ts^2) / N^3 )
double uncertainty_bound(std::int64_t N, int M, double k0Ts, double tau_m,
                         const PhysicalConstants& c);

struct AsymptoticFisher {
  double value = 0;      // sin^4(2 beta)/(16 (gb+g2)^3) * (M^2/2) * tau^2 * N
  double corrected = 0;  // empirical prefactor correction (see below)
};
// Linear-in-N asymptote of the trajectory Fisher information. The corrected
// variant halves the M=1 prefactor and applies cos(2 beta)^{2(M-1)} for M > 1.
AsymptoticFisher fisher_asymptote(double N, int M, double k0Ts, double tau_m,
                                  double gamma_b, double gamma2);

// Bare sensor under pure dephasing, optimal interrogation:
// dB = sqrt( 2 e hbar^2 / (mu_e^2 T2 T) ), with e Euler's number.
double nv_alone_uncertainty(double T2_nv, double T, const PhysicalConstants& c);

// Spin count above which the assisted sensor beats the bare one:
// sqrt( 27/(4e) * ratio ), ratio = (mu_e/mu_n)^2 T2_nv / T2_n.
double crossover_M(double ratio);

// delta_omega >= 1/sqrt(I)
double cramer_rao(double fisher_information);

// ---------------------------------------------------------------------------
// Name-based evaluation (CLI `analytic`, C API). Each op maps a key=value set
// to one or more output values.
struct AnalyticResult {
  std::vector<std::string> names;
  std::vector<double> values;
};
AnalyticResult evaluate(const std::string& op,
                        const std::map<std::string, double>& args);
// op name -> short usage line (keys with units)
const std::vector<std::pair<std::string, std::string>>& op_catalog();

}  // namespace seqmag::analytic
