#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "entanglement.hpp"
#include "fisher.hpp"
#include "protocol.hpp"

namespace seqmag::experiments {

enum class Preset {
  fig1_product,
  fig1_mixed,
  fig1_strong_coupling,
  fig2_M_sweep,
  figdec_gamma_sweep,
  fig2si_ratio,
  fig3si_entanglement,
  custom,
};
Preset preset_from_string(const std::string& name);
std::string to_string(Preset preset);
std::vector<std::string> preset_names();

struct ExperimentConfig {
  Preset preset = Preset::custom;
  std::map<std::string, std::string> overrides;  // validated key -> value
  std::string output_path;                       // empty: no file written
  std::uint64_t base_seed = 1;
};

// key -> "unit/meaning" catalog; every accepted config key appears here.
const std::vector<std::pair<std::string, std::string>>& config_key_catalog();

struct ResultRow {
  std::string preset;
  std::string param_tag;
  std::uint64_t n = 0;
  int m = 0;
  double beta = 0, gamma2 = 0, phi = 0;
  std::optional<double> mean_fi, std_err;
  int runs = 0;
  std::optional<double> closed_form, asymptote, hl;
  std::optional<double> mean_ln;
  std::string ln_split;  // "M1|M2" for entanglement rows
};

struct ResultTable {
  std::vector<std::string> comments;  // emitted as '# ...' lines
  std::vector<ResultRow> rows;
  int aborted_runs = 0;

  static const char* csv_header();
  std::string to_csv() const;
  void write_csv(const std::string& path) const;  // "-" = stdout
};

// Runs the preset (with overrides applied) and, when output_path is set,
// writes the CSV. Deterministic given (config, base_seed).
ResultTable run_experiment(const ExperimentConfig& config);

// One block per value with identical seeds across values; `parameter` must be
// one of M, beta, k0Ts, gamma2, phi, N_max.
ResultTable sweep(const std::string& parameter,
                  const std::vector<double>& values,
                  const ExperimentConfig& base);

// Single-trajectory checkpoint dump (CLI `simulate`).
struct TrajectoryTable {
  std::vector<std::string> comments;
  std::vector<TrajectoryCheckpoint> rows;

  static const char* csv_header();  // N,logp_center,logp_plus,logp_minus,norm_drift
  std::string to_csv() const;
  void write_csv(const std::string& path) const;
};
TrajectoryTable run_single_trajectory(const ExperimentConfig& config);

}  // namespace seqmag::experiments
