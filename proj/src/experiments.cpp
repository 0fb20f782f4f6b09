#include "experiments.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "analytic.hpp"

namespace seqmag::experiments {

namespace {

struct Resolved {
  ProtocolParams params;
  int runs = 96;
  bool entangle_mode = false;
  bool half_octave = true;
  std::vector<entanglement::Bipartition> splits;
  std::string sweep_param;            // internal per-preset sweep
  std::vector<double> sweep_values;
  std::map<double, std::uint64_t> n_max_per_value;  // fig2si: per-coupling
};

double to_double(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    require(pos == value.size(), "");
    return v;
  } catch (...) {
    throw Error(ErrorCode::invalid_argument,
                "config: value for '" + key + "' is not a number: " + value);
  }
}

std::uint64_t to_u64(const std::string& key, const std::string& value) {
  const double v = to_double(key, value);
  require(v >= 0 && v == std::floor(v) && v <= 9.0e18,
          "config: '" + key + "' must be a non-negative integer");
  return static_cast<std::uint64_t>(v);
}

std::vector<double> to_list(const std::string& key, const std::string& value) {
  std::vector<double> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(to_double(key, item));
  return out;
}

std::vector<entanglement::Bipartition> parse_splits(const std::string& value,
                                                    int M) {
  std::vector<entanglement::Bipartition> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto bar = item.find('|');
    require(bar != std::string::npos,
            "config: splits entries must look like M1|M2");
    const int m1 = static_cast<int>(to_double("splits", item.substr(0, bar)));
    const int m2 = static_cast<int>(to_double("splits", item.substr(bar + 1)));
    require(m1 >= 1 && m2 >= 1 && m1 + m2 == M,
            "config: split " + item + " does not partition M");
    out.push_back({m1, m2});
  }
  return out;
}

double k0ts_of(double beta) { return 0.5 * kPi * beta; }

Resolved preset_defaults(Preset preset) {
  Resolved r;
  ProtocolParams& p = r.params;
  p.phi = 0.7;
  p.tau_m = 1.0;
  switch (preset) {
    case Preset::fig1_product:
      p.M = 20;
      p.beta = analytic::effective_beta(0.01, 1.0);
      p.n_max = std::uint64_t(1) << 20;
      r.runs = 96;
      break;
    case Preset::fig1_mixed:
      p.M = 20;
      p.beta = analytic::effective_beta(0.01, 1.0);
      p.n_max = std::uint64_t(1) << 20;
      p.mixed_initial = true;
      p.polarization = 0.0;  // completely mixed register
      r.runs = 32;
      break;
    case Preset::fig1_strong_coupling:
      p.M = 20;
      p.beta = analytic::effective_beta(0.05, 1.0);
      p.n_max = std::uint64_t(1) << 16;
      r.runs = 96;
      break;
    case Preset::fig2_M_sweep:
      p.M = 20;
      p.beta = analytic::effective_beta(0.01, 1.0);
      p.n_max = std::uint64_t(1) << 18;
      r.runs = 96;
      r.half_octave = false;
      r.sweep_param = "M";
      r.sweep_values = {5, 10, 20, 40};
      break;
    case Preset::figdec_gamma_sweep: {
      p.M = 10;
      p.beta = analytic::effective_beta(0.01, 1.0);
      p.n_max = std::uint64_t(1) << 18;
      r.runs = 24;
      r.half_octave = false;
      r.sweep_param = "gamma2";
      const double gb = analytic::backaction_rate(p.beta);
      for (int i = 0; i < 5; ++i)
        r.sweep_values.push_back(10.0 * gb * std::pow(10.0, 0.25 * i));
      break;
    }
    case Preset::fig2si_ratio: {
      p.M = 20;
      p.n_max = std::uint64_t(1) << 19;
      r.runs = 96;
      r.sweep_param = "k0Ts";
      r.sweep_values = {0.01, 0.05};
      r.n_max_per_value[0.01] = std::uint64_t(1) << 19;
      r.n_max_per_value[0.05] = std::uint64_t(1) << 14;
      p.beta = analytic::effective_beta(0.01, 1.0);
      break;
    }
    case Preset::fig3si_entanglement:
      p.M = 10;
      p.beta = analytic::effective_beta(0.01, 1.0);
      p.n_max = std::uint64_t(1) << 16;
      r.runs = 200;
      r.entangle_mode = true;
      break;
    case Preset::custom:
      p.M = 2;
      p.beta = analytic::effective_beta(0.01, 1.0);
      p.n_max = 16;
      r.runs = 2;
      break;
  }
  return r;
}

void apply_override(Resolved& r, const std::string& key,
                    const std::string& value) {
  ProtocolParams& p = r.params;
  if (key == "M")
    p.M = static_cast<int>(to_u64(key, value));
  else if (key == "beta")
    p.beta = to_double(key, value);
  else if (key == "k0Ts")
    p.beta = analytic::effective_beta(to_double(key, value), 1.0);
  else if (key == "phi")
    p.phi = to_double(key, value);
  else if (key == "tau_m")
    p.tau_m = to_double(key, value);
  else if (key == "gamma2")
    p.gamma2 = to_double(key, value);
  else if (key == "polarization")
    p.polarization = to_double(key, value);
  else if (key == "alpha")
    p.alpha = to_double(key, value);
  else if (key == "N_max")
    p.n_max = to_u64(key, value);
  else if (key == "d_phi")
    p.d_phi = to_double(key, value);
  else if (key == "mixed")
    p.mixed_initial = to_u64(key, value) != 0;
  else if (key == "runs")
    r.runs = static_cast<int>(to_u64(key, value));
  else if (key == "checkpoints") {
    if (value == "half_octave")
      r.half_octave = true;
    else if (value == "pow2")
      r.half_octave = false;
    else
      throw Error(ErrorCode::invalid_argument,
                  "config: checkpoints must be pow2 or half_octave");
  } else if (key == "splits")
    r.splits = parse_splits(value, p.M);
  else if (key == "values")
    r.sweep_values = to_list(key, value);
  else
    throw Error(ErrorCode::invalid_argument,
                "config: unknown key '" + key + "'");
}

Resolved resolve(const ExperimentConfig& config) {
  Resolved r = preset_defaults(config.preset);
  // splits depend on M; apply M first so split validation sees the final value
  if (auto it = config.overrides.find("M"); it != config.overrides.end())
    apply_override(r, "M", it->second);
  for (const auto& [key, value] : config.overrides)
    if (key != "M") apply_override(r, key, value);
  if (r.entangle_mode && r.splits.empty())
    r.splits = {{1, r.params.M - 1},
                entanglement::equal_bipartition(r.params.M)};
  r.params.checkpoints =
      power_of_two_checkpoints(r.params.n_max, r.half_octave);
  return r;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string config_echo(const Resolved& r, std::uint64_t seed) {
  std::ostringstream os;
  const ProtocolParams& p = r.params;
  os << "M=" << p.M << " beta=" << fmt(p.beta) << " phi=" << fmt(p.phi)
     << " tau_m=" << fmt(p.tau_m) << " gamma2=" << fmt(p.gamma2)
     << " alpha=" << fmt(p.alpha) << " N_max=" << p.n_max
     << " d_phi=" << fmt(p.effective_d_phi()) << " mixed="
     << (p.mixed_initial ? 1 : 0) << " runs=" << r.runs << " seed=" << seed;
  return os.str();
}

void fisher_block(const Resolved& r, const std::string& tag,
                  std::uint64_t seed, ResultTable& table) {
  const ProtocolParams& p = r.params;
  const auto est = fisher::estimate_fisher(p, r.runs, seed);
  table.aborted_runs += est.aborted_runs;
  const double k0Ts = k0ts_of(p.beta);
  const double gb = analytic::backaction_rate_exact(p.beta);
  const double gamma = gb + p.gamma2;
  for (std::size_t i = 0; i < est.checkpoints.size(); ++i) {
    ResultRow row;
    row.param_tag = tag;
    row.n = est.checkpoints[i];
    row.m = p.M;
    row.beta = p.beta;
    row.gamma2 = p.gamma2;
    row.phi = p.phi;
    row.mean_fi = est.mean_fisher[i];
    row.std_err = est.std_error[i];
    row.runs = est.runs;
    row.closed_form =
        analytic::fisher_closed_form(static_cast<std::int64_t>(row.n), p.M,
                                     k0Ts, p.tau_m, gamma, p.phi)
            .value;
    row.asymptote = analytic::fisher_asymptote(static_cast<double>(row.n), p.M,
                                               k0Ts, p.tau_m, gb, p.gamma2)
                        .value;
    row.hl = analytic::hl_fisher(p.M, static_cast<double>(row.n), p.tau_m);
    table.rows.push_back(std::move(row));
  }
}

void entangle_block(const Resolved& r, const std::string& tag,
                    std::uint64_t seed, ResultTable& table) {
  const ProtocolParams& p = r.params;
  const auto trace = entanglement::entanglement_trace(p, r.splits, r.runs, seed);
  for (std::size_t s = 0; s < trace.splits.size(); ++s)
    for (std::size_t i = 0; i < trace.checkpoints.size(); ++i) {
      ResultRow row;
      row.param_tag = tag;
      row.n = trace.checkpoints[i];
      row.m = p.M;
      row.beta = p.beta;
      row.gamma2 = p.gamma2;
      row.phi = p.phi;
      row.runs = trace.runs;
      row.mean_ln = trace.mean_ln[s][i];
      row.std_err = trace.std_error[s][i];
      row.ln_split = std::to_string(trace.splits[s].M1) + "|" +
                     std::to_string(trace.splits[s].M2);
      table.rows.push_back(std::move(row));
    }
}

}  // namespace

Preset preset_from_string(const std::string& name) {
  for (int i = 0; i <= static_cast<int>(Preset::custom); ++i)
    if (to_string(static_cast<Preset>(i)) == name)
      return static_cast<Preset>(i);
  throw Error(ErrorCode::invalid_argument,
              "config: unknown preset '" + name + "'");
}

std::string to_string(Preset preset) {
  switch (preset) {
    case Preset::fig1_product: return "fig1_product";
    case Preset::fig1_mixed: return "fig1_mixed";
    case Preset::fig1_strong_coupling: return "fig1_strong_coupling";
    case Preset::fig2_M_sweep: return "fig2_M_sweep";
    case Preset::figdec_gamma_sweep: return "figdec_gamma_sweep";
    case Preset::fig2si_ratio: return "fig2si_ratio";
    case Preset::fig3si_entanglement: return "fig3si_entanglement";
    case Preset::custom: return "custom";
  }
  return "custom";
}

std::vector<std::string> preset_names() {
  std::vector<std::string> out;
  for (int i = 0; i <= static_cast<int>(Preset::custom); ++i)
    out.push_back(to_string(static_cast<Preset>(i)));
  return out;
}

const std::vector<std::pair<std::string, std::string>>& config_key_catalog() {
  static const std::vector<std::pair<std::string, std::string>> cat = {
      {"M", "spin count (integer >= 1)"},
      {"beta", "entangling angle per measurement [rad], (0, pi/4]"},
      {"k0Ts", "coupling-time product [rad]; sets beta = 2 k0Ts / pi"},
      {"phi", "detuning phase per step [rad]"},
      {"tau_m", "time between measurements [s]"},
      {"gamma2", "nuclear dephasing per step [1/step]"},
      {"polarization", "initial polarization P in [0, 1] (sampled states)"},
      {"alpha", "sensor readout-basis angle [rad]; pi/2 = Y basis"},
      {"N_max", "total measurements (integer >= 1)"},
      {"d_phi", "finite-difference half-step [rad]; 0 = automatic"},
      {"mixed", "1 = sample a mixed +-x initial state per run"},
      {"runs", "trajectories per block (integer >= 2)"},
      {"checkpoints", "pow2 | half_octave"},
      {"splits", "bipartitions, e.g. 1|9,5|5 (entanglement mode)"},
      {"values", "comma list for sweep presets/subcommand"},
  };
  return cat;
}

const char* ResultTable::csv_header() {
  return "preset,param_tag,N,M,beta,gamma2,phi,mean_FI,std_err,runs,"
         "analytic_eq9,analytic_eq14,hl_fisher,mean_LN,LN_split";
}

std::string ResultTable::to_csv() const {
  std::ostringstream os;
  for (const auto& c : comments) os << "# " << c << "\n";
  os << csv_header() << "\n";
  auto opt = [](const std::optional<double>& v) {
    return v ? fmt(*v) : std::string();
  };
  for (const auto& r : rows) {
    os << r.preset << ',' << r.param_tag << ',' << r.n << ',' << r.m << ','
       << fmt(r.beta) << ',' << fmt(r.gamma2) << ',' << fmt(r.phi) << ','
       << opt(r.mean_fi) << ',' << opt(r.std_err) << ',' << r.runs << ','
       << opt(r.closed_form) << ',' << opt(r.asymptote) << ',' << opt(r.hl)
       << ',' << opt(r.mean_ln) << ',' << r.ln_split << "\n";
  }
  os << "# aborted_runs=" << aborted_runs << "\n";
  return os.str();
}

void ResultTable::write_csv(const std::string& path) const {
  if (path.empty() || path == "-") {
    std::cout << to_csv();
    return;
  }
  std::ofstream out(path, std::ios::trunc);
  require(out.good(), "cannot open output file: " + path, ErrorCode::runtime);
  out << to_csv();
  require(out.good(), "write failed: " + path, ErrorCode::runtime);
}

ResultTable run_experiment(const ExperimentConfig& config) {
  Resolved r = resolve(config);
  ResultTable table;
  const std::string name = to_string(config.preset);
  table.comments.push_back("seqmag " + name);
  table.comments.push_back(config_echo(r, config.base_seed));

  if (r.entangle_mode) {
    entangle_block(r, "", config.base_seed, table);
  } else if (!r.sweep_param.empty()) {
    for (const double v : r.sweep_values) {
      Resolved block = r;
      apply_override(block, r.sweep_param, fmt(v));
      if (auto it = r.n_max_per_value.find(v); it != r.n_max_per_value.end()) {
        block.params.n_max = it->second;
        block.params.checkpoints =
            power_of_two_checkpoints(it->second, block.half_octave);
      }
      fisher_block(block, r.sweep_param + "=" + fmt(v), config.base_seed,
                   table);
    }
  } else {
    fisher_block(r, "", config.base_seed, table);
  }
  for (auto& row : table.rows) row.preset = name;
  if (!config.output_path.empty()) table.write_csv(config.output_path);
  return table;
}

ResultTable sweep(const std::string& parameter,
                  const std::vector<double>& values,
                  const ExperimentConfig& base) {
  static const std::vector<std::string> kSweepable = {"M",      "beta",
                                                      "k0Ts",   "gamma2",
                                                      "phi",    "N_max"};
  bool ok = false;
  for (const auto& s : kSweepable) ok = ok || (s == parameter);
  require(ok, "sweep: parameter '" + parameter + "' is not sweepable");

  ResultTable table;
  table.comments.push_back("seqmag sweep " + parameter);
  for (const double v : values) {
    ExperimentConfig cfg = base;
    cfg.output_path.clear();
    cfg.overrides[parameter] = fmt(v);
    ResultTable block = run_experiment(cfg);
    if (table.comments.size() == 1 && block.comments.size() > 1)
      table.comments.push_back(block.comments[1]);
    for (auto& row : block.rows) {
      row.param_tag = parameter + "=" + fmt(v);
      table.rows.push_back(std::move(row));
    }
    table.aborted_runs += block.aborted_runs;
  }
  if (!base.output_path.empty()) table.write_csv(base.output_path);
  return table;
}

const char* TrajectoryTable::csv_header() {
  return "N,logp_center,logp_plus,logp_minus,norm_drift";
}

std::string TrajectoryTable::to_csv() const {
  std::ostringstream os;
  for (const auto& c : comments) os << "# " << c << "\n";
  os << csv_header() << "\n";
  for (const auto& cp : rows)
    os << cp.n << ',' << fmt(cp.logp_center) << ',' << fmt(cp.logp_plus)
       << ',' << fmt(cp.logp_minus) << ',' << fmt(cp.norm_drift) << "\n";
  return os.str();
}

void TrajectoryTable::write_csv(const std::string& path) const {
  if (path.empty() || path == "-") {
    std::cout << to_csv();
    return;
  }
  std::ofstream out(path, std::ios::trunc);
  require(out.good(), "cannot open output file: " + path, ErrorCode::runtime);
  out << to_csv();
  require(out.good(), "write failed: " + path, ErrorCode::runtime);
}

TrajectoryTable run_single_trajectory(const ExperimentConfig& config) {
  Resolved r = resolve(config);
  const TrajectoryRecord rec = run_trajectory(r.params, config.base_seed);
  TrajectoryTable table;
  table.comments.push_back("seqmag simulate " + to_string(config.preset));
  table.comments.push_back(config_echo(r, config.base_seed));
  table.rows = rec.checkpoints;
  if (!config.output_path.empty()) table.write_csv(config.output_path);
  return table;
}

}  // namespace seqmag::experiments
