// Command-line frontend for the seqmag shared library. Talks to the library
// exclusively through the C API in seqmag.h.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "seqmag.h"

namespace {

int die(int code) {
  std::fprintf(stderr, "seqmag: %s\n", seqmag_last_error());
  return code;
}

std::string catalog(const char* what) {
  size_t needed = 0;
  if (seqmag_catalog(what, nullptr, 0, &needed) != SEQMAG_OK) return {};
  std::string buf(needed, '\0');
  seqmag_catalog(what, buf.data(), buf.size(), &needed);
  buf.resize(needed ? needed - 1 : 0);
  return buf;
}

std::string indent_catalog(const std::string& listing) {
  std::string out;
  size_t start = 0;
  while (start < listing.size()) {
    size_t end = listing.find('\n', start);
    if (end == std::string::npos) end = listing.size();
    std::string line = listing.substr(start, end - start);
    const size_t tab = line.find('\t');
    if (tab != std::string::npos) {
      out += "  " + line.substr(0, tab);
      if (tab + 1 < line.size())
        out += std::string(line.size() > 20 ? 2 : 20 - tab, ' ') + "  " +
               line.substr(tab + 1);
    } else {
      out += "  " + line;
    }
    out += "\n";
    start = end + 1;
  }
  return out;
}

struct CommonOpts {
  std::string preset = "custom";
  std::string config_path;
  std::vector<std::string> sets;
  std::uint64_t seed = 1;
  int threads = 0;
  std::string output = "-";
};

void add_common(CLI::App* cmd, CommonOpts& o, bool with_preset = true) {
  if (with_preset)
    cmd->add_option("--preset", o.preset,
                    "experiment preset (see list in --help)");
  cmd->add_option("--config", o.config_path,
                  "flat key = value config file; inline --set wins");
  cmd->add_option("--set", o.sets, "inline override key=value (repeatable)");
  cmd->add_option("--seed", o.seed, "base seed (64-bit)");
  cmd->add_option("--threads", o.threads,
                  "worker threads (0 = auto; 1 = canonical serial order)");
  cmd->add_option("--output,-o", o.output, "output path ('-' = stdout)");
}

// builds a config from preset/file/inline overrides; caller owns the handle
int build_config(const CommonOpts& o, seqmag_config** out) {
  int rc = seqmag_config_new(o.preset.c_str(), out);
  if (rc != SEQMAG_OK) return rc;
  for (const auto& kv : o.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "seqmag: --set expects key=value, got '%s'\n",
                   kv.c_str());
      seqmag_config_free(*out);
      *out = nullptr;
      return SEQMAG_EINVAL;
    }
    rc = seqmag_config_set(*out, kv.substr(0, eq).c_str(),
                           kv.substr(eq + 1).c_str());
    if (rc != SEQMAG_OK) {
      seqmag_config_free(*out);
      *out = nullptr;
      return rc;
    }
  }
  if (!o.config_path.empty()) {
    rc = seqmag_config_load_file(*out, o.config_path.c_str());
    if (rc != SEQMAG_OK) {
      seqmag_config_free(*out);
      *out = nullptr;
      return rc;
    }
  }
  seqmag_config_set_seed(*out, o.seed);
  if (o.threads > 0) seqmag_set_threads(o.threads);
  return SEQMAG_OK;
}

int run_table_command(const CommonOpts& o,
                      int (*runner)(const seqmag_config*, seqmag_table**)) {
  seqmag_config* cfg = nullptr;
  int rc = build_config(o, &cfg);
  if (rc != SEQMAG_OK) return die(rc);
  seqmag_table* table = nullptr;
  rc = runner(cfg, &table);
  seqmag_config_free(cfg);
  if (rc != SEQMAG_OK) return die(rc);
  rc = seqmag_table_write_csv(table, o.output.c_str());
  seqmag_table_free(table);
  if (rc != SEQMAG_OK) return die(rc);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"seqmag — sequential weak-measurement magnetometry simulator"};
  app.require_subcommand(1);
  app.footer("Experiment presets:\n" + indent_catalog(catalog("presets")) +
             "\nConfig keys (for --set and config files):\n" +
             indent_catalog(catalog("config_keys")) +
             "\nAnalytic ops (for the analytic subcommand):\n" +
             indent_catalog(catalog("analytic_ops")));

  CommonOpts sim_o, fish_o, ent_o, sweep_o;
  std::string sweep_param;
  std::vector<double> sweep_values;
  std::string analytic_op;
  std::vector<std::string> analytic_args;
  int validate_max_m = 6;

  auto* sim = app.add_subcommand(
      "simulate", "run one trajectory and dump checkpoint log-likelihoods");
  add_common(sim, sim_o);

  auto* fish = app.add_subcommand(
      "fisher", "Monte Carlo Fisher-information experiment (presets)");
  add_common(fish, fish_o);
  fish->get_option("--preset")->default_str("fig1_product");

  auto* ent = app.add_subcommand("entangle",
                                 "trajectory-averaged logarithmic negativity");
  add_common(ent, ent_o);
  ent->get_option("--preset")->default_str("fig3si_entanglement");

  auto* sw = app.add_subcommand("sweep", "repeat an experiment over a "
                                         "parameter list, shared seeds");
  add_common(sw, sweep_o);
  sw->add_option("--param", sweep_param, "M | beta | k0Ts | gamma2 | phi | N_max")
      ->required();
  sw->add_option("--values", sweep_values, "comma-separated values")
      ->required()
      ->delimiter(',');

  auto* an = app.add_subcommand(
      "analytic", "evaluate a closed-form quantity from key=value arguments");
  an->add_option("op", analytic_op, "operation name")->required();
  an->add_option("args", analytic_args, "key=value arguments");

  auto* val = app.add_subcommand(
      "validate", "run built-in oracle cross-checks and report pass/fail");
  val->add_option("--max-M", validate_max_m,
                  "largest register for full-space comparisons (<= 12)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;  // bad flags and arguments exit 1
  }

  if (sim->parsed()) {
    sim_o.preset = sim->get_option("--preset")->as<std::string>();
    return run_table_command(sim_o, seqmag_trajectory);
  }
  if (fish->parsed()) {
    fish_o.preset = fish->get_option("--preset")->as<std::string>();
    if (fish_o.preset == "custom" && !fish->get_option("--preset")->count())
      fish_o.preset = "fig1_product";
    return run_table_command(fish_o, seqmag_run);
  }
  if (ent->parsed()) {
    ent_o.preset = ent->get_option("--preset")->as<std::string>();
    if (ent_o.preset == "custom" && !ent->get_option("--preset")->count())
      ent_o.preset = "fig3si_entanglement";
    return run_table_command(ent_o, seqmag_run);
  }
  if (sw->parsed()) {
    seqmag_config* cfg = nullptr;
    int rc = build_config(sweep_o, &cfg);
    if (rc != SEQMAG_OK) return die(rc);
    seqmag_table* table = nullptr;
    rc = seqmag_sweep(cfg, sweep_param.c_str(), sweep_values.data(),
                      sweep_values.size(), &table);
    seqmag_config_free(cfg);
    if (rc != SEQMAG_OK) return die(rc);
    rc = seqmag_table_write_csv(table, sweep_o.output.c_str());
    seqmag_table_free(table);
    return rc == SEQMAG_OK ? 0 : die(rc);
  }
  if (an->parsed()) {
    std::vector<std::string> keys;
    std::vector<double> vals;
    for (const auto& kv : analytic_args) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) {
        std::fprintf(stderr, "seqmag: analytic expects key=value, got '%s'\n",
                     kv.c_str());
        return 1;
      }
      keys.push_back(kv.substr(0, eq));
      try {
        vals.push_back(std::stod(kv.substr(eq + 1)));
      } catch (...) {
        std::fprintf(stderr, "seqmag: bad number in '%s'\n", kv.c_str());
        return 1;
      }
    }
    std::vector<const char*> key_ptrs;
    for (const auto& k : keys) key_ptrs.push_back(k.c_str());
    double out[8];
    size_t n_out = 0;
    const int rc =
        seqmag_analytic_eval(analytic_op.c_str(), key_ptrs.data(), vals.data(),
                             keys.size(), out, 8, &n_out);
    if (rc != SEQMAG_OK) return die(rc);
    for (size_t i = 0; i < n_out && i < 8; ++i)
      std::printf("%.10g\n", out[i]);
    return 0;
  }
  if (val->parsed()) {
    std::string report(16384, '\0');
    int all_passed = 0;
    const int rc = seqmag_validate(validate_max_m, report.data(),
                                   report.size(), &all_passed);
    if (rc != SEQMAG_OK) return die(rc);
    std::fputs(report.c_str(), stdout);
    return all_passed ? 0 : 2;
  }
  return 1;
}
