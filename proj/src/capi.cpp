#include "seqmag.h"

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include "analytic.hpp"
#include "experiments.hpp"
#include "oracle.hpp"
#include "threading.hpp"

using namespace seqmag;

struct seqmag_config {
  experiments::ExperimentConfig cfg;
};

struct seqmag_table {
  std::string header;
  std::string csv;
  std::vector<std::vector<double>> cells;
};

namespace {

thread_local std::string t_last_error;

int fail(ErrorCode code, const std::string& msg) {
  t_last_error = msg;
  return code == ErrorCode::invalid_argument ? SEQMAG_EINVAL : SEQMAG_ERUNTIME;
}

template <typename Fn>
int guarded(Fn&& fn) {
  try {
    fn();
    t_last_error.clear();
    return SEQMAG_OK;
  } catch (const Error& e) {
    return fail(e.code(), e.what());
  } catch (const std::exception& e) {
    return fail(ErrorCode::runtime, e.what());
  }
}

double parse_cell(const std::string& s) {
  if (s.empty()) return std::numeric_limits<double>::quiet_NaN();
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) return std::numeric_limits<double>::quiet_NaN();
    return v;
  } catch (...) {
    return std::numeric_limits<double>::quiet_NaN();
  }
}

seqmag_table* table_from_csv(const std::string& header,
                             const std::string& csv) {
  auto* t = new seqmag_table;
  t->header = header;
  t->csv = csv;
  std::istringstream in(csv);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line == header) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(parse_cell(cell));
    // trailing empty cell is dropped by getline; pad to header width
    t->cells.push_back(std::move(row));
  }
  std::size_t width = 1;
  for (char c : header) width += (c == ',');
  for (auto& row : t->cells)
    row.resize(width, std::numeric_limits<double>::quiet_NaN());
  return t;
}

int copy_out(const std::string& text, char* buf, size_t len, size_t* needed) {
  if (needed) *needed = text.size() + 1;
  if (buf && len > 0) {
    const size_t n = std::min(len - 1, text.size());
    std::memcpy(buf, text.data(), n);
    buf[n] = '\0';
  }
  return SEQMAG_OK;
}

}  // namespace

extern "C" {

const char* seqmag_version(void) { return "0.1.0"; }

const char* seqmag_last_error(void) { return t_last_error.c_str(); }

int seqmag_set_threads(int n) {
  set_thread_count(n);
  return SEQMAG_OK;
}

int seqmag_config_new(const char* preset, seqmag_config** out) {
  if (!out) return fail(ErrorCode::invalid_argument, "null output pointer");
  *out = nullptr;
  return guarded([&] {
    auto cfg = std::make_unique<seqmag_config>();
    cfg->cfg.preset = experiments::preset_from_string(
        preset && *preset ? preset : "custom");
    *out = cfg.release();
  });
}

int seqmag_config_set(seqmag_config* cfg, const char* key, const char* value) {
  if (!cfg || !key || !value)
    return fail(ErrorCode::invalid_argument, "null config/key/value");
  return guarded([&] {
    const std::string k = key;
    require(!cfg->cfg.overrides.count(k),
            "config: duplicate key '" + k + "'");
    // validate eagerly so bad keys fail at the call site
    experiments::ExperimentConfig probe = cfg->cfg;
    probe.overrides[k] = value;
    probe.output_path.clear();
    if (k != "values" && k != "splits") {
      bool known = false;
      for (const auto& [name, desc] : experiments::config_key_catalog())
        known = known || name == k;
      require(known, "config: unknown key '" + k + "'");
    }
    cfg->cfg.overrides[k] = value;
  });
}

int seqmag_config_load_file(seqmag_config* cfg, const char* path) {
  if (!cfg || !path) return fail(ErrorCode::invalid_argument, "null argument");
  return guarded([&] {
    std::ifstream in(path);
    require(in.good(), std::string("cannot open config file: ") + path,
            ErrorCode::runtime);
    std::string line;
    int lineno = 0;
    std::map<std::string, std::string> file_pairs;
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      auto trim = [](std::string s) {
        const auto a = s.find_first_not_of(" \t\r");
        const auto b = s.find_last_not_of(" \t\r");
        return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
      };
      line = trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      require(eq != std::string::npos,
              "config file line " + std::to_string(lineno) +
                  ": expected key = value");
      const std::string k = trim(line.substr(0, eq));
      const std::string v = trim(line.substr(eq + 1));
      require(!file_pairs.count(k),
              "config file: duplicate key '" + k + "'");
      file_pairs[k] = v;
    }
    for (const auto& [k, v] : file_pairs) {
      if (k == "preset") {
        cfg->cfg.preset = experiments::preset_from_string(v);
        continue;
      }
      if (k == "seed") {
        cfg->cfg.base_seed = std::stoull(v);
        continue;
      }
      if (cfg->cfg.overrides.count(k)) continue;  // explicit settings win
      bool known = false;
      for (const auto& [name, desc] : experiments::config_key_catalog())
        known = known || name == k;
      require(known, "config file: unknown key '" + k + "'");
      cfg->cfg.overrides[k] = v;
    }
  });
}

int seqmag_config_set_seed(seqmag_config* cfg, uint64_t seed) {
  if (!cfg) return fail(ErrorCode::invalid_argument, "null config");
  cfg->cfg.base_seed = seed;
  return SEQMAG_OK;
}

void seqmag_config_free(seqmag_config* cfg) { delete cfg; }

int seqmag_catalog(const char* what, char* buf, size_t len, size_t* needed) {
  if (!what) return fail(ErrorCode::invalid_argument, "null catalog name");
  return guarded([&] {
    std::ostringstream os;
    const std::string w = what;
    if (w == "presets") {
      for (const auto& name : experiments::preset_names())
        os << name << "\t\n";
    } else if (w == "config_keys") {
      for (const auto& [name, desc] : experiments::config_key_catalog())
        os << name << '\t' << desc << "\n";
    } else if (w == "analytic_ops") {
      for (const auto& [name, desc] : analytic::op_catalog())
        os << name << '\t' << desc << "\n";
    } else {
      throw Error(ErrorCode::invalid_argument,
                  "unknown catalog '" + w + "'");
    }
    copy_out(os.str(), buf, len, needed);
  });
}

int seqmag_run(const seqmag_config* cfg, seqmag_table** out) {
  if (!cfg || !out) return fail(ErrorCode::invalid_argument, "null argument");
  *out = nullptr;
  return guarded([&] {
    const auto table = experiments::run_experiment(cfg->cfg);
    *out = table_from_csv(experiments::ResultTable::csv_header(),
                          table.to_csv());
  });
}

int seqmag_sweep(const seqmag_config* cfg, const char* parameter,
                 const double* values, size_t n_values, seqmag_table** out) {
  if (!cfg || !out || !parameter || (!values && n_values > 0))
    return fail(ErrorCode::invalid_argument, "null argument");
  *out = nullptr;
  return guarded([&] {
    const std::vector<double> vals(values, values + n_values);
    const auto table = experiments::sweep(parameter, vals, cfg->cfg);
    *out = table_from_csv(experiments::ResultTable::csv_header(),
                          table.to_csv());
  });
}

int seqmag_trajectory(const seqmag_config* cfg, seqmag_table** out) {
  if (!cfg || !out) return fail(ErrorCode::invalid_argument, "null argument");
  *out = nullptr;
  return guarded([&] {
    const auto table = experiments::run_single_trajectory(cfg->cfg);
    *out = table_from_csv(experiments::TrajectoryTable::csv_header(),
                          table.to_csv());
  });
}

int seqmag_analytic_eval(const char* op, const char* const* keys,
                         const double* values, size_t n_args,
                         double* out_values, size_t cap, size_t* n_out) {
  if (!op || (n_args > 0 && (!keys || !values)))
    return fail(ErrorCode::invalid_argument, "null argument");
  return guarded([&] {
    std::map<std::string, double> args;
    for (size_t i = 0; i < n_args; ++i) {
      require(keys[i] != nullptr, "analytic: null key");
      require(!args.count(keys[i]),
              std::string("analytic: duplicate key '") + keys[i] + "'");
      args[keys[i]] = values[i];
    }
    const auto result = analytic::evaluate(op, args);
    if (n_out) *n_out = result.values.size();
    for (size_t i = 0; i < result.values.size() && i < cap; ++i)
      out_values[i] = result.values[i];
  });
}

int seqmag_validate(int max_m, char* report, size_t len, int* all_passed) {
  return guarded([&] {
    const auto rep = oracle::run_validation(max_m);
    if (all_passed) *all_passed = rep.all_passed() ? 1 : 0;
    copy_out(rep.to_string(), report, len, nullptr);
  });
}

size_t seqmag_table_rows(const seqmag_table* t) {
  return t ? t->cells.size() : 0;
}

size_t seqmag_table_cols(const seqmag_table* t) {
  if (!t) return 0;
  std::size_t width = 1;
  for (char c : t->header) width += (c == ',');
  return width;
}

const char* seqmag_table_header(const seqmag_table* t) {
  return t ? t->header.c_str() : "";
}

int seqmag_table_cell(const seqmag_table* t, size_t row, size_t col,
                      double* out) {
  if (!t || !out) return fail(ErrorCode::invalid_argument, "null argument");
  if (row >= t->cells.size() || col >= t->cells[row].size())
    return fail(ErrorCode::invalid_argument, "table index out of range");
  *out = t->cells[row][col];
  return SEQMAG_OK;
}

int seqmag_table_write_csv(const seqmag_table* t, const char* path) {
  if (!t || !path) return fail(ErrorCode::invalid_argument, "null argument");
  return guarded([&] {
    if (std::strcmp(path, "-") == 0) {
      std::fwrite(t->csv.data(), 1, t->csv.size(), stdout);
      return;
    }
    std::ofstream out(path, std::ios::trunc);
    require(out.good(), std::string("cannot open output file: ") + path,
            ErrorCode::runtime);
    out << t->csv;
    require(out.good(), std::string("write failed: ") + path,
            ErrorCode::runtime);
  });
}

int seqmag_table_csv(const seqmag_table* t, char* buf, size_t len,
                     size_t* needed) {
  if (!t) return fail(ErrorCode::invalid_argument, "null table");
  return copy_out(t->csv, buf, len, needed);
}

void seqmag_table_free(seqmag_table* t) { delete t; }

}  // extern "C"
