#pragma once

#include <cstdint>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "cli_csv.hpp"
#include "ehmm/errors.hpp"

namespace ehmm::cli {

// Flat run configuration shared by every subcommand. The config file grammar
// is one `key = value` per line; full-line comments start with '#'. Values
// echoed to the resolved-config artifact round-trip exactly, so a run driven
// by that artifact reproduces the original bit for bit.
struct RunConfig {
  // model
  double sigma = 2.5;
  double eta = 2.5;
  double tau = 0.4;
  double init_mean = 0.0;
  double init_sd = 1.0;
  long n = 1000;
  // sampler
  std::string sampler = "ehmm";  // ehmm | metropolis
  int pool_size = 10;            // K
  double alpha = 0.0;
  std::string pool = "fixed";  // fixed | per-obs
  double mu = 0.0;
  double nu = 1.0;
  std::string proposal = "independence";  // independence | random-walk
  double proposal_sd = 1.0;
  long iters = 100;
  long burnin = 0;
  long thin = 1;
  std::vector<std::uint64_t> seeds = {1};
  // oracle grid
  double grid_lo = -3.0;
  double grid_hi = 3.0;
  long grid_m = 400;
  // diagnostics
  std::vector<long> probes = {200, 675};
  // io
  std::string init = "data";  // data | zero | file=PATH
  bool strict = false;
  std::string out = ".";
  std::string data;     // default: <out>/data.csv
  std::string samples;  // default: <out>/samples.csv
  std::string oracle;   // default: <out>/oracle.csv

  std::set<std::string> explicit_keys;

  bool was_set(const std::string& key) const {
    return explicit_keys.count(key) > 0;
  }
};

inline std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t");
  return s.substr(begin, end - begin + 1);
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> items;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) items.push_back(trim(item));
  return items;
}

inline bool parse_bool(const std::string& s, const std::string& what) {
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw UsageError("cannot parse " + what + " from '" + s + "'");
}

inline void set_config_key(RunConfig& cfg, const std::string& key,
                           const std::string& value) {
  if (key == "sigma") cfg.sigma = parse_double(value, key);
  else if (key == "eta") cfg.eta = parse_double(value, key);
  else if (key == "tau") cfg.tau = parse_double(value, key);
  else if (key == "init_mean") cfg.init_mean = parse_double(value, key);
  else if (key == "init_sd") cfg.init_sd = parse_double(value, key);
  else if (key == "n") cfg.n = parse_long(value, key);
  else if (key == "sampler") cfg.sampler = value;
  else if (key == "K") cfg.pool_size = static_cast<int>(parse_long(value, key));
  else if (key == "alpha") cfg.alpha = parse_double(value, key);
  else if (key == "pool") cfg.pool = value;
  else if (key == "mu") cfg.mu = parse_double(value, key);
  else if (key == "nu") cfg.nu = parse_double(value, key);
  else if (key == "proposal") cfg.proposal = value;
  else if (key == "proposal_sd") cfg.proposal_sd = parse_double(value, key);
  else if (key == "iters") cfg.iters = parse_long(value, key);
  else if (key == "burnin") cfg.burnin = parse_long(value, key);
  else if (key == "thin") cfg.thin = parse_long(value, key);
  else if (key == "seed") {
    cfg.seeds.clear();
    for (const auto& item : split_list(value))
      cfg.seeds.push_back(parse_u64(item, key));
    if (cfg.seeds.empty()) throw UsageError("seed list is empty");
  } else if (key == "grid_lo") cfg.grid_lo = parse_double(value, key);
  else if (key == "grid_hi") cfg.grid_hi = parse_double(value, key);
  else if (key == "grid_m") cfg.grid_m = parse_long(value, key);
  else if (key == "probe") {
    cfg.probes.clear();
    for (const auto& item : split_list(value))
      cfg.probes.push_back(parse_long(item, key));
  } else if (key == "init") cfg.init = value;
  else if (key == "strict") cfg.strict = parse_bool(value, key);
  else if (key == "out") cfg.out = value;
  else if (key == "data") cfg.data = value;
  else if (key == "samples") cfg.samples = value;
  else if (key == "oracle") cfg.oracle = value;
  else throw UsageError("unknown config key '" + key + "'");
  cfg.explicit_keys.insert(key);
}

inline void load_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos)
      throw UsageError(path + ":" + std::to_string(line_no) +
                       ": expected 'key = value'");
    set_config_key(cfg, trim(stripped.substr(0, eq)),
                   trim(stripped.substr(eq + 1)));
  }
}

template <class T>
std::string join_list(const std::vector<T>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i > 0) s += ',';
    s += std::to_string(v[i]);
  }
  return s;
}

// Every key, defaults expanded, in a fixed order. The output is itself a
// valid config file.
inline std::string resolved_config_text(const RunConfig& cfg) {
  std::ostringstream out;
  out << "sigma = " << fmt17(cfg.sigma) << '\n'
      << "eta = " << fmt17(cfg.eta) << '\n'
      << "tau = " << fmt17(cfg.tau) << '\n'
      << "init_mean = " << fmt17(cfg.init_mean) << '\n'
      << "init_sd = " << fmt17(cfg.init_sd) << '\n'
      << "n = " << cfg.n << '\n'
      << "sampler = " << cfg.sampler << '\n'
      << "K = " << cfg.pool_size << '\n'
      << "alpha = " << fmt17(cfg.alpha) << '\n'
      << "pool = " << cfg.pool << '\n'
      << "mu = " << fmt17(cfg.mu) << '\n'
      << "nu = " << fmt17(cfg.nu) << '\n'
      << "proposal = " << cfg.proposal << '\n'
      << "proposal_sd = " << fmt17(cfg.proposal_sd) << '\n'
      << "iters = " << cfg.iters << '\n'
      << "burnin = " << cfg.burnin << '\n'
      << "thin = " << cfg.thin << '\n'
      << "seed = " << join_list(cfg.seeds) << '\n'
      << "grid_lo = " << fmt17(cfg.grid_lo) << '\n'
      << "grid_hi = " << fmt17(cfg.grid_hi) << '\n'
      << "grid_m = " << cfg.grid_m << '\n'
      << "probe = " << join_list(cfg.probes) << '\n'
      << "init = " << cfg.init << '\n'
      << "strict = " << (cfg.strict ? "true" : "false") << '\n'
      << "out = " << cfg.out << '\n'
      << "data = " << cfg.data << '\n'
      << "samples = " << cfg.samples << '\n'
      << "oracle = " << cfg.oracle << '\n';
  return out.str();
}

inline void validate_config(const RunConfig& cfg) {
  if (cfg.sampler != "ehmm" && cfg.sampler != "metropolis")
    throw UsageError("sampler must be 'ehmm' or 'metropolis'");
  if (cfg.pool != "fixed" && cfg.pool != "per-obs")
    throw UsageError("pool must be 'fixed' or 'per-obs'");
  if (cfg.proposal != "independence" && cfg.proposal != "random-walk")
    throw UsageError("proposal must be 'independence' or 'random-walk'");
  if (cfg.pool_size < 1) throw UsageError("K must be >= 1");
  if (cfg.iters < 0) throw UsageError("iters must be >= 0");
  if (cfg.burnin < 0) throw UsageError("burnin must be >= 0");
  if (cfg.thin < 1) throw UsageError("thin must be >= 1");
  if (cfg.n < 1) throw UsageError("n must be >= 1");
  if (cfg.grid_m < 2) throw UsageError("grid_m must be >= 2");
  if (!(cfg.grid_lo < cfg.grid_hi)) throw UsageError("grid_lo must be < grid_hi");
  if (cfg.seeds.empty()) throw UsageError("need at least one seed");
  if (cfg.init != "data" && cfg.init != "zero" &&
      cfg.init.rfind("file=", 0) != 0)
    throw UsageError("init must be 'data', 'zero', or 'file=PATH'");
}

}  // namespace ehmm::cli
