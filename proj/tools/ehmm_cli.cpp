// Command-line driver: simulate data from the tanh state-space model, run
// the embedded-HMM or single-site Metropolis sampler on it, compute grid
// oracle marginals, and report diagnostics. All outputs are CSV; every
// command echoes its fully resolved configuration so runs can be reproduced
// exactly.

#include <CLI11.hpp>

#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include "cli_config.hpp"
#include "cli_csv.hpp"
#include "ehmm/diagnostics.hpp"
#include "ehmm/ehmm.hpp"
#include "ehmm/gauss_tanh.hpp"
#include "ehmm/grid_oracle.hpp"
#include "ehmm/metropolis.hpp"
#include "ehmm/model.hpp"

namespace fs = std::filesystem;
using namespace ehmm;
using namespace ehmm::cli;

namespace {

struct FlagStage {
  std::string config_path;
  double sigma = 0, eta = 0, tau = 0, init_mean = 0, init_sd = 0;
  long n = 0;
  std::string sampler, pool, proposal, init, out, data, samples, oracle;
  int pool_size = 0;
  double alpha = 0, mu = 0, nu = 0, proposal_sd = 0;
  long iters = 0, burnin = 0, thin = 0;
  std::vector<std::uint64_t> seeds;
  std::vector<double> grid;
  std::vector<long> probes;
  bool strict = false;
};

void attach_options(CLI::App* sub, FlagStage& s) {
  sub->add_option("--config", s.config_path, "config file (key = value lines)");
  sub->add_option("--sigma", s.sigma, "observation noise sd");
  sub->add_option("--eta", s.eta, "drift expansion factor");
  sub->add_option("--tau", s.tau, "transition noise sd");
  sub->add_option("--init-mean", s.init_mean, "initial distribution mean");
  sub->add_option("--init-sd", s.init_sd, "initial distribution sd");
  sub->add_option("--n", s.n, "sequence length");
  sub->add_option("--sampler", s.sampler, "ehmm | metropolis");
  sub->add_option("--K", s.pool_size, "pool size");
  sub->add_option("--alpha", s.alpha, "pool kernel autoregression in (-1,1)");
  sub->add_option("--pool", s.pool, "pool strategy: fixed | per-obs");
  sub->add_option("--mu", s.mu, "fixed pool mean");
  sub->add_option("--nu", s.nu, "fixed pool sd");
  sub->add_option("--proposal", s.proposal, "independence | random-walk");
  sub->add_option("--proposal-sd", s.proposal_sd, "random-walk step sd");
  sub->add_option("--iters", s.iters, "iteration count");
  sub->add_option("--burnin", s.burnin, "burn-in iterations");
  sub->add_option("--thin", s.thin, "thinning interval");
  sub->add_option("--seed", s.seeds, "seed (repeat or comma-list for multiple chains)")
      ->delimiter(',');
  sub->add_option("--grid", s.grid, "oracle grid: LO HI M")->expected(3);
  sub->add_option("--probe", s.probes, "diagnostic probe times")->delimiter(',');
  sub->add_option("--init", s.init, "initial sequence: data | zero | file=PATH");
  sub->add_flag("--strict", s.strict, "escalate grid warnings to errors");
  sub->add_option("--out", s.out, "output directory");
  sub->add_option("--data", s.data, "data CSV path (default <out>/data.csv)");
  sub->add_option("--samples", s.samples, "samples CSV path for report");
  sub->add_option("--oracle", s.oracle, "oracle CSV path for report");
}

RunConfig resolve(CLI::App* sub, const FlagStage& s) {
  RunConfig cfg;
  if (sub->count("--config")) load_config_file(cfg, s.config_path);
  auto over = [&](const char* flag, const char* key, auto&& apply) {
    if (sub->count(flag)) {
      apply();
      cfg.explicit_keys.insert(key);
    }
  };
  over("--sigma", "sigma", [&] { cfg.sigma = s.sigma; });
  over("--eta", "eta", [&] { cfg.eta = s.eta; });
  over("--tau", "tau", [&] { cfg.tau = s.tau; });
  over("--init-mean", "init_mean", [&] { cfg.init_mean = s.init_mean; });
  over("--init-sd", "init_sd", [&] { cfg.init_sd = s.init_sd; });
  over("--n", "n", [&] { cfg.n = s.n; });
  over("--sampler", "sampler", [&] { cfg.sampler = s.sampler; });
  over("--K", "K", [&] { cfg.pool_size = s.pool_size; });
  over("--alpha", "alpha", [&] { cfg.alpha = s.alpha; });
  over("--pool", "pool", [&] { cfg.pool = s.pool; });
  over("--mu", "mu", [&] { cfg.mu = s.mu; });
  over("--nu", "nu", [&] { cfg.nu = s.nu; });
  over("--proposal", "proposal", [&] { cfg.proposal = s.proposal; });
  over("--proposal-sd", "proposal_sd", [&] { cfg.proposal_sd = s.proposal_sd; });
  over("--iters", "iters", [&] { cfg.iters = s.iters; });
  over("--burnin", "burnin", [&] { cfg.burnin = s.burnin; });
  over("--thin", "thin", [&] { cfg.thin = s.thin; });
  over("--seed", "seed", [&] { cfg.seeds = s.seeds; });
  over("--grid", "grid_lo", [&] {
    cfg.grid_lo = s.grid[0];
    cfg.grid_hi = s.grid[1];
    cfg.grid_m = static_cast<long>(s.grid[2]);
    cfg.explicit_keys.insert("grid_hi");
    cfg.explicit_keys.insert("grid_m");
  });
  over("--probe", "probe", [&] { cfg.probes = s.probes; });
  over("--init", "init", [&] { cfg.init = s.init; });
  over("--strict", "strict", [&] { cfg.strict = s.strict; });
  over("--out", "out", [&] { cfg.out = s.out; });
  over("--data", "data", [&] { cfg.data = s.data; });
  over("--samples", "samples", [&] { cfg.samples = s.samples; });
  over("--oracle", "oracle", [&] { cfg.oracle = s.oracle; });

  if (cfg.data.empty()) cfg.data = cfg.out + "/data.csv";
  if (cfg.samples.empty()) cfg.samples = cfg.out + "/samples.csv";
  if (cfg.oracle.empty()) cfg.oracle = cfg.out + "/oracle.csv";
  validate_config(cfg);
  return cfg;
}

void write_resolved(const RunConfig& cfg, const std::string& command) {
  std::error_code ec;
  fs::create_directories(cfg.out, ec);
  const std::string path = cfg.out + "/config_resolved_" + command + ".txt";
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << resolved_config_text(cfg);
  out.close();
  if (!out) throw IoError("failed to write " + path);
}

TanhModelParams model_params(const RunConfig& cfg) {
  TanhModelParams p;
  p.sigma = cfg.sigma;
  p.eta = cfg.eta;
  p.tau = cfg.tau;
  p.init_mean = cfg.init_mean;
  p.init_sd = cfg.init_sd;
  return p;
}

ObsSeq<double> read_data_column(const RunConfig& cfg) {
  const auto table = read_csv(cfg.data, "t,x,y");
  if (table.rows.empty()) throw UsageError("data file has no rows: " + cfg.data);
  ObsSeq<double> y;
  for (const auto& row : table.rows) y.push_back(parse_double(row[2], "y"));
  if (cfg.was_set("n") && cfg.n != static_cast<long>(y.size()))
    throw UsageError("config n = " + std::to_string(cfg.n) +
                     " does not match data length " + std::to_string(y.size()));
  return y;
}

StateSeq<double> initial_sequence(const RunConfig& cfg, const ObsSeq<double>& y) {
  if (cfg.init == "data") return StateSeq<double>(y.begin(), y.end());
  if (cfg.init == "zero") return StateSeq<double>(y.size(), 0.0);
  const std::string path = cfg.init.substr(5);
  const auto table = read_csv(path, "t,x");
  StateSeq<double> x;
  for (const auto& row : table.rows) x.push_back(parse_double(row[1], "x"));
  if (x.size() != y.size())
    throw UsageError("initial sequence length does not match the data");
  return x;
}

int cmd_simulate(const RunConfig& cfg) {
  if (cfg.seeds.size() != 1) throw UsageError("simulate takes a single seed");
  write_resolved(cfg, "simulate");
  RngStream rng(cfg.seeds[0]);
  const auto [x, y] = simulate(model_params(cfg), cfg.n, rng);
  CsvWriter w(cfg.data);
  w.row({"t", "x", "y"});
  for (long t = 0; t < cfg.n; ++t)
    w.row({std::to_string(t), fmt17(x[t]), fmt17(y[t])});
  w.close();
  return 0;
}

struct ChainOutput {
  ChainRecord<double> record;
  std::vector<int> switch_counts;  // per iteration
};

ChainOutput run_one_chain(const RunConfig& cfg, const TanhModelParams& params,
                          const StateSeq<double>& x0, const ObsSeq<double>& y,
                          std::uint64_t seed) {
  const auto model = make_tanh_model(params);
  ChainOutput out;
  auto hook = [&out](long, const StateSeq<double>& x) {
    out.switch_counts.push_back(sign_switch_count(x));
  };
  if (cfg.sampler == "ehmm") {
    EhmmConfig<double> ecfg;
    ecfg.pool_size = cfg.pool_size;
    const auto strategy =
        cfg.pool == "fixed" ? PoolStrategy::fixed : PoolStrategy::per_obs;
    ecfg.kernels = make_gauss_pool_kernels(
        pool_params_from_obs(strategy, y, params, cfg.mu, cfg.nu, cfg.alpha));
    ecfg.iterations = cfg.iters;
    ecfg.burn_in = cfg.burnin;
    ecfg.thinning = cfg.thin;
    ecfg.seed = seed;
    out.record = run_chain(model, ecfg, x0, y, hook);
  } else {
    MetropolisConfig mcfg;
    mcfg.proposal = cfg.proposal == "independence"
                        ? MetropolisConfig::Kind::independence_normal
                        : MetropolisConfig::Kind::random_walk;
    mcfg.walk_sd = cfg.proposal_sd;
    mcfg.iterations = cfg.iters;
    mcfg.burn_in = cfg.burnin;
    mcfg.thinning = cfg.thin;
    mcfg.seed = seed;
    out.record =
        run_metropolis_chain(model, mcfg, make_proposal(mcfg), x0, y, hook);
  }
  return out;
}

// "path/samples.csv" + "_s7" -> "path/samples_s7.csv"
std::string with_suffix(const std::string& path, const std::string& suffix) {
  const auto dot = path.rfind('.');
  if (dot == std::string::npos || path.find('/', dot) != std::string::npos)
    return path + suffix;
  return path.substr(0, dot) + suffix + path.substr(dot);
}

void write_chain_files(const RunConfig& cfg, const ChainOutput& chain,
                       const std::string& suffix) {
  CsvWriter samples(with_suffix(cfg.samples, suffix));
  samples.row({"iter", "t", "x"});
  for (std::size_t i = 0; i < chain.record.samples.size(); ++i) {
    const long iter = chain.record.stored_iterations[i];
    const auto& x = chain.record.samples[i];
    for (std::size_t t = 0; t < x.size(); ++t)
      samples.row({std::to_string(iter), std::to_string(t), fmt17(x[t])});
  }
  samples.close();

  CsvWriter summary(cfg.out + "/summary" + suffix + ".csv");
  summary.row({"iter", "log_joint", "switch_count", "seconds"});
  for (std::size_t i = 0; i < chain.record.log_joint_trace.size(); ++i)
    summary.row({std::to_string(i + 1), fmt17(chain.record.log_joint_trace[i]),
                 std::to_string(chain.switch_counts[i]),
                 fmt17(chain.record.seconds[i])});
  summary.close();
}

int cmd_sample(const RunConfig& cfg) {
  write_resolved(cfg, "sample");
  const auto params = model_params(cfg);
  const auto y = read_data_column(cfg);
  const auto x0 = initial_sequence(cfg, y);

  if (cfg.seeds.size() == 1) {
    write_chain_files(cfg, run_one_chain(cfg, params, x0, y, cfg.seeds[0]), "");
    return 0;
  }
  // One chain per seed, run concurrently, each writing its own files.
  std::vector<std::thread> workers;
  std::vector<std::exception_ptr> failures(cfg.seeds.size());
  for (std::size_t i = 0; i < cfg.seeds.size(); ++i) {
    workers.emplace_back([&cfg, &params, &x0, &y, &failures, i] {
      try {
        const auto chain = run_one_chain(cfg, params, x0, y, cfg.seeds[i]);
        write_chain_files(cfg, chain, "_s" + std::to_string(cfg.seeds[i]));
      } catch (...) {
        failures[i] = std::current_exception();
      }
    });
  }
  for (auto& w : workers) w.join();
  for (const auto& failure : failures)
    if (failure) std::rethrow_exception(failure);
  return 0;
}

int cmd_oracle(const RunConfig& cfg) {
  write_resolved(cfg, "oracle");
  const auto y = read_data_column(cfg);
  GridSpec grid{cfg.grid_lo, cfg.grid_hi, static_cast<int>(cfg.grid_m)};
  const auto oracle = grid_oracle_marginals(model_params(cfg), y, grid);
  if (oracle.grid_warning) {
    std::cerr << "warning: posterior boundary mass "
              << fmt17(oracle.boundary_mass)
              << " exceeds 1e-6; the grid may be too small\n";
    if (cfg.strict)
      throw DomainError("grid too small for the posterior (--strict)");
  }
  CsvWriter w(cfg.oracle);
  w.row({"t", "p_positive", "mean", "sd"});
  for (std::size_t t = 0; t < y.size(); ++t)
    w.row({std::to_string(t), fmt17(oracle.p_positive[t]),
           fmt17(oracle.mean[t]), fmt17(oracle.sd[t])});
  w.close();
  return 0;
}

int cmd_report(const RunConfig& cfg) {
  write_resolved(cfg, "report");
  const auto oracle_table = read_csv(cfg.oracle, "t,p_positive,mean,sd");
  if (oracle_table.rows.empty()) throw UsageError("oracle file has no rows");
  std::vector<double> p_positive;
  for (const auto& row : oracle_table.rows)
    p_positive.push_back(parse_double(row[1], "p_positive"));
  const std::size_t n = p_positive.size();

  const auto samples_table = read_csv(cfg.samples, "iter,t,x");
  if (samples_table.rows.empty()) throw UsageError("samples file has no rows");
  ChainRecord<double> record;
  long current_iter = -1;
  for (const auto& row : samples_table.rows) {
    const long iter = parse_long(row[0], "iter");
    const long t = parse_long(row[1], "t");
    const double x = parse_double(row[2], "x");
    if (record.samples.empty() || iter != current_iter) {
      record.stored_iterations.push_back(iter);
      record.samples.emplace_back();
      current_iter = iter;
    }
    if (t != static_cast<long>(record.samples.back().size()))
      throw UsageError("samples file times are not contiguous per iteration");
    record.samples.back().push_back(x);
  }
  for (const auto& x : record.samples)
    if (x.size() != n)
      throw UsageError("samples length does not match the oracle length");
  for (long probe : cfg.probes)
    if (probe < 0 || probe >= static_cast<long>(n))
      throw UsageError("probe time out of range: " + std::to_string(probe));

  const auto err = oracle_error(record, p_positive);

  CsvWriter w(cfg.out + "/diag.csv");
  w.row({"metric", "t", "index", "value"});
  for (std::size_t t = 0; t < n; ++t)
    w.row({"oracle_error", std::to_string(t), "0", fmt17(err.per_time[t])});
  w.row({"mean_oracle_error", "-1", "0", fmt17(err.mean_abs)});
  for (long probe : cfg.probes) {
    const auto trace = trace_at_time(record, probe);
    for (std::size_t i = 0; i < trace.values.size(); ++i)
      w.row({"trace", std::to_string(probe),
             std::to_string(record.stored_iterations[i]),
             fmt17(trace.values[i])});
    const int max_lag =
        std::min<int>(40, static_cast<int>(trace.values.size()) - 1);
    const auto acf = autocorr(trace.values, max_lag);
    for (int lag = 0; lag <= max_lag; ++lag)
      w.row({"acf", std::to_string(probe), std::to_string(lag), fmt17(acf[lag])});
  }
  w.close();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"embedded-HMM sampler for the tanh state-space model"};
  app.require_subcommand(1);
  FlagStage stage;
  CLI::App* simulate_cmd =
      app.add_subcommand("simulate", "draw a state/observation sequence");
  CLI::App* sample_cmd =
      app.add_subcommand("sample", "run an MCMC sampler on a data file");
  CLI::App* oracle_cmd =
      app.add_subcommand("oracle", "grid-discretized smoothing marginals");
  CLI::App* report_cmd =
      app.add_subcommand("report", "diagnostics from samples and oracle files");
  for (auto* sub : {simulate_cmd, sample_cmd, oracle_cmd, report_cmd})
    attach_options(sub, stage);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    CLI::App* active = app.get_subcommands().front();
    const RunConfig cfg = resolve(active, stage);
    if (active == simulate_cmd) return cmd_simulate(cfg);
    if (active == sample_cmd) return cmd_sample(cfg);
    if (active == oracle_cmd) return cmd_oracle(cfg);
    return cmd_report(cfg);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {  // numeric and domain failures
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
