#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <type_traits>
#include <vector>

#include "ehmm/chain.hpp"
#include "ehmm/errors.hpp"
#include "ehmm/math.hpp"
#include "ehmm/model.hpp"
#include "ehmm/rng.hpp"

namespace ehmm {

// Single-site proposal. log_q(from, to) is log q(to | from); leave it empty
// for symmetric proposals, where the Hastings correction cancels.
template <class State>
struct Proposal {
  std::function<State(const State&, RngStream&)> draw;
  std::function<double(const State&, const State&)> log_q;
};

inline Proposal<double> independence_normal_proposal(double mean = 0.0,
                                                     double sd = 1.0) {
  if (!(sd > 0.0)) throw UsageError("independence proposal: sd must be positive");
  Proposal<double> p;
  p.draw = [mean, sd](const double&, RngStream& rng) {
    return rng.normal(mean, sd);
  };
  p.log_q = [mean, sd](const double&, const double& to) {
    return log_normal_pdf(to, mean, sd);
  };
  return p;
}

inline Proposal<double> random_walk_proposal(double sd) {
  if (!(sd > 0.0)) throw UsageError("random walk proposal: sd must be positive");
  Proposal<double> p;
  p.draw = [sd](const double& x, RngStream& rng) { return rng.normal(x, sd); };
  return p;  // symmetric
}

struct MetropolisConfig {
  enum class Kind { independence_normal, random_walk };
  Kind proposal = Kind::independence_normal;
  double walk_sd = 1.0;  // step sd for the random walk variant
  long iterations = 100;
  long burn_in = 0;
  long thinning = 1;
  std::uint64_t seed = 1;
};

inline Proposal<double> make_proposal(const MetropolisConfig& cfg) {
  return cfg.proposal == MetropolisConfig::Kind::independence_normal
             ? independence_normal_proposal()
             : random_walk_proposal(cfg.walk_sd);
}

// One systematic sweep: sites 0..n-1 in order, each updated by a
// Metropolis-Hastings step on the local factors (emission at t, the
// transitions into and out of t, and the initial density when t = 0).
// Returns the updated sequence; accepted, when given, receives the number of
// accepted site moves.
template <class State, class Obs>
StateSeq<State> metropolis_sweep(const StateSpaceModel<State, Obs>& model,
                                 const Proposal<State>& proposal,
                                 const StateSeq<State>& x, const ObsSeq<Obs>& y,
                                 RngStream& rng, long* accepted = nullptr) {
  const std::size_t n = x.size();
  if (n == 0) throw UsageError("metropolis_sweep: empty state sequence");
  if (y.size() != n)
    throw UsageError("metropolis_sweep: state/observation length mismatch");

  StateSeq<State> cur = x;
  long accepted_count = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const State& old_state = cur[t];
    const State new_state = proposal.draw(old_state, rng);
    if constexpr (std::is_floating_point_v<State>) {
      if (std::isnan(new_state))
        throw NumericError("metropolis_sweep: proposal drew a NaN state");
    }

    double delta =
        detail::checked_log_density(model.log_emit(new_state, y[t]), "log_emit") -
        model.log_emit(old_state, y[t]);
    if (t == 0)
      delta += detail::checked_log_density(model.log_init(new_state), "log_init") -
               model.log_init(old_state);
    else
      delta += detail::checked_log_density(
                   model.log_trans(cur[t - 1], new_state), "log_trans") -
               model.log_trans(cur[t - 1], old_state);
    if (t + 1 < n)
      delta += detail::checked_log_density(
                   model.log_trans(new_state, cur[t + 1]), "log_trans") -
               model.log_trans(old_state, cur[t + 1]);
    if (proposal.log_q)
      delta += proposal.log_q(new_state, old_state) -
               proposal.log_q(old_state, new_state);

    if (delta >= 0.0 || std::log(rng.uniform()) < delta) {
      cur[t] = new_state;
      ++accepted_count;
    }
  }
  if (accepted) *accepted = accepted_count;
  return cur;
}

template <class State, class Obs>
ChainRecord<State> run_metropolis_chain(
    const StateSpaceModel<State, Obs>& model, const MetropolisConfig& cfg,
    const Proposal<State>& proposal, const StateSeq<State>& x0,
    const ObsSeq<Obs>& y,
    const std::type_identity_t<
        std::function<void(long, const StateSeq<State>&)>>& hook = {}) {
  detail::SampleSchedule schedule{cfg.iterations, cfg.burn_in, cfg.thinning};
  schedule.validate();
  if (log_joint(model, x0, y) == kNegInf)
    throw UsageError("run_metropolis_chain: initial sequence has zero posterior density");

  ChainRecord<State> record;
  RngStream root(cfg.seed);
  StateSeq<State> x = x0;
  const double n = static_cast<double>(x.size());
  for (long iter = 1; iter <= cfg.iterations; ++iter) {
    const auto start = std::chrono::steady_clock::now();
    long accepted = 0;
    RngStream sweep_rng = root.child(static_cast<std::uint64_t>(iter));
    x = metropolis_sweep(model, proposal, x, y, sweep_rng, &accepted);
    const std::chrono::duration<double> elapsed =
        std::chrono::steady_clock::now() - start;
    record.log_joint_trace.push_back(log_joint(model, x, y));
    record.accept_rate.push_back(static_cast<double>(accepted) / n);
    record.seconds.push_back(elapsed.count());
    record.inner_ops.push_back(static_cast<std::uint64_t>(x.size()));
    if (schedule.stores(iter)) {
      record.stored_iterations.push_back(iter);
      record.samples.push_back(x);
    }
    if (hook) hook(iter, x);
  }
  return record;
}

}  // namespace ehmm
