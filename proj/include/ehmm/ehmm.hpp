#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <type_traits>
#include <utility>
#include <vector>

#include "ehmm/chain.hpp"
#include "ehmm/errors.hpp"
#include "ehmm/index_hmm.hpp"
#include "ehmm/model.hpp"
#include "ehmm/pool.hpp"
#include "ehmm/rng.hpp"

namespace ehmm {

template <class State>
struct EhmmConfig {
  int pool_size = 10;                      // K
  std::vector<PoolKernel<State>> kernels;  // one per time step
  long iterations = 100;
  long burn_in = 0;
  long thinning = 1;
  std::uint64_t seed = 1;
};

// One full embedded-HMM transition: build a pool of pool_size candidates
// around x_t at every time, then draw the new sequence exactly from the
// distribution over all sequences assembled from pool states, weighted by
// joint density over the product of pool densities.
//
// RNG stream layout: rng.child(t) drives pool construction at time t (the
// pools are independent and may be built concurrently); rng.child(n) drives
// the backward sampling draws.
template <class State, class Obs>
StateSeq<State> ehmm_transition(const StateSpaceModel<State, Obs>& model,
                                const std::vector<PoolKernel<State>>& kernels,
                                int pool_size, const StateSeq<State>& x,
                                const ObsSeq<Obs>& y, const RngStream& rng,
                                std::uint64_t* op_counter = nullptr) {
  const std::size_t n = x.size();
  if (n == 0) throw UsageError("ehmm_transition: empty state sequence");
  if (kernels.size() != n || y.size() != n)
    throw UsageError("ehmm_transition: kernels/observations length mismatch");

  std::vector<Pool<State>> pools;
  pools.reserve(n);
  for (std::size_t t = 0; t < n; ++t) {
    RngStream pool_rng = rng.child(t);
    pools.push_back(build_pool(kernels[t], x[t], pool_size, pool_rng));
  }

  IndexHmmTables tables = build_tables(model, pools, kernels, y, op_counter);

  // The current sequence sits at pool index j = 0 everywhere; its path weight
  // must be finite or the update is undefined.
  std::vector<int> current_path(n);
  for (std::size_t t = 0; t < n; ++t) current_path[t] = pools[t].zero_offset;
  if (tables.path_log_weight(current_path) == kNegInf)
    throw InfeasibleUpdate("ehmm_transition: current sequence has zero weight");

  ForwardMessages msgs = forward_pass(tables, op_counter);
  RngStream sample_rng = rng.child(n);
  std::vector<int> path = backward_sample(msgs, tables, sample_rng, op_counter);

  StateSeq<State> out(n);
  for (std::size_t t = 0; t < n; ++t) out[t] = pools[t].states[path[t]];
  return out;
}

// Runs a chain of embedded-HMM updates from x0. Pools are rebuilt fresh each
// iteration; iteration i uses the stream RngStream(seed).child(i), so the
// realized chain is a pure function of the config. The optional hook sees
// every iteration (pre-thinning), in order.
template <class State, class Obs>
ChainRecord<State> run_chain(
    const StateSpaceModel<State, Obs>& model, const EhmmConfig<State>& cfg,
    const StateSeq<State>& x0, const ObsSeq<Obs>& y,
    const std::type_identity_t<
        std::function<void(long, const StateSeq<State>&)>>& hook = {}) {
  if (cfg.pool_size < 1) throw UsageError("run_chain: pool size must be >= 1");
  detail::SampleSchedule schedule{cfg.iterations, cfg.burn_in, cfg.thinning};
  schedule.validate();
  if (log_joint(model, x0, y) == kNegInf)
    throw UsageError("run_chain: initial sequence has zero posterior density");

  ChainRecord<State> record;
  RngStream root(cfg.seed);
  StateSeq<State> x = x0;
  for (long iter = 1; iter <= cfg.iterations; ++iter) {
    const auto start = std::chrono::steady_clock::now();
    std::uint64_t ops = 0;
    x = ehmm_transition(model, cfg.kernels, cfg.pool_size, x, y,
                        root.child(static_cast<std::uint64_t>(iter)), &ops);
    const std::chrono::duration<double> elapsed =
        std::chrono::steady_clock::now() - start;
    record.log_joint_trace.push_back(log_joint(model, x, y));
    record.accept_rate.push_back(1.0);
    record.seconds.push_back(elapsed.count());
    record.inner_ops.push_back(ops);
    if (schedule.stores(iter)) {
      record.stored_iterations.push_back(iter);
      record.samples.push_back(x);
    }
    if (hook) hook(iter, x);
  }
  return record;
}

}  // namespace ehmm
