#pragma once

#include <cstdint>
#include <vector>

#include "ehmm/errors.hpp"
#include "ehmm/model.hpp"

namespace ehmm {

// Record of one Markov chain run. Sequences are stored post burn-in and
// thinned; the per-iteration traces cover every iteration. accept_rate is the
// fraction of accepted site proposals for Metropolis sweeps and 1.0 for
// embedded HMM updates, whose moves are accepted by construction (an
// infeasible update throws instead of being recorded).
template <class State>
struct ChainRecord {
  std::vector<long> stored_iterations;     // iteration number of each sample
  std::vector<StateSeq<State>> samples;    // floor((iters - burn_in) / thin)
  std::vector<double> log_joint_trace;     // one entry per iteration
  std::vector<double> accept_rate;         // one entry per iteration
  std::vector<double> seconds;             // wall time per iteration
  std::vector<std::uint64_t> inner_ops;    // instrumented ops per iteration
};

namespace detail {

struct SampleSchedule {
  long iterations = 0;
  long burn_in = 0;
  long thinning = 1;

  void validate() const {
    if (iterations < 0) throw UsageError("iteration count must be >= 0");
    if (burn_in < 0) throw UsageError("burn-in must be >= 0");
    if (thinning < 1) throw UsageError("thinning must be >= 1");
    if (iterations > 0 && burn_in >= iterations)
      throw UsageError("burn-in must be smaller than the iteration count");
    if (iterations == 0 && burn_in != 0)
      throw UsageError("burn-in must be 0 for an empty run");
  }

  bool stores(long iteration) const {
    return iteration > burn_in && (iteration - burn_in) % thinning == 0;
  }
};

}  // namespace detail
}  // namespace ehmm
