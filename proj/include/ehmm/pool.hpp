#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <type_traits>
#include <vector>

#include "ehmm/errors.hpp"
#include "ehmm/math.hpp"
#include "ehmm/rng.hpp"

namespace ehmm {

// Per-time pool machinery: a pool distribution rho, a transition kernel R
// that leaves rho invariant, and the reversal of R with respect to rho,
// related by rho(x) R(x'|x) = rho(x') Rrev(x|x'). When R satisfies detailed
// balance with respect to rho the reversal equals R itself; constructors for
// such kernels fill step_rev with step_fwd.
template <class State>
struct PoolKernel {
  std::function<double(const State&)> log_rho;
  std::function<State(const State&, RngStream&)> step_fwd;  // draw from R(.|x)
  std::function<State(const State&, RngStream&)> step_rev;  // draw from Rrev(.|x)
  // Finite spaces only: log R(to | from) indexed by labels, row = from.
  Matrix log_r;
};

// Ordered pool of K candidate states at one time, indexed by pool index
// j in {-K+J+1, ..., 0, ..., J} and stored flat in ascending j. The entry at
// zero_offset is the current state (j = 0). Duplicate values are kept as
// distinct entries.
template <class State>
struct Pool {
  std::vector<State> states;
  int j_draw = 0;       // J
  int zero_offset = 0;  // flat index of j = 0; equals K - 1 - J

  int size() const { return static_cast<int>(states.size()); }
};

namespace detail {

template <class State>
const State& checked_state(const State& s) {
  if constexpr (std::is_floating_point_v<State>) {
    if (std::isnan(s)) throw NumericError("pool kernel drew a NaN state");
  }
  return s;
}

}  // namespace detail

// Builds the pool around `current`:
//   1. J uniform on {0, ..., K-1};
//   2. x^[0] = current;
//   3. x^[j] for j = 1..J by iterating step_fwd;
//   4. x^[j] for j = -1 down to -K+J+1 by iterating step_rev;
//   5. all K entries kept, duplicates included.
template <class State>
Pool<State> build_pool(const PoolKernel<State>& kernel, const State& current,
                       int pool_size, RngStream& rng) {
  if (pool_size < 1) throw UsageError("build_pool: pool size must be >= 1");
  const int K = pool_size;
  Pool<State> pool;
  pool.j_draw = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(K)));
  pool.zero_offset = K - 1 - pool.j_draw;
  pool.states.resize(static_cast<std::size_t>(K));
  pool.states[pool.zero_offset] = current;
  for (int j = 1; j <= pool.j_draw; ++j) {
    const State& prev = pool.states[pool.zero_offset + j - 1];
    pool.states[pool.zero_offset + j] =
        detail::checked_state(kernel.step_fwd(prev, rng));
  }
  for (int j = -1; j >= -K + pool.j_draw + 1; --j) {
    const State& next = pool.states[pool.zero_offset + j + 1];
    pool.states[pool.zero_offset + j] =
        detail::checked_state(kernel.step_rev(next, rng));
  }
  return pool;
}

// Reversal of a finite-space kernel with respect to rho:
//   Rrev(x | x') = rho(x) R(x' | x) / rho(x').
// Input and output are log tables with row = from, col = to. Requires R to
// leave rho invariant; a state with rho = 0 that is reachable under the
// rho-flow is a domain error.
inline Matrix finite_reverse_kernel(const Matrix& log_r,
                                    const std::vector<double>& log_rho) {
  const int L = static_cast<int>(log_rho.size());
  if (log_r.rows() != L || log_r.cols() != L)
    throw UsageError("finite_reverse_kernel: table shape mismatch");
  Matrix log_rev(L, L, kNegInf);
  for (int to = 0; to < L; ++to) {      // row of Rrev = from-state x'
    for (int from = 0; from < L; ++from) {
      const double flow = log_rho[from] + log_r(from, to);  // rho(x) R(x'|x)
      if (flow == kNegInf) continue;
      if (log_rho[to] == kNegInf)
        throw DomainError("finite_reverse_kernel: rho = 0 at a reachable state");
      log_rev(to, from) = flow - log_rho[to];
    }
  }
  return log_rev;
}

// Finite-space pool kernel from explicit tables. step_rev samples the
// reversal computed by finite_reverse_kernel, so non-reversible kernels are
// handled per the general contract.
inline PoolKernel<int> make_finite_pool_kernel(
    const std::vector<double>& log_rho, const Matrix& log_r) {
  const Matrix log_rev = finite_reverse_kernel(log_r, log_rho);
  const int L = static_cast<int>(log_rho.size());
  auto linear_rows = [L](const Matrix& t) {
    std::vector<std::vector<double>> rows(L, std::vector<double>(L));
    for (int r = 0; r < L; ++r)
      for (int c = 0; c < L; ++c)
        rows[r][c] = t(r, c) == kNegInf ? 0.0 : std::exp(t(r, c));
    return rows;
  };
  const auto fwd_rows = linear_rows(log_r);
  const auto rev_rows = linear_rows(log_rev);

  PoolKernel<int> kernel;
  kernel.log_r = log_r;
  kernel.log_rho = [log_rho](const int& x) { return log_rho.at(x); };
  kernel.step_fwd = [fwd_rows](const int& x, RngStream& rng) {
    return static_cast<int>(rng.categorical(fwd_rows.at(x)));
  };
  kernel.step_rev = [rev_rows](const int& x, RngStream& rng) {
    return static_cast<int>(rng.categorical(rev_rows.at(x)));
  };
  return kernel;
}

}  // namespace ehmm
