#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "ehmm/errors.hpp"
#include "ehmm/math.hpp"
#include "ehmm/model.hpp"
#include "ehmm/pool.hpp"
#include "ehmm/rng.hpp"

namespace ehmm {

// The embedded HMM over pool indexes. A path k_0..k_{n-1} through the pools
// has log weight
//
//   log_init[k_0] + sum_{t>=1} ( log_trans[t-1](k_{t-1}, k_t) + log_w[t][k_t] )
//
// where log_w[t][k] = log P(y_t | x_t^[k]) - log rho_t(x_t^[k]) and
// log_trans[t-1](j, k) = log P(x_t^[k] | x_{t-1}^[j]). log_init folds the
// time-0 weight log_w[0] into log P(x_0^[k]); log_w[0] is still stored for
// introspection. exp of the path weight equals the joint density of the
// decoded state sequence divided by prod_t rho_t(x_t), the selection weight
// for sequences assembled from pool states.
struct IndexHmmTables {
  int n = 0;
  int K = 0;
  std::vector<double> log_init;            // K entries
  std::vector<Matrix> log_trans;           // n-1 tables of K x K
  std::vector<std::vector<double>> log_w;  // n vectors of K entries

  double path_log_weight(std::span<const int> path) const {
    double w = log_init[path[0]];
    for (int t = 1; t < n; ++t)
      w += log_trans[t - 1](path[t - 1], path[t]) + log_w[t][path[t]];
    return w;
  }
};

// Normalized forward (filtering) messages plus the per-step log normalizers
// of the scaling recursion. total_log_norm is the embedded HMM's log
// normalizing constant: log sum over index paths of exp(path weight).
struct ForwardMessages {
  std::vector<std::vector<double>> filtered;  // n vectors, each sums to 1
  std::vector<double> step_log_norm;          // n entries
  double total_log_norm = 0.0;
};

template <class State, class Obs>
IndexHmmTables build_tables(const StateSpaceModel<State, Obs>& model,
                            const std::vector<Pool<State>>& pools,
                            const std::vector<PoolKernel<State>>& kernels,
                            const ObsSeq<Obs>& y,
                            std::uint64_t* op_counter = nullptr) {
  const int n = static_cast<int>(pools.size());
  if (n < 1) throw UsageError("build_tables: need at least one pool");
  if (kernels.size() != pools.size() || y.size() != pools.size())
    throw UsageError("build_tables: pools/kernels/observations length mismatch");
  const int K = pools[0].size();
  for (const auto& p : pools)
    if (p.size() != K) throw UsageError("build_tables: pools differ in size");

  IndexHmmTables tables;
  tables.n = n;
  tables.K = K;
  tables.log_w.resize(n);
  for (int t = 0; t < n; ++t) {
    tables.log_w[t].resize(K);
    for (int k = 0; k < K; ++k) {
      const State& s = pools[t].states[k];
      const double lr = detail::checked_log_density(kernels[t].log_rho(s), "log_rho");
      if (lr == kNegInf)
        throw DomainError("build_tables: pool state has zero pool density");
      tables.log_w[t][k] =
          detail::checked_log_density(model.log_emit(s, y[t]), "log_emit") - lr;
    }
  }
  tables.log_init.resize(K);
  for (int k = 0; k < K; ++k)
    tables.log_init[k] =
        detail::checked_log_density(model.log_init(pools[0].states[k]), "log_init") +
        tables.log_w[0][k];

  tables.log_trans.reserve(n - 1);
  for (int t = 1; t < n; ++t) {
    Matrix m(K, K);
    for (int j = 0; j < K; ++j)
      for (int k = 0; k < K; ++k)
        m(j, k) = detail::checked_log_density(
            model.log_trans(pools[t - 1].states[j], pools[t].states[k]),
            "log_trans");
    tables.log_trans.push_back(std::move(m));
    if (op_counter) *op_counter += static_cast<std::uint64_t>(K) * K;
  }
  return tables;
}

// Forward filtering with per-step scaling. Messages are kept as normalized
// probabilities; the scale factored out at step t is step_log_norm[t], so
// shifting all time-t table entries by a constant c_t leaves every message
// unchanged and shifts total_log_norm by sum_t c_t.
inline ForwardMessages forward_pass(const IndexHmmTables& tables,
                                    std::uint64_t* op_counter = nullptr) {
  const int n = tables.n;
  const int K = tables.K;
  ForwardMessages msgs;
  msgs.filtered.assign(n, std::vector<double>(K, 0.0));
  msgs.step_log_norm.assign(n, 0.0);

  double m0 = kNegInf;
  for (double v : tables.log_init) m0 = std::max(m0, v);
  if (m0 == kNegInf)
    throw InfeasibleUpdate("forward_pass: no admissible index at time 0");
  double s = 0.0;
  for (int k = 0; k < K; ++k) {
    msgs.filtered[0][k] = std::exp(tables.log_init[k] - m0);
    s += msgs.filtered[0][k];
  }
  for (int k = 0; k < K; ++k) msgs.filtered[0][k] /= s;
  msgs.step_log_norm[0] = m0 + std::log(s);

  for (int t = 1; t < n; ++t) {
    const Matrix& trans = tables.log_trans[t - 1];
    const std::vector<double>& prev = msgs.filtered[t - 1];
    const std::vector<double>& w = tables.log_w[t];
    double m = kNegInf;
    for (int j = 0; j < K; ++j) {
      if (prev[j] == 0.0) continue;
      for (int k = 0; k < K; ++k) m = std::max(m, trans(j, k) + w[k]);
    }
    if (m == kNegInf)
      throw InfeasibleUpdate("forward_pass: no admissible index path");
    std::vector<double>& cur = msgs.filtered[t];
    for (int j = 0; j < K; ++j) {
      if (prev[j] == 0.0) continue;
      for (int k = 0; k < K; ++k)
        cur[k] += prev[j] * std::exp(trans(j, k) + w[k] - m);
    }
    if (op_counter) *op_counter += static_cast<std::uint64_t>(K) * K;
    s = 0.0;
    for (int k = 0; k < K; ++k) s += cur[k];
    if (!(s > 0.0))
      throw InfeasibleUpdate("forward_pass: filtered mass underflowed to zero");
    for (int k = 0; k < K; ++k) cur[k] /= s;
    msgs.step_log_norm[t] = m + std::log(s);
  }
  msgs.total_log_norm = 0.0;
  for (double v : msgs.step_log_norm) msgs.total_log_norm += v;
  return msgs;
}

// Draws one index sequence exactly from the path distribution encoded by the
// tables: the final index from the last filtered message, then each earlier
// index from the filtered message reweighted by the transition column into
// the already-drawn successor. (log_w of the successor is constant across
// candidates and cancels.)
inline std::vector<int> backward_sample(const ForwardMessages& msgs,
                                        const IndexHmmTables& tables,
                                        RngStream& rng,
                                        std::uint64_t* op_counter = nullptr) {
  const int n = tables.n;
  const int K = tables.K;
  std::vector<int> path(n);
  path[n - 1] = static_cast<int>(rng.categorical(msgs.filtered[n - 1]));
  std::vector<double> weights(K);
  for (int t = n - 2; t >= 0; --t) {
    const Matrix& trans = tables.log_trans[t];
    const std::vector<double>& f = msgs.filtered[t];
    const int succ = path[t + 1];
    double m = kNegInf;
    for (int j = 0; j < K; ++j)
      if (f[j] > 0.0) m = std::max(m, trans(j, succ));
    if (m == kNegInf)
      throw InfeasibleUpdate("backward_sample: no admissible predecessor");
    for (int j = 0; j < K; ++j)
      weights[j] = f[j] > 0.0 ? f[j] * std::exp(trans(j, succ) - m) : 0.0;
    if (op_counter) *op_counter += static_cast<std::uint64_t>(K);
    path[t] = static_cast<int>(rng.categorical(weights));
  }
  return path;
}

// Exact distribution over all K^n index sequences, by direct enumeration.
// Test oracle for the sampler; also used by the detailed-balance enumeration.
struct PathDistribution {
  int n = 0;
  int K = 0;
  std::vector<double> probs;    // K^n entries, path_index order
  double log_normalizer = 0.0;  // log sum of exp path weights

  // Big-endian mixed-radix packing: k_0 is the most significant digit.
  static std::size_t path_index(std::span<const int> path, int K) {
    std::size_t idx = 0;
    for (int k : path) idx = idx * static_cast<std::size_t>(K) +
                             static_cast<std::size_t>(k);
    return idx;
  }

  static std::vector<int> unpack(std::size_t index, int n, int K) {
    std::vector<int> path(n);
    for (int t = n - 1; t >= 0; --t) {
      path[t] = static_cast<int>(index % static_cast<std::size_t>(K));
      index /= static_cast<std::size_t>(K);
    }
    return path;
  }

  std::vector<double> marginal(int t) const {
    std::vector<double> out(K, 0.0);
    for (std::size_t i = 0; i < probs.size(); ++i)
      out[unpack(i, n, K)[t]] += probs[i];
    return out;
  }
};

inline PathDistribution brute_force_path_dist(const IndexHmmTables& tables) {
  const int n = tables.n;
  const int K = tables.K;
  double count = 1.0;
  for (int t = 0; t < n; ++t) {
    count *= K;
    if (count > 1e6)
      throw UsageError("brute_force_path_dist: K^n exceeds 10^6 paths");
  }
  const std::size_t total = static_cast<std::size_t>(count);

  PathDistribution dist;
  dist.n = n;
  dist.K = K;
  std::vector<double> log_weights(total);
  std::vector<int> path(n, 0);
  for (std::size_t i = 0; i < total; ++i) {
    log_weights[i] = tables.path_log_weight(path);
    for (int t = n - 1; t >= 0; --t) {  // odometer increment
      if (++path[t] < K) break;
      path[t] = 0;
    }
  }
  dist.log_normalizer = log_sum_exp(log_weights);
  if (dist.log_normalizer == kNegInf)
    throw InfeasibleUpdate("brute_force_path_dist: all paths have zero weight");
  dist.probs.resize(total);
  for (std::size_t i = 0; i < total; ++i)
    dist.probs[i] = std::exp(log_weights[i] - dist.log_normalizer);
  return dist;
}

}  // namespace ehmm
