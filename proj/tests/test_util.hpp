#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "ehmm/math.hpp"
#include "ehmm/model.hpp"
#include "ehmm/rng.hpp"

// Shared test oracles. Everything here is deliberately independent of the
// library's inference paths: enumeration and direct recursions over label
// space, used to cross-check the pool/index machinery.

namespace testutil {

// Frozen critical values.
// chi-square inverse cdf at 1 - 1e-4 (test passes while statistic < crit):
inline constexpr double kChi2Crit1 = 15.136705226623606;
inline constexpr double kChi2Crit2 = 18.420680743952584;
inline constexpr double kChi2Crit3 = 21.107513466160444;
inline constexpr double kChi2Crit9 = 33.719948438964906;
inline constexpr double kChi2Crit11 = 37.366986437997284;
inline constexpr double kChi2Crit14 = 42.5792889531133;

inline double chi2_statistic(const std::vector<double>& observed,
                             const std::vector<double>& expected) {
  double stat = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (expected[i] == 0.0) continue;
    const double d = observed[i] - expected[i];
    stat += d * d / expected[i];
  }
  return stat;
}

// Two-sided Kolmogorov-Smirnov critical value at level alpha (asymptotic).
inline double ks_critical(double alpha, std::size_t n) {
  return std::sqrt(std::log(2.0 / alpha) / (2.0 * static_cast<double>(n)));
}

inline double ks_statistic_vs_cdf(std::vector<double> draws,
                                  const std::function<double(double)>& cdf) {
  std::sort(draws.begin(), draws.end());
  const double n = static_cast<double>(draws.size());
  double d = 0.0;
  for (std::size_t i = 0; i < draws.size(); ++i) {
    const double f = cdf(draws[i]);
    d = std::max(d, std::abs(f - static_cast<double>(i) / n));
    d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
  }
  return d;
}

// All label sequences of length n over {0..L-1}, in lexicographic order.
inline std::vector<std::vector<int>> all_sequences(int n, int L) {
  std::vector<std::vector<int>> out;
  std::vector<int> seq(n, 0);
  for (;;) {
    out.push_back(seq);
    int t = n - 1;
    for (; t >= 0; --t) {
      if (++seq[t] < L) break;
      seq[t] = 0;
    }
    if (t < 0) break;
  }
  return out;
}

// Exact posterior over all sequences of a finite model, by enumeration.
inline std::vector<double> exact_posterior(
    const ehmm::StateSpaceModel<int, int>& model, const std::vector<int>& y,
    const std::vector<std::vector<int>>& seqs) {
  std::vector<double> log_w(seqs.size());
  for (std::size_t i = 0; i < seqs.size(); ++i)
    log_w[i] = ehmm::log_joint(model, seqs[i], y);
  const double z = ehmm::log_sum_exp(log_w);
  std::vector<double> probs(seqs.size());
  for (std::size_t i = 0; i < seqs.size(); ++i)
    probs[i] = std::exp(log_w[i] - z);
  return probs;
}

// Marginal likelihood of a finite model by the forward recursion in log
// space, independent of the library's scaled forward pass.
inline double finite_forward_loglik(const std::vector<double>& init,
                                    const ehmm::Matrix& trans,
                                    const ehmm::Matrix& emit,
                                    const std::vector<int>& y) {
  const int L = static_cast<int>(init.size());
  auto lg = [](double p) { return p > 0.0 ? std::log(p) : ehmm::kNegInf; };
  std::vector<double> alpha(L), next(L), terms(L);
  for (int k = 0; k < L; ++k) alpha[k] = lg(init[k]) + lg(emit(k, y[0]));
  for (std::size_t t = 1; t < y.size(); ++t) {
    for (int k = 0; k < L; ++k) {
      for (int j = 0; j < L; ++j) terms[j] = alpha[j] + lg(trans(j, k));
      next[k] = ehmm::log_sum_exp(terms) + lg(emit(k, y[t]));
    }
    alpha = next;
  }
  return ehmm::log_sum_exp(alpha);
}

// Random row-stochastic matrix with strictly positive entries.
inline ehmm::Matrix random_stochastic(int rows, int cols, ehmm::RngStream& rng) {
  ehmm::Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    double s = 0.0;
    for (int c = 0; c < cols; ++c) {
      m(r, c) = 0.05 + rng.uniform();
      s += m(r, c);
    }
    for (int c = 0; c < cols; ++c) m(r, c) /= s;
  }
  return m;
}

inline std::vector<double> random_simplex(int n, ehmm::RngStream& rng) {
  std::vector<double> v(n);
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    v[i] = 0.05 + rng.uniform();
    s += v[i];
  }
  for (int i = 0; i < n; ++i) v[i] /= s;
  return v;
}

}  // namespace testutil
