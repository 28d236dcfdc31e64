#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "ehmm/chain.hpp"
#include "ehmm/errors.hpp"

namespace ehmm {

// Sign convention used across the diagnostics: exactly 0.0 counts as
// positive. The event has measure zero under the continuous models here; the
// convention just pins the behavior.
inline bool sign_positive(double v) { return v >= 0.0; }

struct TraceSeries {
  long t = 0;
  std::vector<double> values;  // state at time t, one entry per stored sample
};

inline TraceSeries trace_at_time(const ChainRecord<double>& record, long t) {
  TraceSeries series;
  series.t = t;
  series.values.reserve(record.samples.size());
  for (const auto& x : record.samples) {
    if (t < 0 || static_cast<std::size_t>(t) >= x.size())
      throw UsageError("trace_at_time: probe time out of range");
    series.values.push_back(x[static_cast<std::size_t>(t)]);
  }
  return series;
}

// Autocorrelation at lags 0..max_lag, biased (length-normalized) estimator:
//   acf(l) = sum_{i<N-l} (v_i - mean)(v_{i+l} - mean) / sum_i (v_i - mean)^2
// The biased form is the usual one for MCMC traces and keeps |acf| <= 1.
inline std::vector<double> autocorr(std::span<const double> series,
                                    int max_lag) {
  const std::size_t n = series.size();
  if (max_lag < 0) throw UsageError("autocorr: max_lag must be >= 0");
  if (n <= static_cast<std::size_t>(max_lag))
    throw UsageError("autocorr: series shorter than max_lag");
  bool constant = true;
  for (double v : series)
    if (v != series[0]) {
      constant = false;
      break;
    }
  if (constant) throw NumericError("autocorr: zero-variance series");
  double mean = 0.0;
  for (double v : series) mean += v;
  mean /= static_cast<double>(n);
  double c0 = 0.0;
  for (double v : series) c0 += (v - mean) * (v - mean);
  if (c0 == 0.0)
    throw NumericError("autocorr: zero-variance series");
  std::vector<double> out(static_cast<std::size_t>(max_lag) + 1);
  out[0] = 1.0;
  for (int lag = 1; lag <= max_lag; ++lag) {
    double c = 0.0;
    for (std::size_t i = 0; i + static_cast<std::size_t>(lag) < n; ++i)
      c += (series[i] - mean) * (series[i + static_cast<std::size_t>(lag)] - mean);
    out[static_cast<std::size_t>(lag)] = c / c0;
  }
  return out;
}

// Number of adjacent sign changes in a sequence.
inline int sign_switch_count(const StateSeq<double>& x) {
  int count = 0;
  for (std::size_t t = 1; t < x.size(); ++t)
    if (sign_positive(x[t]) != sign_positive(x[t - 1])) ++count;
  return count;
}

struct OracleError {
  std::vector<double> per_time;  // |estimated P(x_t positive) - oracle|
  double mean_abs = 0.0;
};

// Compares the chain's estimate of P(x_t positive | y) -- the fraction of
// stored samples positive at t -- against oracle marginals on the same data.
inline OracleError oracle_error(const ChainRecord<double>& record,
                                std::span<const double> oracle_p_positive) {
  if (record.samples.empty())
    throw UsageError("oracle_error: empty sample store");
  const std::size_t n = oracle_p_positive.size();
  for (const auto& x : record.samples)
    if (x.size() != n)
      throw UsageError("oracle_error: sample length does not match oracle");
  OracleError err;
  err.per_time.resize(n);
  const double count = static_cast<double>(record.samples.size());
  for (std::size_t t = 0; t < n; ++t) {
    double positive = 0.0;
    for (const auto& x : record.samples)
      if (sign_positive(x[t])) positive += 1.0;
    err.per_time[t] = std::abs(positive / count - oracle_p_positive[t]);
    err.mean_abs += err.per_time[t];
  }
  err.mean_abs /= static_cast<double>(n);
  return err;
}

}  // namespace ehmm
