#pragma once

#include <cmath>
#include <vector>

#include "ehmm/errors.hpp"
#include "ehmm/gauss_tanh.hpp"
#include "ehmm/math.hpp"
#include "ehmm/rng.hpp"

namespace ehmm {

struct GridSpec {
  double lo = -3.0;
  double hi = 3.0;
  int m = 400;  // number of cells
};

// Near-exact smoothing oracle: the scalar tanh model discretized onto m cell
// midpoints becomes a finite HMM (transition rows renormalized so the
// discretized chain is exactly stochastic), for which forward-backward gives
// exact smoothed marginals. Its only bias against the continuous model is
// the discretization itself, quantified by grid refinement.
struct GridOracle {
  GridSpec grid;
  std::vector<double> midpoints;              // m
  std::vector<std::vector<double>> smoothed;  // n x m, each row sums to 1
  std::vector<double> p_positive;             // per time, mass at midpoints >= 0
  std::vector<double> mean;                   // per time
  std::vector<double> sd;                     // per time
  double boundary_mass = 0.0;  // max over t of smoothed mass in the edge cells
  bool grid_warning = false;   // boundary_mass > 1e-6: grid likely too small

  // Draws a state sequence from the discretized posterior (midpoint values),
  // by backward sampling on the stored filtered messages.
  StateSeq<double> sample(RngStream& rng) const {
    const int n = static_cast<int>(filtered_.size());
    const int m = grid.m;
    std::vector<int> idx(n);
    idx[n - 1] = static_cast<int>(rng.categorical(filtered_[n - 1]));
    std::vector<double> weights(m);
    for (int t = n - 2; t >= 0; --t) {
      for (int j = 0; j < m; ++j)
        weights[j] = filtered_[t][j] * trans_(j, idx[t + 1]);
      idx[t] = static_cast<int>(rng.categorical(weights));
    }
    StateSeq<double> out(n);
    for (int t = 0; t < n; ++t) out[t] = midpoints[idx[t]];
    return out;
  }

  // filled by grid_oracle_marginals
  std::vector<std::vector<double>> filtered_;
  Matrix trans_;
};

inline GridOracle grid_oracle_marginals(const TanhModelParams& p,
                                        const ObsSeq<double>& y,
                                        const GridSpec& grid) {
  validate(p);
  if (!(grid.lo < grid.hi)) throw UsageError("grid oracle: lo must be < hi");
  if (grid.m < 2) throw UsageError("grid oracle: need at least 2 cells");
  const int n = static_cast<int>(y.size());
  if (n < 1) throw UsageError("grid oracle: empty observation sequence");
  const int m = grid.m;
  const double h = (grid.hi - grid.lo) / m;

  GridOracle oracle;
  oracle.grid = grid;
  oracle.midpoints.resize(m);
  for (int k = 0; k < m; ++k) oracle.midpoints[k] = grid.lo + (k + 0.5) * h;
  const std::vector<double>& mid = oracle.midpoints;

  std::vector<double> init(m);
  {
    double s = 0.0;
    for (int k = 0; k < m; ++k) {
      init[k] = std::exp(log_normal_pdf(mid[k], p.init_mean, p.init_sd));
      s += init[k];
    }
    for (int k = 0; k < m; ++k) init[k] /= s;
  }

  oracle.trans_ = Matrix(m, m);
  for (int j = 0; j < m; ++j) {
    const double drift = std::tanh(p.eta * mid[j]);
    double s = 0.0;
    for (int k = 0; k < m; ++k) {
      const double v = std::exp(log_normal_pdf(mid[k], drift, p.tau));
      oracle.trans_(j, k) = v;
      s += v;
    }
    if (!(s > 0.0))
      throw DomainError("grid oracle: transition row underflowed; widen the grid");
    for (int k = 0; k < m; ++k) oracle.trans_(j, k) /= s;
  }
  const Matrix& trans = oracle.trans_;

  // Scaled emission vectors: exp(log emission - per-time max). The scale is
  // constant within a time step, so it cancels from every marginal.
  std::vector<std::vector<double>> emit(n, std::vector<double>(m));
  for (int t = 0; t < n; ++t) {
    double mx = kNegInf;
    std::vector<double>& e = emit[t];
    for (int k = 0; k < m; ++k) {
      e[k] = log_normal_pdf(y[t], mid[k], p.sigma);
      mx = std::max(mx, e[k]);
    }
    for (int k = 0; k < m; ++k) e[k] = std::exp(e[k] - mx);
  }

  // Forward filtering with per-step normalization.
  oracle.filtered_.assign(n, std::vector<double>(m, 0.0));
  std::vector<double> scale(n);
  {
    double s = 0.0;
    for (int k = 0; k < m; ++k) {
      oracle.filtered_[0][k] = init[k] * emit[0][k];
      s += oracle.filtered_[0][k];
    }
    if (!(s > 0.0)) throw DomainError("grid oracle: zero likelihood at time 0");
    for (int k = 0; k < m; ++k) oracle.filtered_[0][k] /= s;
    scale[0] = s;
  }
  for (int t = 1; t < n; ++t) {
    const std::vector<double>& prev = oracle.filtered_[t - 1];
    std::vector<double>& cur = oracle.filtered_[t];
    for (int j = 0; j < m; ++j) {
      const double pj = prev[j];
      if (pj == 0.0) continue;
      for (int k = 0; k < m; ++k) cur[k] += pj * trans(j, k);
    }
    double s = 0.0;
    for (int k = 0; k < m; ++k) {
      cur[k] *= emit[t][k];
      s += cur[k];
    }
    if (!(s > 0.0)) throw DomainError("grid oracle: zero likelihood");
    for (int k = 0; k < m; ++k) cur[k] /= s;
    scale[t] = s;
  }

  // Backward pass (scaled), then smoothed marginals.
  std::vector<double> beta(m, 1.0), next_beta(m);
  oracle.smoothed.assign(n, std::vector<double>(m));
  for (int t = n - 1; t >= 0; --t) {
    std::vector<double>& gamma = oracle.smoothed[t];
    double s = 0.0;
    for (int k = 0; k < m; ++k) {
      gamma[k] = oracle.filtered_[t][k] * beta[k];
      s += gamma[k];
    }
    for (int k = 0; k < m; ++k) gamma[k] /= s;
    if (t > 0) {
      for (int k = 0; k < m; ++k) next_beta[k] = emit[t][k] * beta[k] / scale[t];
      for (int j = 0; j < m; ++j) {
        double b = 0.0;
        for (int k = 0; k < m; ++k) b += trans(j, k) * next_beta[k];
        beta[j] = b;
      }
    }
  }

  oracle.p_positive.resize(n);
  oracle.mean.resize(n);
  oracle.sd.resize(n);
  for (int t = 0; t < n; ++t) {
    double pos = 0.0, m1 = 0.0, m2 = 0.0;
    for (int k = 0; k < m; ++k) {
      const double g = oracle.smoothed[t][k];
      if (mid[k] >= 0.0) pos += g;
      m1 += g * mid[k];
      m2 += g * mid[k] * mid[k];
    }
    oracle.p_positive[t] = pos;
    oracle.mean[t] = m1;
    oracle.sd[t] = std::sqrt(std::max(0.0, m2 - m1 * m1));
    oracle.boundary_mass = std::max(
        oracle.boundary_mass, std::max(oracle.smoothed[t][0],
                                       oracle.smoothed[t][m - 1]));
  }
  oracle.grid_warning = oracle.boundary_mass > 1e-6;
  return oracle;
}

}  // namespace ehmm
