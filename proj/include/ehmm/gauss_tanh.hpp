#pragma once

#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include "ehmm/errors.hpp"
#include "ehmm/math.hpp"
#include "ehmm/model.hpp"
#include "ehmm/pool.hpp"
#include "ehmm/rng.hpp"

namespace ehmm {

// Scalar model family with tanh drift:
//   x_0 ~ N(init_mean, init_sd^2)
//   x_t | x_{t-1} ~ N(tanh(eta * x_{t-1}), tau^2)
//   y_t | x_t     ~ N(x_t, sigma^2)
// The initial distribution defaults to N(0, 1), which covers both of the
// +-1 basins the drift settles into; it is a parameter here so callers can
// override it.
struct TanhModelParams {
  double sigma = 2.5;  // observation noise sd
  double eta = 2.5;    // drift expansion factor
  double tau = 0.4;    // transition noise sd
  double init_mean = 0.0;
  double init_sd = 1.0;
};

inline void validate(const TanhModelParams& p) {
  if (!(p.sigma > 0.0) || !std::isfinite(p.sigma))
    throw UsageError("tanh model: sigma must be positive and finite");
  if (!(p.tau > 0.0) || !std::isfinite(p.tau))
    throw UsageError("tanh model: tau must be positive and finite");
  if (!std::isfinite(p.eta)) throw UsageError("tanh model: eta must be finite");
  if (!(p.init_sd > 0.0) || !std::isfinite(p.init_sd) || !std::isfinite(p.init_mean))
    throw UsageError("tanh model: invalid initial distribution");
}

inline StateSpaceModel<double> make_tanh_model(const TanhModelParams& p) {
  validate(p);
  StateSpaceModel<double> m;
  m.domain = StateDomain::real_scalar;
  m.log_init = [p](const double& x) {
    return log_normal_pdf(x, p.init_mean, p.init_sd);
  };
  m.log_trans = [p](const double& prev, const double& next) {
    return log_normal_pdf(next, std::tanh(p.eta * prev), p.tau);
  };
  m.log_emit = [p](const double& x, const double& y) {
    return log_normal_pdf(y, x, p.sigma);
  };
  return m;
}

// Ancestral simulation. Draw order is pinned (x_t then y_t for each t) so a
// given stream always yields the same sequences. x0_override replaces the
// initial draw, for studying the drift with a fixed starting point.
inline std::pair<StateSeq<double>, ObsSeq<double>> simulate(
    const TanhModelParams& p, long n, RngStream& rng,
    std::optional<double> x0_override = std::nullopt) {
  validate(p);
  if (n < 1) throw UsageError("simulate: n must be >= 1");
  StateSeq<double> x(n);
  ObsSeq<double> y(n);
  x[0] = x0_override ? *x0_override : rng.normal(p.init_mean, p.init_sd);
  y[0] = rng.normal(x[0], p.sigma);
  for (long t = 1; t < n; ++t) {
    x[t] = rng.normal(std::tanh(p.eta * x[t - 1]), p.tau);
    y[t] = rng.normal(x[t], p.sigma);
  }
  return {std::move(x), std::move(y)};
}

// Gaussian pool distribution rho = N(mu, nu^2) with the autoregressive
// kernel R(x' | x) = N(x' | mu + alpha (x - mu), (1 - alpha^2) nu^2). R
// satisfies detailed balance with respect to rho, so the reversed kernel is R
// itself. alpha = 0 draws pool states independently from rho.
struct GaussPoolParams {
  double mu = 0.0;
  double nu = 1.0;
  double alpha = 0.0;
};

inline void validate(const GaussPoolParams& g) {
  if (!(g.nu > 0.0) || !std::isfinite(g.nu))
    throw UsageError("gauss pool: nu must be positive and finite");
  if (!(std::abs(g.alpha) < 1.0))
    throw UsageError("gauss pool: alpha must lie in (-1, 1)");
  if (!std::isfinite(g.mu)) throw UsageError("gauss pool: mu must be finite");
}

inline PoolKernel<double> make_gauss_pool_kernel(const GaussPoolParams& g) {
  validate(g);
  PoolKernel<double> kernel;
  kernel.log_rho = [g](const double& x) { return log_normal_pdf(x, g.mu, g.nu); };
  const double step_sd = g.nu * std::sqrt(1.0 - g.alpha * g.alpha);
  kernel.step_fwd = [g, step_sd](const double& x, RngStream& rng) {
    return g.mu + g.alpha * (x - g.mu) + step_sd * rng.normal();
  };
  kernel.step_rev = kernel.step_fwd;
  return kernel;
}

enum class PoolStrategy {
  fixed,    // constant (mu, nu) at every time
  per_obs,  // mu_t = y_t, nu_t = sigma: rho_t proportional to the likelihood
};

inline std::vector<GaussPoolParams> pool_params_from_obs(
    PoolStrategy strategy, const ObsSeq<double>& y, const TanhModelParams& p,
    double fixed_mu = 0.0, double fixed_nu = 1.0, double alpha = 0.0) {
  validate(p);
  std::vector<GaussPoolParams> out(y.size());
  for (std::size_t t = 0; t < y.size(); ++t) {
    out[t].alpha = alpha;
    if (strategy == PoolStrategy::fixed) {
      out[t].mu = fixed_mu;
      out[t].nu = fixed_nu;
    } else {
      out[t].mu = y[t];
      out[t].nu = p.sigma;
    }
    validate(out[t]);
  }
  return out;
}

inline std::vector<PoolKernel<double>> make_gauss_pool_kernels(
    const std::vector<GaussPoolParams>& params) {
  std::vector<PoolKernel<double>> kernels;
  kernels.reserve(params.size());
  for (const auto& g : params) kernels.push_back(make_gauss_pool_kernel(g));
  return kernels;
}

}  // namespace ehmm
