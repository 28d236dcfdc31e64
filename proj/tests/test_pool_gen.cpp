#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <tuple>
#include <vector>

#include "ehmm/gauss_tanh.hpp"
#include "ehmm/math.hpp"
#include "ehmm/pool.hpp"
#include "ehmm/rng.hpp"
#include "test_util.hpp"

using namespace ehmm;

namespace {

// Metropolis kernel for swapping a pair of labels, reversible wrt rho.
Matrix pair_swap_kernel(const std::vector<double>& rho, int a, int b) {
  const int L = static_cast<int>(rho.size());
  Matrix k(L, L, 0.0);
  for (int i = 0; i < L; ++i) k(i, i) = 1.0;
  const double p_ab = std::min(1.0, rho[b] / rho[a]);
  const double p_ba = std::min(1.0, rho[a] / rho[b]);
  k(a, b) = p_ab;
  k(a, a) = 1.0 - p_ab;
  k(b, a) = p_ba;
  k(b, b) = 1.0 - p_ba;
  return k;
}

Matrix matmul(const Matrix& x, const Matrix& y) {
  Matrix out(x.rows(), y.cols(), 0.0);
  for (int i = 0; i < x.rows(); ++i)
    for (int j = 0; j < y.cols(); ++j)
      for (int k = 0; k < x.cols(); ++k) out(i, j) += x(i, k) * y(k, j);
  return out;
}

Matrix to_log(const Matrix& m) {
  Matrix out(m.rows(), m.cols());
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j)
      out(i, j) = m(i, j) > 0.0 ? std::log(m(i, j)) : kNegInf;
  return out;
}

std::vector<double> to_log(const std::vector<double>& v) {
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    out[i] = v[i] > 0.0 ? std::log(v[i]) : kNegInf;
  return out;
}

// A 3-state rho-invariant kernel that is NOT reversible: the composition of
// two reversible pair swaps.
struct NonReversibleCase {
  std::vector<double> rho = {0.5, 0.3, 0.2};
  Matrix r;
  NonReversibleCase() {
    r = matmul(pair_swap_kernel(rho, 0, 1), pair_swap_kernel(rho, 1, 2));
  }
};

// Probability that build_pool, given J, fills the ordered slots with exactly
// these states: the product of the sequential kernel draws (steps 3 and 4).
double sequential_pool_log_prob(const std::vector<int>& states, int J,
                                const Matrix& log_r, const Matrix& log_rev) {
  const int K = static_cast<int>(states.size());
  const int zero = K - 1 - J;
  double lp = 0.0;
  for (int j = 1; j <= J; ++j)
    lp += log_r(states[zero + j - 1], states[zero + j]);
  for (int j = -1; j >= -K + J + 1; --j)
    lp += log_rev(states[zero + j + 1], states[zero + j]);
  return lp;
}

// The same probability via the closed-form factorization: the rho ratio of
// the leftmost to the current state times the forward-kernel product over
// consecutive slots.
double closed_form_pool_log_prob(const std::vector<int>& states, int J,
                                 const Matrix& log_r,
                                 const std::vector<double>& log_rho) {
  const int K = static_cast<int>(states.size());
  const int zero = K - 1 - J;
  double lp = log_rho[states[0]] - log_rho[states[zero]];
  for (int i = 0; i + 1 < K; ++i) lp += log_r(states[i], states[i + 1]);
  return lp;
}

}  // namespace

TEST_CASE("K=1 pool is just the current state") {
  auto kernel = make_gauss_pool_kernel({0.0, 1.0, 0.0});
  RngStream rng(1);
  const auto pool = build_pool(kernel, 0.37, 1, rng);
  CHECK(pool.size() == 1);
  CHECK(pool.j_draw == 0);
  CHECK(pool.zero_offset == 0);
  CHECK(pool.states[0] == 0.37);
}

TEST_CASE("identity kernel fills the pool with copies of the current state") {
  const int L = 2;
  Matrix identity(L, L, kNegInf);
  for (int i = 0; i < L; ++i) identity(i, i) = 0.0;
  const std::vector<double> log_rho = to_log(std::vector<double>{0.5, 0.5});
  auto kernel = make_finite_pool_kernel(log_rho, identity);
  RngStream rng(2);
  for (int rep = 0; rep < 20; ++rep) {
    const auto pool = build_pool(kernel, 1, 5, rng);
    CHECK(pool.size() == 5);
    CHECK(pool.states[pool.zero_offset] == 1);
    for (int s : pool.states) CHECK(s == 1);
  }
}

TEST_CASE("alpha=0 pools draw the non-current entries iid from rho") {
  const double mu = 0.3, nu = 1.7;
  auto kernel = make_gauss_pool_kernel({mu, nu, 0.0});
  RngStream rng(3);
  const int pools = 100000, K = 5;
  double sum = 0.0, sumsq = 0.0;
  long count = 0;
  for (int i = 0; i < pools; ++i) {
    const auto pool = build_pool(kernel, 2.0, K, rng);
    for (int k = 0; k < K; ++k) {
      if (k == pool.zero_offset) continue;
      sum += pool.states[k];
      sumsq += pool.states[k] * pool.states[k];
      ++count;
    }
  }
  const double n = static_cast<double>(count);
  const double mean = sum / n;
  const double sd = std::sqrt(sumsq / n - mean * mean);
  CHECK(std::abs(mean - mu) < 3.0 * nu / std::sqrt(n));
  CHECK(std::abs(sd - nu) < 3.0 * nu / std::sqrt(2.0 * n));
}

TEST_CASE("marginal pool membership at a fixed non-zero offset is rho") {
  const double mu = -0.4, nu = 0.9;
  auto kernel = make_gauss_pool_kernel({mu, nu, 0.0});
  RngStream rng(4);
  const int pools = 100000, K = 4;
  std::vector<double> at_plus_one, at_minus_one;
  for (int i = 0; i < pools; ++i) {
    const auto pool = build_pool(kernel, 1.5, K, rng);
    if (pool.j_draw >= 1) at_plus_one.push_back(pool.states[pool.zero_offset + 1]);
    if (pool.zero_offset >= 1)
      at_minus_one.push_back(pool.states[pool.zero_offset - 1]);
  }
  auto cdf = [mu, nu](double x) {
    return 0.5 * std::erfc(-(x - mu) / (nu * std::sqrt(2.0)));
  };
  for (const auto& draws : {at_plus_one, at_minus_one}) {
    const double d = testutil::ks_statistic_vs_cdf(draws, cdf);
    CHECK(d < testutil::ks_critical(1e-3, draws.size()));
  }
}

TEST_CASE("J is uniform on {0..K-1}") {
  auto kernel = make_gauss_pool_kernel({0.0, 1.0, 0.0});
  RngStream rng(5);
  const int K = 10, n = 1000000;
  std::vector<double> counts(K, 0.0);
  for (int i = 0; i < n; ++i) {
    const auto pool = build_pool(kernel, 0.0, K, rng);
    counts[pool.j_draw] += 1.0;
    CHECK(pool.zero_offset == K - 1 - pool.j_draw);
  }
  const std::vector<double> expected(K, static_cast<double>(n) / K);
  CHECK(testutil::chi2_statistic(counts, expected) < testutil::kChi2Crit9);
}

TEST_CASE("build_pool rejects invalid input") {
  auto kernel = make_gauss_pool_kernel({0.0, 1.0, 0.0});
  RngStream rng(6);
  CHECK_THROWS_AS(build_pool(kernel, 0.0, 0, rng), UsageError);

  PoolKernel<double> nan_kernel = kernel;
  nan_kernel.step_fwd = [](const double&, RngStream&) { return std::nan(""); };
  nan_kernel.step_rev = nan_kernel.step_fwd;
  bool threw = false;
  for (int rep = 0; rep < 50 && !threw; ++rep) {
    try {
      build_pool(nan_kernel, 0.0, 4, rng);
    } catch (const NumericError&) {
      threw = true;
    }
  }
  CHECK(threw);
}

TEST_CASE("reversal of a reversible kernel is the kernel itself") {
  // rho = (2/3, 1/3), R = [[1/2, 1/2], [1, 0]] leaves rho invariant and
  // satisfies detailed balance, so the reversal equals R entry by entry.
  const std::vector<double> rho = {2.0 / 3.0, 1.0 / 3.0};
  Matrix r(2, 2);
  r(0, 0) = 0.5;
  r(0, 1) = 0.5;
  r(1, 0) = 1.0;
  r(1, 1) = 0.0;
  // sanity: rho-invariance and detailed balance of the chosen example
  for (int j = 0; j < 2; ++j) {
    double flow = 0.0;
    for (int i = 0; i < 2; ++i) flow += rho[i] * r(i, j);
    REQUIRE(flow == doctest::Approx(rho[j]).epsilon(1e-15));
  }
  REQUIRE(rho[0] * r(0, 1) == doctest::Approx(rho[1] * r(1, 0)).epsilon(1e-15));

  const Matrix log_rev = finite_reverse_kernel(to_log(r), to_log(rho));
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      const double expected = r(i, j) > 0.0 ? std::log(r(i, j)) : kNegInf;
      if (expected == kNegInf)
        CHECK(log_rev(i, j) == kNegInf);
      else
        CHECK(log_rev(i, j) == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("reversal rows are stochastic and uniform rho transposes R") {
  NonReversibleCase c;
  // sanity: rho R = rho but R is not reversible
  for (int j = 0; j < 3; ++j) {
    double flow = 0.0;
    for (int i = 0; i < 3; ++i) flow += c.rho[i] * c.r(i, j);
    REQUIRE(flow == doctest::Approx(c.rho[j]).epsilon(1e-14));
  }
  REQUIRE(std::abs(c.rho[0] * c.r(0, 2) - c.rho[2] * c.r(2, 0)) > 1e-3);

  const Matrix log_rev = finite_reverse_kernel(to_log(c.r), to_log(c.rho));
  for (int i = 0; i < 3; ++i) {
    double s = 0.0;
    for (int j = 0; j < 3; ++j)
      s += log_rev(i, j) == kNegInf ? 0.0 : std::exp(log_rev(i, j));
    CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
  }

  // uniform rho, doubly stochastic R: reversal is the transpose
  std::vector<double> uniform = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
  Matrix doubly(3, 3);
  const double entries[3][3] = {{0.0, 0.6, 0.4}, {0.4, 0.0, 0.6}, {0.6, 0.4, 0.0}};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) doubly(i, j) = entries[i][j];
  const Matrix log_rev_u = finite_reverse_kernel(to_log(doubly), to_log(uniform));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const double expected = doubly(j, i) > 0.0 ? std::log(doubly(j, i)) : kNegInf;
      if (expected == kNegInf)
        CHECK(log_rev_u(i, j) == kNegInf);
      else
        CHECK(log_rev_u(i, j) == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("reversal rejects zero rho at a reachable state") {
  std::vector<double> rho = {1.0, 0.0};
  Matrix r(2, 2);
  r(0, 0) = 0.5;
  r(0, 1) = 0.5;  // reaches state 1, which rho does not support
  r(1, 0) = 1.0;
  r(1, 1) = 0.0;
  CHECK_THROWS_AS(finite_reverse_kernel(to_log(r), to_log(rho)), DomainError);
}

TEST_CASE("pool generation probability factorizes into the closed form") {
  NonReversibleCase c;
  const Matrix log_r = to_log(c.r);
  const std::vector<double> log_rho = to_log(c.rho);
  const Matrix log_rev = finite_reverse_kernel(log_r, log_rho);

  for (int K = 1; K <= 3; ++K) {
    for (int J = 0; J < K; ++J) {
      for (int current = 0; current < 3; ++current) {
        double total = 0.0;
        for (const auto& states : testutil::all_sequences(K, 3)) {
          if (states[K - 1 - J] != current) continue;
          const double seq_lp =
              sequential_pool_log_prob(states, J, log_r, log_rev);
          const double closed_lp =
              closed_form_pool_log_prob(states, J, log_r, log_rho);
          if (seq_lp == kNegInf) {
            CHECK(closed_lp == kNegInf);
          } else {
            CHECK(std::exp(seq_lp) == doctest::Approx(std::exp(closed_lp)).epsilon(1e-12));
          }
          total += std::exp(seq_lp);
        }
        CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("build_pool frequencies match the analytic pool distribution") {
  NonReversibleCase c;
  const Matrix log_r = to_log(c.r);
  const std::vector<double> log_rho = to_log(c.rho);
  const Matrix log_rev = finite_reverse_kernel(log_r, log_rho);
  auto kernel = make_finite_pool_kernel(log_rho, log_r);

  const int K = 3, current = 0, n = 100000;
  std::map<std::tuple<int, int, int, int>, long> counts;
  RngStream rng(7);
  for (int i = 0; i < n; ++i) {
    const auto pool = build_pool(kernel, current, K, rng);
    ++counts[{pool.j_draw, pool.states[0], pool.states[1], pool.states[2]}];
  }

  std::vector<double> observed, expected;
  for (int J = 0; J < K; ++J) {
    for (const auto& states : testutil::all_sequences(K, 3)) {
      if (states[K - 1 - J] != current) continue;
      const double lp = sequential_pool_log_prob(states, J, log_r, log_rev);
      const double p = lp == kNegInf ? 0.0 : std::exp(lp) / K;
      const auto it = counts.find({J, states[0], states[1], states[2]});
      const double c_obs = it == counts.end() ? 0.0 : static_cast<double>(it->second);
      if (p == 0.0) {
        CHECK(c_obs == 0.0);
      } else {
        observed.push_back(c_obs);
        expected.push_back(p * n);
      }
    }
  }
  // 15 reachable cells for this kernel, so 14 degrees of freedom.
  CHECK(observed.size() == 15);
  CHECK(testutil::chi2_statistic(observed, expected) < testutil::kChi2Crit14);
}
