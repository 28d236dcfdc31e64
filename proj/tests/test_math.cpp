#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "ehmm/math.hpp"

using namespace ehmm;

TEST_CASE("log_normal_pdf matches the closed form") {
  // standard normal at 0: -0.5 log(2 pi)
  CHECK(log_normal_pdf(0.0, 0.0, 1.0) == doctest::Approx(-0.9189385332046727).epsilon(1e-14));
  // N(2.5 | 0, 2.5^2): -0.5 log(2 pi 6.25) - 0.5
  CHECK(log_normal_pdf(2.5, 0.0, 2.5) == doctest::Approx(-2.3352292650788278).epsilon(1e-14));
}

TEST_CASE("log_sum_exp") {
  std::vector<double> v = {std::log(0.25), std::log(0.75)};
  CHECK(log_sum_exp(v) == doctest::Approx(0.0).epsilon(1e-14));

  std::vector<double> shifted = {1000.0 + std::log(0.25), 1000.0 + std::log(0.75)};
  CHECK(log_sum_exp(shifted) == doctest::Approx(1000.0).epsilon(1e-12));

  std::vector<double> all_zero = {kNegInf, kNegInf};
  CHECK(log_sum_exp(all_zero) == kNegInf);

  std::vector<double> with_nan = {0.0, std::nan("")};
  CHECK_THROWS_AS(log_sum_exp(with_nan), NumericError);
}

TEST_CASE("matrix indexing is row-major") {
  Matrix m(2, 3);
  m(0, 0) = 1.0;
  m(1, 2) = 5.0;
  CHECK(m.rows() == 2);
  CHECK(m.cols() == 3);
  CHECK(m(0, 0) == 1.0);
  CHECK(m(1, 2) == 5.0);
  CHECK(m.row(1)[2] == 5.0);
  CHECK(m.row(0)[0] == 1.0);
}
