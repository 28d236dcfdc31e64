#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "ehmm/errors.hpp"

namespace ehmm {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kLogTwoPi = 1.8378770664093453;  // log(2*pi)

inline double log_normal_pdf(double x, double mean, double sd) {
  const double z = (x - mean) / sd;
  return -0.5 * z * z - std::log(sd) - 0.5 * kLogTwoPi;
}

inline double normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

// log(sum(exp(v))); -inf for an empty or all minus-infinity input.
inline double log_sum_exp(std::span<const double> v) {
  double m = kNegInf;
  for (double x : v) {
    if (std::isnan(x)) throw NumericError("log_sum_exp: NaN input");
    if (x > m) m = x;
  }
  if (m == kNegInf) return kNegInf;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

// Dense row-major matrix of doubles; just enough surface for the small
// transition tables used throughout.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols, double fill = 0.0)
      : rows_(rows),
        cols_(cols),
        v_(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols),
           fill) {}

  double& operator()(int r, int c) { return v_[index(r, c)]; }
  double operator()(int r, int c) const { return v_[index(r, c)]; }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool empty() const { return v_.empty(); }

  std::span<const double> row(int r) const {
    return {v_.data() + index(r, 0), static_cast<std::size_t>(cols_)};
  }

 private:
  std::size_t index(int r, int c) const {
    return static_cast<std::size_t>(r) * static_cast<std::size_t>(cols_) +
           static_cast<std::size_t>(c);
  }

  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> v_;
};

}  // namespace ehmm
