#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "ehmm/errors.hpp"
#include "ehmm/math.hpp"

namespace ehmm {

template <class State>
using StateSeq = std::vector<State>;

template <class Obs>
using ObsSeq = std::vector<Obs>;

enum class StateDomain { real_scalar, finite };

// A state-space model given purely by its log-densities. A log-density of
// -inf marks an impossible value; NaN (and +inf) are defects and rejected
// wherever the library evaluates a model callback.
template <class State, class Obs = State>
struct StateSpaceModel {
  std::function<double(const State&)> log_init;
  std::function<double(const State&, const State&)> log_trans;  // (prev, next)
  std::function<double(const State&, const Obs&)> log_emit;     // (state, obs)
  StateDomain domain = StateDomain::real_scalar;
  std::vector<State> labels;  // populated iff domain == finite
};

namespace detail {

inline double checked_log_density(double v, const char* what) {
  if (std::isnan(v) || v == std::numeric_limits<double>::infinity())
    throw NumericError(std::string(what) + " returned a non-log-density value");
  return v;
}

}  // namespace detail

// log P(x_0) + sum_t log P(x_t | x_{t-1}) + sum_t log P(y_t | x_t).
// -inf as soon as any factor has zero density.
template <class State, class Obs>
double log_joint(const StateSpaceModel<State, Obs>& model,
                 const StateSeq<State>& x, const ObsSeq<Obs>& y) {
  if (x.empty()) throw UsageError("log_joint: empty state sequence");
  if (x.size() != y.size())
    throw UsageError("log_joint: state/observation length mismatch");
  double total = detail::checked_log_density(model.log_init(x[0]), "log_init");
  for (std::size_t t = 1; t < x.size(); ++t)
    total +=
        detail::checked_log_density(model.log_trans(x[t - 1], x[t]), "log_trans");
  for (std::size_t t = 0; t < x.size(); ++t)
    total += detail::checked_log_density(model.log_emit(x[t], y[t]), "log_emit");
  return total;
}

// The unnormalized posterior log-density of a state sequence given the
// observations. Equal to log_joint: the evidence term is constant in x, so
// differences of this function are exact log posterior ratios.
template <class State, class Obs>
double log_posterior_unnorm(const StateSpaceModel<State, Obs>& model,
                            const StateSeq<State>& x, const ObsSeq<Obs>& y) {
  return log_joint(model, x, y);
}

// Finite model over integer labels 0..L-1 from linear-space probability
// tables. init must sum to 1 and every transition/emission row must sum to 1,
// each within 1e-12.
inline StateSpaceModel<int, int> make_finite_model(
    const std::vector<double>& init, const Matrix& trans, const Matrix& emit) {
  const int L = static_cast<int>(init.size());
  if (L < 1 || trans.rows() != L || trans.cols() != L || emit.rows() != L)
    throw UsageError("make_finite_model: inconsistent table shapes");
  auto check_row = [](std::span<const double> row, const char* what) {
    double s = 0.0;
    for (double p : row) {
      if (!(p >= 0.0)) throw DomainError(std::string(what) + ": negative or NaN probability");
      s += p;
    }
    if (std::abs(s - 1.0) > 1e-12)
      throw DomainError(std::string(what) + ": row does not sum to 1");
  };
  check_row(init, "make_finite_model init");
  for (int r = 0; r < L; ++r) check_row(trans.row(r), "make_finite_model trans");
  for (int r = 0; r < L; ++r) check_row(emit.row(r), "make_finite_model emit");

  auto to_log = [](double p) { return p > 0.0 ? std::log(p) : kNegInf; };
  Matrix log_trans(L, L), log_emit(L, emit.cols());
  std::vector<double> log_init(init.size());
  for (int i = 0; i < L; ++i) log_init[i] = to_log(init[i]);
  for (int r = 0; r < L; ++r)
    for (int c = 0; c < L; ++c) log_trans(r, c) = to_log(trans(r, c));
  for (int r = 0; r < L; ++r)
    for (int c = 0; c < emit.cols(); ++c) log_emit(r, c) = to_log(emit(r, c));

  StateSpaceModel<int, int> m;
  m.domain = StateDomain::finite;
  m.labels.resize(init.size());
  for (int i = 0; i < L; ++i) m.labels[i] = i;
  m.log_init = [log_init](const int& x) { return log_init.at(x); };
  m.log_trans = [log_trans](const int& a, const int& b) { return log_trans(a, b); };
  m.log_emit = [log_emit](const int& x, const int& y) { return log_emit(x, y); };
  return m;
}

}  // namespace ehmm
