#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace bosd {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Raised when a filter step cannot produce a normalizable posterior
/// (e.g. every hypothesis has zero likelihood).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// log(exp(a) + exp(b)), safe when either operand is -inf.
inline double log_add(double a, double b) {
  if (a < b) std::swap(a, b);
  if (b == kNegInf) return a;
  return a + std::log1p(std::exp(b - a));
}

inline double log_sum_exp(const double* v, Eigen::Index n) {
  double m = kNegInf;
  for (Eigen::Index i = 0; i < n; ++i) m = std::max(m, v[i]);
  if (m == kNegInf) return kNegInf;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) acc += std::exp(v[i] - m);
  return m + std::log(acc);
}

inline double log_sum_exp(const Eigen::VectorXd& v) {
  return log_sum_exp(v.data(), v.size());
}

/// Shift a log-mass vector so that its exponentials sum to one.
inline Eigen::VectorXd log_normalize(Eigen::VectorXd v) {
  const double lse = log_sum_exp(v);
  if (lse == kNegInf || !std::isfinite(lse))
    throw NumericalError("log_normalize: total mass is zero or non-finite");
  v.array() -= lse;
  return v;
}

/// exp() of a log-mass vector, mapping -inf cells to exactly 0.
inline Eigen::VectorXd exp_mass(const Eigen::VectorXd& log_mass) {
  Eigen::VectorXd out(log_mass.size());
  for (Eigen::Index i = 0; i < log_mass.size(); ++i)
    out[i] = log_mass[i] == kNegInf ? 0.0 : std::exp(log_mass[i]);
  return out;
}

/// Entropy (nats) of a normalized log-mass vector.
inline double entropy_from_log(const Eigen::VectorXd& log_mass) {
  double h = 0.0;
  for (Eigen::Index i = 0; i < log_mass.size(); ++i) {
    if (log_mass[i] == kNegInf) continue;
    h -= std::exp(log_mass[i]) * log_mass[i];
  }
  return h;
}

inline double log_or_neg_inf(double p) {
  return p > 0.0 ? std::log(p) : kNegInf;
}

}  // namespace bosd
