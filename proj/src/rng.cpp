#include "bosd/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace bosd {

int Rng::discrete(const Eigen::VectorXd& weights) {
  const double total = weights.sum();
  if (!(total > 0.0))
    throw std::invalid_argument("Rng::discrete: weights must have positive sum");
  const double u = uniform() * total;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    if (u < acc) return static_cast<int>(i);
  }
  // u landed in the rounding slack past the last positive weight
  for (Eigen::Index i = weights.size() - 1; i >= 0; --i)
    if (weights[i] > 0.0) return static_cast<int>(i);
  return 0;
}

double Rng::gamma(double shape) {
  if (!(shape > 0.0)) throw std::invalid_argument("Rng::gamma: shape must be > 0");
  if (shape < 1.0) {
    const double u = uniform();
    return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = normal();
    double v = 1.0 + c * x;
    if (v <= 0.0) continue;
    v = v * v * v;
    const double u = uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

Eigen::MatrixXd Rng::wishart_cholesky(const Eigen::MatrixXd& scale_chol, double dof) {
  const Eigen::Index m = scale_chol.rows();
  if (dof <= static_cast<double>(m) - 1.0)
    throw std::invalid_argument("Rng::wishart_cholesky: dof must exceed dim - 1");
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    a(i, i) = std::sqrt(chi_squared(dof - static_cast<double>(i)));
    for (Eigen::Index j = 0; j < i; ++j) a(i, j) = normal();
  }
  return scale_chol * a;
}

}  // namespace bosd
