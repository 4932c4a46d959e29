#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>

namespace bosd {

/// Seeded random source with self-contained samplers so that a given seed
/// yields the same stream on every platform (std::normal_distribution and
/// friends are not specified bit-for-bit).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform double in [0, 1).
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller.
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  Eigen::VectorXd normal_vector(Eigen::Index n) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = normal();
    return v;
  }

  /// Index into an unnormalized non-negative weight vector.
  int discrete(const Eigen::VectorXd& weights);

  /// Gamma(shape, scale=1) via Marsaglia-Tsang.
  double gamma(double shape);

  double chi_squared(double dof) { return 2.0 * gamma(0.5 * dof); }

  /// Cholesky factor L of W ~ Wishart(scale, dof), scale given by its own
  /// Cholesky factor (Bartlett decomposition).
  Eigen::MatrixXd wishart_cholesky(const Eigen::MatrixXd& scale_chol, double dof);

 private:
  std::mt19937_64 engine_;
};

}  // namespace bosd
