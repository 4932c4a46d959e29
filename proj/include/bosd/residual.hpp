#pragma once

#include <Eigen/Dense>

#include "bosd/model.hpp"

namespace bosd {

/// Offline table g(l, r) = p(residual time = l | run length = r), derived
/// from the hazard alone; independent of the observations.
struct ResidualKernel {
  Eigen::MatrixXd g;  // (R+1) x (R+1), rows indexed by l, columns by r

  int max_run_length() const { return static_cast<int>(g.cols()) - 1; }
};

/// g(l, r) = H(r + l) * prod_{gamma = r}^{r + l - 1} (1 - H(gamma)), using
/// the capped hazard so every reachable column sums to one.
ResidualKernel residual_kernel(const HazardFn& h);

/// Residual-time posterior log p(l | Y_{1:t}) from the run-length posterior:
/// mixes kernel columns by the run-length mass.
Eigen::VectorXd residual_log_posterior(const ResidualKernel& kernel,
                                       const Eigen::VectorXd& log_run_length_posterior);

/// Cumulative distribution of a normalized log pmf.
Eigen::VectorXd cdf_from_log_pmf(const Eigen::VectorXd& log_pmf);

}  // namespace bosd
