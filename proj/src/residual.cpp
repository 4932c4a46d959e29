#include "bosd/residual.hpp"

#include <cmath>

#include "bosd/numerics.hpp"

namespace bosd {

ResidualKernel residual_kernel(const HazardFn& h) {
  const int r_max = h.support() - 1;
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(r_max + 1, r_max + 1);
  for (int r = 0; r <= r_max; ++r) {
    double survive = 1.0;
    for (int l = 0; r + l <= r_max; ++l) {
      g(l, r) = survive * h.capped(r + l);
      survive *= 1.0 - h.capped(r + l);
    }
  }
  return ResidualKernel{std::move(g)};
}

Eigen::VectorXd residual_log_posterior(const ResidualKernel& kernel,
                                       const Eigen::VectorXd& log_run_length_posterior) {
  if (kernel.g.cols() != log_run_length_posterior.size())
    throw std::invalid_argument("residual_log_posterior: kernel and posterior sizes disagree");
  const Eigen::VectorXd weights = exp_mass(log_run_length_posterior);
  const Eigen::VectorXd mixed = kernel.g * weights;
  Eigen::VectorXd out(mixed.size());
  for (Eigen::Index l = 0; l < mixed.size(); ++l) out[l] = log_or_neg_inf(mixed[l]);
  return out;
}

Eigen::VectorXd cdf_from_log_pmf(const Eigen::VectorXd& log_pmf) {
  Eigen::VectorXd cdf(log_pmf.size());
  double acc = 0.0;
  for (Eigen::Index i = 0; i < log_pmf.size(); ++i) {
    if (log_pmf[i] != kNegInf) acc += std::exp(log_pmf[i]);
    cdf[i] = std::min(acc, 1.0);
  }
  return cdf;
}

}  // namespace bosd
