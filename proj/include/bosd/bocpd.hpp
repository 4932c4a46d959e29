#pragma once

#include <Eigen/Dense>
#include <memory>
#include <vector>

#include "bosd/model.hpp"
#include "bosd/upm.hpp"

namespace bosd {

/// Run-length filter over r in [0, R], R = d_max - 1. Works in log space;
/// the stored posterior is the scaled (normalized) recursion. Only accepts
/// single-state, duration-agnostic observation models; richer models belong
/// to BosdFilter.
class BocpdFilter {
 public:
  BocpdFilter(HazardFn hazard, std::shared_ptr<const Upm> upm);

  /// Absorb one observation; returns log p(y_t | Y_{1:t-1}).
  double step(const Eigen::VectorXd& y);

  /// Log of the one-step-ahead predictive density at y, marginalized over
  /// the run length (does not advance the filter).
  double log_predictive(const Eigen::VectorXd& y) const;

  /// log p(r_t | Y_{1:t}) after the last step (point mass at r=0 before any).
  const Eigen::VectorXd& log_posterior() const { return log_posterior_; }
  Eigen::VectorXd posterior() const;

  int max_run_length() const { return static_cast<int>(hazard_.support()) - 1; }
  int time() const { return t_; }
  double cumulative_log_evidence() const { return cum_log_evidence_; }
  const HazardFn& hazard() const { return hazard_; }

 private:
  Eigen::VectorXd weighted_log_mass(const Eigen::VectorXd& y) const;
  void propagate(const Eigen::VectorXd& y);

  HazardFn hazard_;
  std::shared_ptr<const Upm> upm_;
  Eigen::VectorXd log_prior_next_;  // p(r_t | Y_{1:t-1}) after hazard propagation
  Eigen::VectorXd log_posterior_;
  std::vector<UpmState> bank_;  // bank_[r] has absorbed the last r observations
  int t_ = 0;
  double cum_log_evidence_ = 0.0;
  mutable bool warned_cap_ = false;
};

}  // namespace bosd
