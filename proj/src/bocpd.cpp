#include "bosd/bocpd.hpp"

#include <cmath>

#include "bosd/log.hpp"
#include "bosd/numerics.hpp"

namespace bosd {

BocpdFilter::BocpdFilter(HazardFn hazard, std::shared_ptr<const Upm> upm)
    : hazard_(std::move(hazard)), upm_(std::move(upm)) {
  if (upm_ == nullptr) throw std::invalid_argument("bocpd: null observation model");
  if (upm_->num_states() != 1)
    throw std::invalid_argument("bocpd: needs a single-state observation model, got K=" +
                                std::to_string(upm_->num_states()));
  if (upm_->duration_dependent())
    throw std::invalid_argument(
        "bocpd: duration-dependent observation models are ill-defined here; use BosdFilter");
  const int r_max = max_run_length();
  log_prior_next_ = Eigen::VectorXd::Constant(r_max + 1, kNegInf);
  log_prior_next_[0] = 0.0;  // the first observation opens the first segment
  log_posterior_ = log_prior_next_;
  bank_.assign(r_max + 1, upm_->reset(0));
}

Eigen::VectorXd BocpdFilter::weighted_log_mass(const Eigen::VectorXd& y) const {
  const int r_max = max_run_length();
  Eigen::VectorXd mass(r_max + 1);
  for (int r = 0; r <= r_max; ++r) {
    if (log_prior_next_[r] == kNegInf) {
      mass[r] = kNegInf;
      continue;
    }
    const double lp = upm_->log_predictive(y, r, r + 1, 0, bank_[r]);
    mass[r] = log_prior_next_[r] + lp;
  }
  return mass;
}

double BocpdFilter::log_predictive(const Eigen::VectorXd& y) const {
  return log_sum_exp(weighted_log_mass(y));
}

double BocpdFilter::step(const Eigen::VectorXd& y) {
  Eigen::VectorXd mass = weighted_log_mass(y);
  const double log_evidence = log_sum_exp(mass);
  if (!std::isfinite(log_evidence))
    throw NumericalError("bocpd: zero total mass at step " + std::to_string(t_ + 1) +
                         " (every run-length hypothesis has vanished)");
  mass.array() -= log_evidence;
  log_posterior_ = std::move(mass);
  propagate(y);
  ++t_;
  cum_log_evidence_ += log_evidence;
  return log_evidence;
}

void BocpdFilter::propagate(const Eigen::VectorXd& y) {
  const int r_max = max_run_length();
  if (!warned_cap_ && log_posterior_[r_max] != kNegInf && hazard_(r_max) < 1.0) {
    logging::warn("bocpd: run length reached the cap R=" + std::to_string(r_max) +
                  "; survival mass forced into a change point");
    warned_cap_ = true;
  }
  Eigen::VectorXd next(r_max + 1);
  double cp_mass = kNegInf;
  for (int r = 0; r <= r_max; ++r) {
    if (log_posterior_[r] == kNegInf) continue;
    cp_mass = log_add(cp_mass, log_posterior_[r] + log_or_neg_inf(hazard_.capped(r)));
  }
  next[0] = cp_mass;
  for (int r = r_max; r >= 1; --r) {
    const double grow = log_posterior_[r - 1];
    next[r] = grow == kNegInf ? kNegInf : grow + log_or_neg_inf(1.0 - hazard_.capped(r - 1));
    bank_[r] = upm_->update(bank_[r - 1], y);
  }
  bank_[0] = upm_->reset(0);
  log_prior_next_ = std::move(next);
}

Eigen::VectorXd BocpdFilter::posterior() const { return exp_mass(log_posterior_); }

}  // namespace bosd
