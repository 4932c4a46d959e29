#include "bosd/bosd_filter.hpp"

#include <cmath>
#include <cstring>

#include "bosd/numerics.hpp"

namespace bosd {

Eigen::VectorXd JointPosterior::log_run_length_marginal() const {
  Eigen::VectorXd out = Eigen::VectorXd::Constant(d_max_, kNegInf);
  for (int z = 0; z < k_; ++z)
    for (int d = 1; d <= d_max_; ++d)
      for (int r = 0; r < d; ++r) out[r] = log_add(out[r], (*this)(z, d, r));
  return out;
}

Eigen::VectorXd JointPosterior::log_residual_marginal() const {
  Eigen::VectorXd out = Eigen::VectorXd::Constant(d_max_, kNegInf);
  for (int z = 0; z < k_; ++z)
    for (int d = 1; d <= d_max_; ++d)
      for (int r = 0; r < d; ++r) out[d - 1 - r] = log_add(out[d - 1 - r], (*this)(z, d, r));
  return out;
}

Eigen::VectorXd JointPosterior::log_duration_marginal() const {
  Eigen::VectorXd out = Eigen::VectorXd::Constant(d_max_, kNegInf);
  for (int z = 0; z < k_; ++z)
    for (int d = 1; d <= d_max_; ++d)
      for (int r = 0; r < d; ++r) out[d - 1] = log_add(out[d - 1], (*this)(z, d, r));
  return out;
}

Eigen::VectorXd JointPosterior::log_state_marginal() const {
  Eigen::VectorXd out = Eigen::VectorXd::Constant(k_, kNegInf);
  for (int z = 0; z < k_; ++z) {
    const auto offset = static_cast<Eigen::Index>(z) * tri_size(d_max_);
    out[z] = log_sum_exp(log_mass_.data() + offset, tri_size(d_max_));
  }
  return out;
}

namespace {

Eigen::MatrixXd log_of(const Eigen::MatrixXd& m) {
  Eigen::MatrixXd out(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out(i, j) = log_or_neg_inf(m(i, j));
  return out;
}

Eigen::VectorXd log_of(const Eigen::VectorXd& v) {
  Eigen::VectorXd out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) out[i] = log_or_neg_inf(v[i]);
  return out;
}

int argmax_lowest(const Eigen::VectorXd& v) {
  int best = 0;
  for (int i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

}  // namespace

BosdFilter::BosdFilter(const HsmmParams& params)
    : k_(params.num_states()),
      d_max_(params.max_duration()),
      upm_(make_upm(params.upm)),
      layout_(BankLayout::kNone),
      prior_next_(params.num_states(), params.max_duration()),
      joint_(params.num_states(), params.max_duration()) {
  const ValidationReport report = validate(params);
  if (!report.ok()) {
    std::string msg = "bosd: invalid model:";
    for (const auto& e : report.errors) msg += "\n  " + e;
    throw std::invalid_argument(msg);
  }
  log_pi_ = log_of(params.pi);
  log_a_ = log_of(params.a);
  log_d_ = log_of(params.d);

  if (!upm_->stateful())
    layout_ = BankLayout::kNone;
  else if (upm_->duration_dependent())
    layout_ = BankLayout::kPerStateDurationRunLength;
  else
    layout_ = BankLayout::kPerStateRunLength;

  if (layout_ == BankLayout::kPerStateRunLength) {
    bank_.resize(static_cast<std::size_t>(k_) * d_max_);
    for (int z = 0; z < k_; ++z)
      for (int r = 0; r < d_max_; ++r) bank_[static_cast<std::size_t>(z) * d_max_ + r] = upm_->reset(z);
  } else if (layout_ == BankLayout::kPerStateDurationRunLength) {
    bank_.resize(static_cast<std::size_t>(k_) * JointPosterior::tri_size(d_max_));
    for (int z = 0; z < k_; ++z)
      for (int d = 1; d <= d_max_; ++d)
        for (int r = 0; r < d; ++r) bank_[joint_.index(z, d, r)] = upm_->reset(z, d);
  }

  // base case: the first observation opens the first segment, so the
  // predicted prior for t=1 puts all mass at r=0 with (z, d) ~ pi x D
  for (int z = 0; z < k_; ++z)
    for (int d = 1; d <= d_max_; ++d)
      prior_next_.at(z, d, 0) = log_pi_[z] + log_d_(z, d - 1);
  joint_ = prior_next_;
}

void BosdFilter::weighted_log_mass(const Eigen::VectorXd& y) const {
  scratch_mass_.setConstant(static_cast<Eigen::Index>(k_) * JointPosterior::tri_size(d_max_),
                            kNegInf);
  Eigen::VectorXd& mass = scratch_mass_;
  const bool agnostic_shared = layout_ == BankLayout::kPerStateRunLength;
  const bool per_duration = layout_ == BankLayout::kPerStateDurationRunLength;
  // duration-agnostic models: one evaluation per (z, r), reused across d
  Eigen::VectorXd shared_evals;
  if (agnostic_shared || (!per_duration && !upm_->duration_dependent())) {
    shared_evals.setConstant(static_cast<Eigen::Index>(k_) * d_max_,
                             std::numeric_limits<double>::quiet_NaN());
  }
  const UpmState empty_state;
  const double* prior = prior_next_.log_mass().data();
  double* out = mass.data();
  Eigen::Index idx = 0;
  for (int z = 0; z < k_; ++z) {
    for (int d = 1; d <= d_max_; ++d) {
      for (int r = 0; r < d; ++r, ++idx) {
        if (prior[idx] == kNegInf) continue;
        double eval;
        if (shared_evals.size() > 0) {
          double& cached = shared_evals[static_cast<Eigen::Index>(z) * d_max_ + r];
          if (std::isnan(cached)) {
            const UpmState& s =
                agnostic_shared ? bank_[static_cast<std::size_t>(z) * d_max_ + r] : empty_state;
            cached = upm_->log_predictive(y, r, r + 1, z, s);
          }
          eval = cached;
        } else if (per_duration) {
          eval = upm_->log_predictive(y, r, d, z, bank_[idx]);
        } else {  // duration-dependent, closed form per point
          eval = upm_->log_predictive(y, r, d, z, empty_state);
        }
        out[idx] = prior[idx] + eval;
      }
    }
  }
}

double BosdFilter::log_normalizer() const {
  const double max_log = scratch_mass_.maxCoeff();
  if (!std::isfinite(max_log)) return kNegInf;
  // one exp pass serves the normalizer and all marginals; below -745 the
  // exponential underflows past the denormal range, so skip the call
  scratch_probs_.resize(scratch_mass_.size());
  const double* in = scratch_mass_.data();
  double* out = scratch_probs_.data();
  double total = 0.0;
  for (Eigen::Index i = 0; i < scratch_mass_.size(); ++i) {
    const double x = in[i] - max_log;
    const double p = x > -745.0 ? std::exp(x) : 0.0;
    out[i] = p;
    total += p;
  }
  scratch_total_ = total;
  return max_log + std::log(total);
}

double BosdFilter::log_predictive(const Eigen::VectorXd& y) const {
  weighted_log_mass(y);
  return log_normalizer();
}

StepMarginals BosdFilter::step(const Eigen::VectorXd& y) {
  weighted_log_mass(y);
  const double log_evidence = log_normalizer();
  if (!std::isfinite(log_evidence))
    throw NumericalError("bosd: zero total mass at step " + std::to_string(t_ + 1) +
                         " (every hypothesis has vanished)");
  const double total = scratch_total_;
  scratch_mass_.array() -= log_evidence;
  std::swap(joint_.log_mass(), scratch_mass_);

  Eigen::VectorXd run_length = Eigen::VectorXd::Zero(d_max_);
  Eigen::VectorXd residual = Eigen::VectorXd::Zero(d_max_);
  Eigen::VectorXd state = Eigen::VectorXd::Zero(k_);
  const double* cell = scratch_probs_.data();
  for (int z = 0; z < k_; ++z) {
    double state_acc = 0.0;
    for (int d = 1; d <= d_max_; ++d) {
      for (int r = 0; r < d; ++r, ++cell) {
        const double p = *cell;
        run_length[r] += p;
        residual[d - 1 - r] += p;
        state_acc += p;
      }
    }
    state[z] = state_acc;
  }

  StepMarginals out;
  out.log_run_length = (run_length / total).unaryExpr(&log_or_neg_inf);
  out.log_residual = (residual / total).unaryExpr(&log_or_neg_inf);
  out.log_state = (state / total).unaryExpr(&log_or_neg_inf);
  out.log_evidence = log_evidence;
  out.map_state = argmax_lowest(out.log_state);

  propagate_mass();
  propagate_bank(y);
  ++t_;
  cum_log_evidence_ += log_evidence;
  return out;
}

void BosdFilter::propagate_mass() {
  // segment-completion mass per state: gamma(z, d, d-1)
  Eigen::VectorXd eta = Eigen::VectorXd::Constant(k_, kNegInf);
  for (int z = 0; z < k_; ++z)
    for (int d = 1; d <= d_max_; ++d) eta[z] = log_add(eta[z], joint_(z, d, d - 1));
  // mix through the transition matrix
  Eigen::VectorXd beta = Eigen::VectorXd::Constant(k_, kNegInf);
  for (int z_prev = 0; z_prev < k_; ++z_prev) {
    if (eta[z_prev] == kNegInf) continue;
    for (int z = 0; z < k_; ++z)
      beta[z] = log_add(beta[z], log_a_(z_prev, z) + eta[z_prev]);
  }
  // shift each (z, d) block: r picks up the mass of r - 1, the reborn r = 0
  // cell gets the duration row times the change-point mass
  const double* src = joint_.log_mass().data();
  double* dst = prior_next_.log_mass().data();
  Eigen::Index base = 0;
  for (int z = 0; z < k_; ++z) {
    for (int d = 1; d <= d_max_; ++d) {
      std::memcpy(dst + base + 1, src + base, (d - 1) * sizeof(double));
      dst[base] = log_d_(z, d - 1) + beta[z];
      base += d;
    }
  }
}

void BosdFilter::propagate_bank(const Eigen::VectorXd& y) {
  if (layout_ == BankLayout::kNone) return;
  if (layout_ == BankLayout::kPerStateRunLength) {
    for (int z = 0; z < k_; ++z) {
      const std::size_t base = static_cast<std::size_t>(z) * d_max_;
      for (int r = d_max_ - 1; r >= 1; --r) bank_[base + r] = upm_->update(bank_[base + r - 1], y);
      bank_[base] = upm_->reset(z);
    }
    return;
  }
  for (int z = 0; z < k_; ++z) {
    for (int d = 1; d <= d_max_; ++d) {
      for (int r = d - 1; r >= 1; --r)
        bank_[joint_.index(z, d, r)] = upm_->update(bank_[joint_.index(z, d, r - 1)], y);
      bank_[joint_.index(z, d, 0)] = upm_->reset(z, d);
    }
  }
}

std::vector<int> map_state_sequence(const std::vector<StepMarginals>& steps) {
  std::vector<int> out;
  out.reserve(steps.size());
  for (const auto& s : steps) out.push_back(argmax_lowest(s.log_state));
  return out;
}

}  // namespace bosd
