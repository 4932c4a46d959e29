#pragma once

#include <Eigen/Dense>
#include <limits>
#include <memory>
#include <vector>

#include "bosd/model.hpp"
#include "bosd/upm.hpp"

namespace bosd {

/// Normalized joint mass p(r_t, d_t, z_t | Y_{1:t}) stored in log space over
/// the triangular support r < d; cells with r >= d do not exist, so the
/// support invariant holds by construction.
class JointPosterior {
 public:
  JointPosterior(int num_states, int max_duration)
      : k_(num_states),
        d_max_(max_duration),
        log_mass_(Eigen::VectorXd::Constant(
            static_cast<Eigen::Index>(num_states) * tri_size(max_duration), kNegInfCell)) {}

  int num_states() const { return k_; }
  int max_duration() const { return d_max_; }

  /// Flat index of (z, d, r) with d in [1, d_max], r in [0, d-1].
  Eigen::Index index(int z, int d, int r) const {
    return static_cast<Eigen::Index>(z) * tri_size(d_max_) +
           static_cast<Eigen::Index>(d - 1) * d / 2 + r;
  }

  double operator()(int z, int d, int r) const { return log_mass_[index(z, d, r)]; }
  double& at(int z, int d, int r) { return log_mass_[index(z, d, r)]; }

  const Eigen::VectorXd& log_mass() const { return log_mass_; }
  Eigen::VectorXd& log_mass() { return log_mass_; }

  Eigen::VectorXd log_run_length_marginal() const;
  Eigen::VectorXd log_residual_marginal() const;  // over l = d - 1 - r
  Eigen::VectorXd log_duration_marginal() const;  // over d in [1, d_max]
  Eigen::VectorXd log_state_marginal() const;

  static Eigen::Index tri_size(int d_max) {
    return static_cast<Eigen::Index>(d_max) * (d_max + 1) / 2;
  }

 private:
  static constexpr double kNegInfCell = -std::numeric_limits<double>::infinity();
  int k_;
  int d_max_;
  Eigen::VectorXd log_mass_;
};

struct StepMarginals {
  Eigen::VectorXd log_run_length;  // over r in [0, d_max - 1]
  Eigen::VectorXd log_residual;    // over l in [0, d_max - 1]
  Eigen::VectorXd log_state;       // over z
  double log_evidence = 0.0;
  int map_state = 0;  // argmax of the state marginal, ties to the lowest index
};

/// How per-hypothesis sufficient statistics are stored, driven by the
/// observation model: duration-agnostic statistics are shared across all d
/// with equal (z, r); duration-dependent statistics live per (z, d, r);
/// closed-form models need no storage at all.
enum class BankLayout { kNone, kPerStateRunLength, kPerStateDurationRunLength };

/// Online joint filter over (run length, segment duration, hidden state).
/// Per-step cost is O(K^2 + K D^2) whenever the observation model evaluates
/// in constant time from its statistics.
class BosdFilter {
 public:
  explicit BosdFilter(const HsmmParams& params);

  /// Absorb one observation and return the per-step marginals.
  StepMarginals step(const Eigen::VectorXd& y);

  /// Log one-step-ahead predictive density at y (does not advance); equal to
  /// the log evidence a subsequent step(y) would report.
  double log_predictive(const Eigen::VectorXd& y) const;

  /// Joint posterior after the last step (the model prior before any step).
  const JointPosterior& joint() const { return joint_; }

  int time() const { return t_; }
  double cumulative_log_evidence() const { return cum_log_evidence_; }
  BankLayout bank_layout() const { return layout_; }
  int num_states() const { return k_; }
  int max_duration() const { return d_max_; }
  const Upm& upm() const { return *upm_; }

 private:
  /// Fills scratch_mass_ with prior + log-likelihood per reachable cell.
  void weighted_log_mass(const Eigen::VectorXd& y) const;
  /// Log-normalizer of scratch_mass_; fills scratch_probs_ with the shifted
  /// exponentials as a side effect (the one exp pass both callers share).
  double log_normalizer() const;
  void propagate_mass();
  void propagate_bank(const Eigen::VectorXd& y);

  int k_;
  int d_max_;
  Eigen::VectorXd log_pi_;
  Eigen::MatrixXd log_a_;
  Eigen::MatrixXd log_d_;
  std::shared_ptr<const Upm> upm_;
  BankLayout layout_;
  JointPosterior prior_next_;  // p(r_t, d_t, z_t | Y_{1:t-1})
  JointPosterior joint_;
  std::vector<UpmState> bank_;  // layout-dependent indexing; empty for kNone
  // step() reuses these buffers; filters are single-sequence objects, not
  // internally synchronized
  mutable Eigen::VectorXd scratch_mass_;
  mutable Eigen::ArrayXd scratch_probs_;
  mutable double scratch_total_ = 0.0;
  int t_ = 0;
  double cum_log_evidence_ = 0.0;
};

/// Per-step argmax of the filtered state marginal; ties break to the lowest
/// state index.
std::vector<int> map_state_sequence(const std::vector<StepMarginals>& steps);

}  // namespace bosd
