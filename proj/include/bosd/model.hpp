#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "bosd/upm_params.hpp"

namespace bosd {

inline constexpr double kProbabilityTol = 1e-9;   // construction-time checks
inline constexpr double kNormalizationTol = 1e-12;

/// Probability mass over segment durations d in [1, d_max].
class DurationPmf {
 public:
  explicit DurationPmf(Eigen::VectorXd mass);

  int max_duration() const { return static_cast<int>(mass_.size()); }
  /// Mass at duration d (1-based).
  double operator()(int d) const { return mass_[d - 1]; }
  const Eigen::VectorXd& mass() const { return mass_; }

 private:
  Eigen::VectorXd mass_;
};

/// Discrete hazard H(r) for r in [0, d_max - 1]: the probability that the
/// active segment ends at run length r given it has survived to r.
class HazardFn {
 public:
  explicit HazardFn(Eigen::VectorXd values);

  static HazardFn constant(double c, int d_max);

  int support() const { return static_cast<int>(values_.size()); }
  double operator()(int r) const { return values_[r]; }
  /// Hazard with forced termination at the support cap, so no survival mass
  /// can escape past r = support - 1.
  double capped(int r) const {
    return r >= support() - 1 ? 1.0 : values_[r];
  }
  const Eigen::VectorXd& values() const { return values_; }

 private:
  Eigen::VectorXd values_;
};

/// H(r) = p(d = r + 1) / p(d >= r + 1); defined as 1 where the survival mass
/// vanishes so downstream filters never divide by zero.
HazardFn hazard_from_duration(const DurationPmf& pmf);

/// pmf(d) = H(d - 1) * prod_{g < d - 1} (1 - H(g)). Survival mass left past
/// the support cap is folded into d = d_max (warned through the logger).
DurationPmf duration_from_hazard(const HazardFn& h);

/// Everything the generative model needs: initial state pmf, state
/// transitions, per-state duration rows, and per-state emission
/// hyperparameters.
struct HsmmParams {
  Eigen::VectorXd pi;  // K
  Eigen::MatrixXd a;   // K x K, row-stochastic
  Eigen::MatrixXd d;   // K x d_max, rows are duration pmfs
  UpmConfig upm;

  int num_states() const { return static_cast<int>(pi.size()); }
  int max_duration() const { return static_cast<int>(d.cols()); }
  DurationPmf duration_pmf(int z) const { return DurationPmf(d.row(z).transpose()); }
};

struct ValidationReport {
  std::vector<std::string> errors;
  std::vector<std::string> advisories;
  bool ok() const { return errors.empty(); }
};

/// Checks every structural invariant and returns the violations rather than
/// throwing; an empty report means the filters can run on the model.
ValidationReport validate(const HsmmParams& params);

}  // namespace bosd
