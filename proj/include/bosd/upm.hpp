#pragma once

#include <Eigen/Dense>
#include <memory>
#include <string>
#include <vector>

#include "bosd/rng.hpp"
#include "bosd/upm_params.hpp"

namespace bosd {

/// Opaque per-hypothesis sufficient statistics. States are immutable after
/// construction; update() hands back a fresh value, so hypotheses can share
/// and copy states freely.
class UpmStateBase {
 public:
  virtual ~UpmStateBase() = default;
};

class UpmState {
 public:
  UpmState() = default;
  explicit UpmState(std::shared_ptr<const UpmStateBase> impl) : impl_(std::move(impl)) {}

  bool empty() const { return impl_ == nullptr; }

  template <typename T>
  const T& as() const {
    const T* p = dynamic_cast<const T*>(impl_.get());
    if (p == nullptr) throw std::logic_error("UpmState: wrong state type for this model");
    return *p;
  }

 private:
  std::shared_ptr<const UpmStateBase> impl_;
};

/// One labeled segment used for emission-parameter fitting: `y` holds the
/// block of observations row per time step, so y.rows() is the duration.
struct TrainingSegment {
  int state = 0;
  Eigen::MatrixXd y;
};

/// Underlying predictive model p(y | r, d, z, Y^r). Families that ignore the
/// segment duration report duration_dependent() == false and must return
/// identical densities for every valid d. Families whose per-point density is
/// closed-form given (r, d, z) report stateful() == false; their states carry
/// no data and update() is the identity.
class Upm {
 public:
  virtual ~Upm() = default;

  virtual int dim() const = 0;
  virtual int num_states() const = 0;
  virtual bool duration_dependent() const = 0;
  virtual bool stateful() const = 0;

  /// Prior state with zero observations absorbed. `duration` binds the state
  /// to a duration hypothesis where the statistics depend on it; 0 leaves the
  /// state unbound (valid for duration-agnostic families, and at r = 0).
  virtual UpmState reset(int z, int duration = 0) const = 0;

  /// State absorbing one more observation.
  virtual UpmState update(const UpmState& s, const Eigen::VectorXd& y) const = 0;

  /// Log predictive density of y at run length r within a segment of
  /// duration d in state z, given statistics s of the r prior observations.
  double log_predictive(const Eigen::VectorXd& y, int r, int d, int z, const UpmState& s) const;

  /// Draws the d observations of one segment (row per step).
  virtual Eigen::MatrixXd sample_segment(int z, int d, Rng& rng) const = 0;

 protected:
  virtual double log_predictive_impl(const Eigen::VectorXd& y, int r, int d, int z,
                                     const UpmState& s) const = 0;
};

std::unique_ptr<Upm> make_upm(const UpmConfig& config);

/// Maximum-likelihood emission parameters per state from labeled segments.
/// `prototype` supplies the structural choices (Gaussian mode, basis layout);
/// the data supply the fitted values. States with no segments keep their
/// prototype values, with a warning.
UpmConfig fit_upm_mle(const UpmConfig& prototype, const std::vector<TrainingSegment>& segments,
                      std::vector<std::string>* warnings = nullptr);

/// Per-channel per-band mean spectral amplitude of one epoch (samples x
/// channels), via a plain periodogram; features are ordered channel-major.
Eigen::VectorXd band_features(const Eigen::MatrixXd& epoch,
                              const std::vector<std::pair<double, double>>& bands,
                              double sample_rate, bool log_amplitude = false);

}  // namespace bosd
