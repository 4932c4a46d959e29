#pragma once

#include <Eigen/Dense>
#include <variant>
#include <vector>

namespace bosd {

/// Fixed per-state Gaussian emission N(y | mu, sigma).
struct GaussianStateParams {
  Eigen::VectorXd mu;
  Eigen::MatrixXd sigma;
};

/// Normal-inverse-Wishart prior over a per-segment (mean, covariance) draw.
struct NiwPrior {
  Eigen::VectorXd mu0;
  double kappa0 = 1.0;
  double nu0 = 0.0;  // must exceed dim - 1
  Eigen::MatrixXd psi0;
};

/// Gaussian observation model: independent of run length position within the
/// segment and of the segment duration. Two modes:
///  - kFixed: per-state (mu, sigma), typically fitted by MLE from labels;
///  - kConjugate: per-state NIW prior with incremental sufficient statistics,
///    yielding a Student-t predictive.
struct GaussianUpmConfig {
  enum class Mode { kFixed, kConjugate };
  Mode mode = Mode::kFixed;
  std::vector<GaussianStateParams> states;  // kFixed
  std::vector<NiwPrior> priors;             // kConjugate

  int num_states() const {
    return static_cast<int>(mode == Mode::kFixed ? states.size() : priors.size());
  }
  int dim() const {
    if (mode == Mode::kFixed)
      return states.empty() ? 0 : static_cast<int>(states.front().mu.size());
    return priors.empty() ? 0 : static_cast<int>(priors.front().mu0.size());
  }
};

/// Per-state constants of the planar sine emission
/// y = (b sin(x), c sin(x)) + noise, where x sweeps [0, 1] over the segment.
struct SineStateParams {
  double b = 0.0;
  double c = 0.0;
  double sigma2 = 1.0;
};

struct SineUpmConfig {
  std::vector<SineStateParams> states;
  int num_states() const { return static_cast<int>(states.size()); }
};

/// Weight-space prior of the basis-function emission for one state:
/// y = phi(r/d)^T w + noise, w ~ N(weight_mean, weight_cov).
struct BasisStateParams {
  Eigen::VectorXd weight_mean;
  Eigen::MatrixXd weight_cov;
  double noise_var = 1.0;
};

struct BasisUpmConfig {
  Eigen::VectorXd centers;  // on [0, 1)
  Eigen::VectorXd widths;
  std::vector<BasisStateParams> states;

  int num_states() const { return static_cast<int>(states.size()); }
  int num_basis() const { return static_cast<int>(centers.size()); }

  /// Gaussian bumps evaluated at phase x.
  Eigen::VectorXd features(double x) const {
    Eigen::VectorXd phi(centers.size());
    for (Eigen::Index j = 0; j < centers.size(); ++j) {
      const double u = (x - centers[j]) / widths[j];
      phi[j] = std::exp(-0.5 * u * u);
    }
    return phi;
  }

  /// Evenly spaced centers with a common width (default width 1/n).
  static BasisUpmConfig uniform_layout(int n_basis, double width = 0.0);
};

using UpmConfig = std::variant<GaussianUpmConfig, SineUpmConfig, BasisUpmConfig>;

int upm_num_states(const UpmConfig& config);
int upm_dim(const UpmConfig& config);
bool upm_duration_dependent(const UpmConfig& config);

}  // namespace bosd
