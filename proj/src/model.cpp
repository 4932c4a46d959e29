#include "bosd/model.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "bosd/log.hpp"

namespace bosd {

namespace {

bool is_probability_vector(const Eigen::VectorXd& v, double tol) {
  if (v.size() == 0) return false;
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (!std::isfinite(v[i]) || v[i] < 0.0 || v[i] > 1.0 + tol) return false;
  return std::abs(v.sum() - 1.0) <= tol;
}

}  // namespace

DurationPmf::DurationPmf(Eigen::VectorXd mass) : mass_(std::move(mass)) {
  if (mass_.size() == 0)
    throw std::invalid_argument("DurationPmf: empty support");
  for (Eigen::Index i = 0; i < mass_.size(); ++i)
    if (!std::isfinite(mass_[i]) || mass_[i] < 0.0)
      throw std::invalid_argument("DurationPmf: negative or non-finite mass at d=" +
                                  std::to_string(i + 1));
  if (std::abs(mass_.sum() - 1.0) > kProbabilityTol)
    throw std::invalid_argument("DurationPmf: mass sums to " + std::to_string(mass_.sum()) +
                                ", expected 1");
}

HazardFn::HazardFn(Eigen::VectorXd values) : values_(std::move(values)) {
  if (values_.size() == 0)
    throw std::invalid_argument("HazardFn: empty support");
  for (Eigen::Index i = 0; i < values_.size(); ++i)
    if (!std::isfinite(values_[i]) || values_[i] < 0.0 || values_[i] > 1.0)
      throw std::invalid_argument("HazardFn: value out of [0,1] at r=" + std::to_string(i));
}

HazardFn HazardFn::constant(double c, int d_max) {
  return HazardFn(Eigen::VectorXd::Constant(d_max, c));
}

HazardFn hazard_from_duration(const DurationPmf& pmf) {
  const Eigen::VectorXd& p = pmf.mass();
  const int d_max = pmf.max_duration();
  Eigen::VectorXd h(d_max);
  double survival = p.sum();  // p(d >= r + 1) at r = 0
  for (int r = 0; r < d_max; ++r) {
    h[r] = survival > 0.0 ? std::min(1.0, p[r] / survival) : 1.0;
    survival -= p[r];
  }
  return HazardFn(std::move(h));
}

DurationPmf duration_from_hazard(const HazardFn& h) {
  const int d_max = h.support();
  Eigen::VectorXd p(d_max);
  double survive = 1.0;  // prod_{g < d - 1} (1 - H(g))
  for (int d = 1; d <= d_max; ++d) {
    p[d - 1] = survive * h(d - 1);
    survive *= 1.0 - h(d - 1);
  }
  if (survive > 0.0) {
    // fold the remaining survival mass into the largest representable duration
    p[d_max - 1] += survive;
    if (survive > kNormalizationTol) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.3g", survive);
      logging::warn("duration_from_hazard: folded survival mass " + std::string(buf) +
                    " into d=" + std::to_string(d_max));
    }
  }
  return DurationPmf(std::move(p));
}

namespace {

void validate_upm_config(const UpmConfig& upm, int k, ValidationReport& report) {
  const int upm_k = upm_num_states(upm);
  if (upm_k != k)
    report.errors.push_back("upm: has " + std::to_string(upm_k) + " state blocks, model has K=" +
                            std::to_string(k));
  if (const auto* g = std::get_if<GaussianUpmConfig>(&upm)) {
    if (g->mode == GaussianUpmConfig::Mode::kFixed) {
      for (std::size_t z = 0; z < g->states.size(); ++z) {
        const auto& s = g->states[z];
        if (s.sigma.rows() != s.mu.size() || s.sigma.cols() != s.mu.size()) {
          report.errors.push_back("upm state " + std::to_string(z) + ": sigma shape mismatch");
          continue;
        }
        Eigen::LLT<Eigen::MatrixXd> llt(s.sigma);
        if (llt.info() != Eigen::Success)
          report.errors.push_back("upm state " + std::to_string(z) +
                                  ": sigma is not positive definite");
      }
    } else {
      for (std::size_t z = 0; z < g->priors.size(); ++z) {
        const auto& pr = g->priors[z];
        const auto m = pr.mu0.size();
        if (pr.kappa0 <= 0.0)
          report.errors.push_back("upm state " + std::to_string(z) + ": kappa0 must be > 0");
        if (pr.nu0 <= static_cast<double>(m) - 1.0)
          report.errors.push_back("upm state " + std::to_string(z) + ": nu0 must exceed dim-1");
        if (pr.psi0.rows() != m || pr.psi0.cols() != m) {
          report.errors.push_back("upm state " + std::to_string(z) + ": psi0 shape mismatch");
          continue;
        }
        Eigen::LLT<Eigen::MatrixXd> llt(pr.psi0);
        if (llt.info() != Eigen::Success)
          report.errors.push_back("upm state " + std::to_string(z) +
                                  ": psi0 is not positive definite");
      }
    }
  } else if (const auto* s = std::get_if<SineUpmConfig>(&upm)) {
    for (std::size_t z = 0; z < s->states.size(); ++z)
      if (!(s->states[z].sigma2 > 0.0))
        report.errors.push_back("upm state " + std::to_string(z) + ": sigma2 must be > 0");
  } else if (const auto* b = std::get_if<BasisUpmConfig>(&upm)) {
    const auto n = b->centers.size();
    if (n < 1) report.errors.push_back("upm: basis needs at least one center");
    if (b->widths.size() != n)
      report.errors.push_back("upm: widths/centers length mismatch");
    for (Eigen::Index j = 0; j < b->widths.size(); ++j)
      if (!(b->widths[j] > 0.0))
        report.errors.push_back("upm: width " + std::to_string(j) + " must be > 0");
    for (std::size_t z = 0; z < b->states.size(); ++z) {
      const auto& st = b->states[z];
      if (st.weight_mean.size() != n || st.weight_cov.rows() != n || st.weight_cov.cols() != n) {
        report.errors.push_back("upm state " + std::to_string(z) + ": weight prior shape mismatch");
        continue;
      }
      if (!(st.noise_var > 0.0))
        report.errors.push_back("upm state " + std::to_string(z) + ": noise_var must be > 0");
      Eigen::LLT<Eigen::MatrixXd> llt(st.weight_cov);
      if (llt.info() != Eigen::Success)
        report.errors.push_back("upm state " + std::to_string(z) +
                                ": weight_cov is not positive definite");
    }
  }
}

}  // namespace

ValidationReport validate(const HsmmParams& params) {
  ValidationReport report;
  const int k = params.num_states();
  const int d_max = params.max_duration();
  if (k < 1) report.errors.push_back("pi: model needs at least one state");
  if (d_max < 1) report.errors.push_back("d: model needs d_max >= 1");
  if (!report.errors.empty()) return report;

  if (!is_probability_vector(params.pi, kNormalizationTol))
    report.errors.push_back("pi: not a probability vector (sum=" +
                            std::to_string(params.pi.sum()) + ")");
  if (params.a.rows() != k || params.a.cols() != k) {
    report.errors.push_back("a: expected " + std::to_string(k) + "x" + std::to_string(k));
  } else {
    for (int i = 0; i < k; ++i) {
      if (!is_probability_vector(params.a.row(i).transpose(), kNormalizationTol))
        report.errors.push_back("a: row " + std::to_string(i) + " is not a probability vector");
      if (k > 1 && params.a(i, i) > 0.0)
        report.advisories.push_back("a: self-transition mass " + std::to_string(params.a(i, i)) +
                                    " at state " + std::to_string(i) +
                                    " is confounded with longer durations");
    }
  }
  if (params.d.rows() != k) {
    report.errors.push_back("d: expected " + std::to_string(k) + " rows");
  } else {
    for (int i = 0; i < k; ++i) {
      for (int j = 0; j < d_max; ++j)
        if (!std::isfinite(params.d(i, j)) || params.d(i, j) < 0.0)
          report.errors.push_back("d: negative or non-finite mass at (state " + std::to_string(i) +
                                  ", duration " + std::to_string(j + 1) + ")");
      const double row_sum = params.d.row(i).sum();
      if (std::abs(row_sum - 1.0) > kNormalizationTol)
        report.errors.push_back("d: row " + std::to_string(i) + " sums to " +
                                std::to_string(row_sum));
    }
  }
  validate_upm_config(params.upm, k, report);
  return report;
}

BasisUpmConfig BasisUpmConfig::uniform_layout(int n_basis, double width) {
  if (n_basis < 1) throw std::invalid_argument("uniform_layout: n_basis must be >= 1");
  BasisUpmConfig config;
  config.centers.resize(n_basis);
  for (int j = 0; j < n_basis; ++j)
    config.centers[j] = (j + 0.5) / static_cast<double>(n_basis);
  const double w = width > 0.0 ? width : 1.0 / static_cast<double>(n_basis);
  config.widths = Eigen::VectorXd::Constant(n_basis, w);
  return config;
}

int upm_num_states(const UpmConfig& config) {
  return std::visit([](const auto& c) { return c.num_states(); }, config);
}

int upm_dim(const UpmConfig& config) {
  if (const auto* g = std::get_if<GaussianUpmConfig>(&config)) return g->dim();
  if (std::holds_alternative<SineUpmConfig>(config)) return 2;
  return 1;  // basis models a scalar signal
}

bool upm_duration_dependent(const UpmConfig& config) {
  return !std::holds_alternative<GaussianUpmConfig>(config);
}

}  // namespace bosd
