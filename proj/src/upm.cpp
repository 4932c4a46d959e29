#include "bosd/upm.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>
#include <unsupported/Eigen/FFT>

#include "bosd/log.hpp"
#include "bosd/numerics.hpp"

namespace bosd {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

double mvn_logpdf(const Eigen::VectorXd& y, const Eigen::VectorXd& mu,
                  const Eigen::LLT<Eigen::MatrixXd>& llt, double log_det) {
  const Eigen::Index m = y.size();
  const Eigen::VectorXd w = llt.matrixL().solve(y - mu);
  return -0.5 * (m * kLog2Pi + log_det + w.squaredNorm());
}

double scalar_normal_logpdf(double y, double mean, double var) {
  const double q = y - mean;
  return -0.5 * (kLog2Pi + std::log(var) + q * q / var);
}

double scalar_t_logpdf(double y, double mean, double scale, double dof) {
  const double q = y - mean;
  return std::lgamma(0.5 * (dof + 1.0)) - std::lgamma(0.5 * dof) -
         0.5 * std::log(dof * std::numbers::pi * scale) -
         0.5 * (dof + 1.0) * std::log1p(q * q / (dof * scale));
}

double mvt_logpdf(const Eigen::VectorXd& y, const Eigen::VectorXd& mu,
                  const Eigen::MatrixXd& scale, double dof) {
  const Eigen::Index m = y.size();
  Eigen::LLT<Eigen::MatrixXd> llt(scale);
  if (llt.info() != Eigen::Success)
    throw NumericalError("student-t scale matrix is not positive definite");
  double log_det = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) log_det += 2.0 * std::log(llt.matrixL()(i, i));
  const Eigen::VectorXd w = llt.matrixL().solve(y - mu);
  return std::lgamma(0.5 * (dof + m)) - std::lgamma(0.5 * dof) -
         0.5 * m * std::log(dof * std::numbers::pi) - 0.5 * log_det -
         0.5 * (dof + m) * std::log1p(w.squaredNorm() / dof);
}

// ---------------------------------------------------------------------------
// Gaussian, fixed per-state (mu, sigma)

class FixedGaussianUpm final : public Upm {
 public:
  explicit FixedGaussianUpm(GaussianUpmConfig config) : config_(std::move(config)) {
    for (const auto& s : config_.states) {
      Eigen::LLT<Eigen::MatrixXd> llt(s.sigma);
      if (llt.info() != Eigen::Success)
        throw std::invalid_argument("gaussian upm: sigma is not positive definite");
      double log_det = 0.0;
      for (Eigen::Index i = 0; i < s.sigma.rows(); ++i)
        log_det += 2.0 * std::log(llt.matrixL()(i, i));
      llts_.push_back(std::move(llt));
      log_dets_.push_back(log_det);
    }
  }

  int dim() const override { return config_.dim(); }
  int num_states() const override { return config_.num_states(); }
  bool duration_dependent() const override { return false; }
  bool stateful() const override { return false; }

  UpmState reset(int, int) const override { return UpmState(); }
  UpmState update(const UpmState& s, const Eigen::VectorXd&) const override { return s; }

  Eigen::MatrixXd sample_segment(int z, int d, Rng& rng) const override {
    const auto& st = config_.states.at(z);
    const Eigen::MatrixXd l = llts_[z].matrixL();
    Eigen::MatrixXd out(d, st.mu.size());
    for (int i = 0; i < d; ++i)
      out.row(i) = (st.mu + l * rng.normal_vector(st.mu.size())).transpose();
    return out;
  }

 protected:
  double log_predictive_impl(const Eigen::VectorXd& y, int, int, int z,
                             const UpmState&) const override {
    return mvn_logpdf(y, config_.states[z].mu, llts_[z], log_dets_[z]);
  }

 private:
  GaussianUpmConfig config_;
  std::vector<Eigen::LLT<Eigen::MatrixXd>> llts_;
  std::vector<double> log_dets_;
};

// ---------------------------------------------------------------------------
// Gaussian, conjugate NIW prior with incremental sufficient statistics

struct GaussStats final : UpmStateBase {
  int z = 0;
  int n = 0;
  Eigen::VectorXd sum;
  Eigen::MatrixXd sumsq;
};

class ConjugateGaussianUpm final : public Upm {
 public:
  explicit ConjugateGaussianUpm(GaussianUpmConfig config) : config_(std::move(config)) {
    for (const auto& pr : config_.priors) {
      const auto m = pr.mu0.size();
      if (pr.kappa0 <= 0.0 || pr.nu0 <= static_cast<double>(m) - 1.0)
        throw std::invalid_argument("gaussian upm: invalid NIW prior (kappa0, nu0)");
      if (Eigen::LLT<Eigen::MatrixXd>(pr.psi0).info() != Eigen::Success)
        throw std::invalid_argument("gaussian upm: psi0 is not positive definite");
    }
  }

  int dim() const override { return config_.dim(); }
  int num_states() const override { return config_.num_states(); }
  bool duration_dependent() const override { return false; }
  bool stateful() const override { return true; }

  UpmState reset(int z, int) const override {
    auto st = std::make_shared<GaussStats>();
    st->z = z;
    st->sum = Eigen::VectorXd::Zero(dim());
    st->sumsq = Eigen::MatrixXd::Zero(dim(), dim());
    return UpmState(std::move(st));
  }

  UpmState update(const UpmState& s, const Eigen::VectorXd& y) const override {
    const auto& prev = s.as<GaussStats>();
    auto st = std::make_shared<GaussStats>();
    st->z = prev.z;
    st->n = prev.n + 1;
    st->sum = prev.sum + y;
    st->sumsq = prev.sumsq + y * y.transpose();
    return UpmState(std::move(st));
  }

  Eigen::MatrixXd sample_segment(int z, int d, Rng& rng) const override {
    const auto& pr = config_.priors.at(z);
    const Eigen::Index m = pr.mu0.size();
    // sigma ~ IW(psi0, nu0) via a Wishart draw on psi0^{-1}
    const Eigen::MatrixXd psi_inv = pr.psi0.inverse();
    const Eigen::MatrixXd w_chol =
        rng.wishart_cholesky(Eigen::LLT<Eigen::MatrixXd>(psi_inv).matrixL(), pr.nu0);
    const Eigen::MatrixXd sigma = (w_chol * w_chol.transpose()).inverse();
    const Eigen::MatrixXd sigma_chol = Eigen::LLT<Eigen::MatrixXd>(sigma).matrixL();
    const Eigen::VectorXd mu =
        pr.mu0 + sigma_chol * rng.normal_vector(m) / std::sqrt(pr.kappa0);
    Eigen::MatrixXd out(d, m);
    for (int i = 0; i < d; ++i)
      out.row(i) = (mu + sigma_chol * rng.normal_vector(m)).transpose();
    return out;
  }

 protected:
  double log_predictive_impl(const Eigen::VectorXd& y, int r, int, int z,
                             const UpmState& s) const override {
    const auto& st = s.as<GaussStats>();
    if (st.z != z) throw std::logic_error("gaussian upm: state belongs to another hidden state");
    if (st.n != r)
      throw std::logic_error("gaussian upm: state has absorbed " + std::to_string(st.n) +
                             " observations, expected r=" + std::to_string(r));
    const auto& pr = config_.priors[z];
    const Eigen::Index m = y.size();
    if (m == 1) {  // scalar path, no heap traffic on the filter hot loop
      const double kn = pr.kappa0 + st.n;
      const double nun = pr.nu0 + st.n;
      double mun = pr.mu0[0];
      double psin = pr.psi0(0, 0);
      if (st.n > 0) {
        const double ybar = st.sum[0] / st.n;
        const double ss = st.sumsq(0, 0) - st.n * ybar * ybar;
        mun = (pr.kappa0 * pr.mu0[0] + st.sum[0]) / kn;
        const double dm = ybar - pr.mu0[0];
        psin += ss + pr.kappa0 * st.n / kn * dm * dm;
      }
      const double dof = nun;  // nu_n - m + 1 with m = 1
      const double scale = psin * (kn + 1.0) / (kn * dof);
      return scalar_t_logpdf(y[0], mun, scale, dof);
    }
    const double kn = pr.kappa0 + st.n;
    const double nun = pr.nu0 + st.n;
    Eigen::VectorXd mun = pr.mu0;
    Eigen::MatrixXd psin = pr.psi0;
    if (st.n > 0) {
      const Eigen::VectorXd ybar = st.sum / st.n;
      const Eigen::MatrixXd ss = st.sumsq - st.n * ybar * ybar.transpose();
      mun = (pr.kappa0 * pr.mu0 + st.sum) / kn;
      const Eigen::VectorXd dm = ybar - pr.mu0;
      psin += ss + (pr.kappa0 * st.n / kn) * dm * dm.transpose();
    }
    const double dof = nun - m + 1.0;
    const Eigen::MatrixXd scale = psin * (kn + 1.0) / (kn * dof);
    return mvt_logpdf(y, mun, scale, dof);
  }

 private:
  GaussianUpmConfig config_;
};

// ---------------------------------------------------------------------------
// Scaled sine: phase sweeps [0, 1] over the segment, so realizations of the
// same state share one functional shape across durations.

class SineUpm final : public Upm {
 public:
  explicit SineUpm(SineUpmConfig config) : config_(std::move(config)) {
    for (const auto& s : config_.states)
      if (!(s.sigma2 > 0.0)) throw std::invalid_argument("sine upm: sigma2 must be > 0");
  }

  static double phase(int r, int d) { return d >= 2 ? static_cast<double>(r) / (d - 1) : 0.0; }

  int dim() const override { return 2; }
  int num_states() const override { return config_.num_states(); }
  bool duration_dependent() const override { return true; }
  bool stateful() const override { return false; }

  UpmState reset(int, int) const override { return UpmState(); }
  UpmState update(const UpmState& s, const Eigen::VectorXd&) const override { return s; }

  Eigen::MatrixXd sample_segment(int z, int d, Rng& rng) const override {
    const auto& st = config_.states.at(z);
    const double sd = std::sqrt(st.sigma2);
    Eigen::MatrixXd out(d, 2);
    for (int r = 0; r < d; ++r) {
      const double s = std::sin(phase(r, d));
      out(r, 0) = st.b * s + sd * rng.normal();
      out(r, 1) = st.c * s + sd * rng.normal();
    }
    return out;
  }

 protected:
  double log_predictive_impl(const Eigen::VectorXd& y, int r, int d, int z,
                             const UpmState&) const override {
    const auto& st = config_.states[z];
    const double s = std::sin(phase(r, d));
    const double q0 = y[0] - st.b * s;
    const double q1 = y[1] - st.c * s;
    return -kLog2Pi - std::log(st.sigma2) - 0.5 * (q0 * q0 + q1 * q1) / st.sigma2;
  }

 private:
  SineUpmConfig config_;
};

// ---------------------------------------------------------------------------
// Basis-function linear-Gaussian emission over the phase x = r / d.

struct BasisStats final : UpmStateBase {
  int z = 0;
  int d = 0;  // duration hypothesis the design vectors are bound to; 0 = unbound
  int n = 0;
  Eigen::MatrixXd lambda;  // posterior precision of the weights
  Eigen::VectorXd eta;     // lambda * posterior mean
};

class BasisUpm final : public Upm {
 public:
  explicit BasisUpm(BasisUpmConfig config) : config_(std::move(config)) {
    if (config_.num_basis() < 1)
      throw std::invalid_argument("basis upm: needs at least one basis function");
    for (const auto& st : config_.states) {
      if (!(st.noise_var > 0.0))
        throw std::invalid_argument("basis upm: noise_var must be > 0");
      Eigen::LLT<Eigen::MatrixXd> llt(st.weight_cov);
      if (llt.info() != Eigen::Success)
        throw std::invalid_argument("basis upm: weight_cov is not positive definite");
      const Eigen::MatrixXd identity =
          Eigen::MatrixXd::Identity(config_.num_basis(), config_.num_basis());
      prior_precision_.push_back(llt.solve(identity));
      prior_eta_.push_back(prior_precision_.back() * st.weight_mean);
      weight_chol_.push_back(llt.matrixL());
    }
  }

  int dim() const override { return 1; }
  int num_states() const override { return config_.num_states(); }
  bool duration_dependent() const override { return true; }
  bool stateful() const override { return true; }

  UpmState reset(int z, int duration) const override {
    auto st = std::make_shared<BasisStats>();
    st->z = z;
    st->d = duration;
    st->lambda = prior_precision_.at(z);
    st->eta = prior_eta_.at(z);
    return UpmState(std::move(st));
  }

  UpmState update(const UpmState& s, const Eigen::VectorXd& y) const override {
    const auto& prev = s.as<BasisStats>();
    if (prev.d < 1)
      throw std::logic_error("basis upm: cannot update a state with no bound duration");
    const double inv_noise = 1.0 / config_.states[prev.z].noise_var;
    const Eigen::VectorXd phi =
        config_.features(static_cast<double>(prev.n) / prev.d);
    auto st = std::make_shared<BasisStats>();
    st->z = prev.z;
    st->d = prev.d;
    st->n = prev.n + 1;
    st->lambda = prev.lambda + inv_noise * phi * phi.transpose();
    st->eta = prev.eta + inv_noise * y[0] * phi;
    return UpmState(std::move(st));
  }

  Eigen::MatrixXd sample_segment(int z, int d, Rng& rng) const override {
    const auto& st = config_.states.at(z);
    const Eigen::VectorXd w =
        st.weight_mean + weight_chol_[z] * rng.normal_vector(config_.num_basis());
    const double sd = std::sqrt(st.noise_var);
    Eigen::MatrixXd out(d, 1);
    for (int r = 0; r < d; ++r)
      out(r, 0) = config_.features(static_cast<double>(r) / d).dot(w) + sd * rng.normal();
    return out;
  }

 protected:
  double log_predictive_impl(const Eigen::VectorXd& y, int r, int d, int z,
                             const UpmState& s) const override {
    const auto& st = s.as<BasisStats>();
    if (st.z != z) throw std::logic_error("basis upm: state belongs to another hidden state");
    if (st.n != r)
      throw std::logic_error("basis upm: state has absorbed " + std::to_string(st.n) +
                             " observations, expected r=" + std::to_string(r));
    if (st.d != d && !(st.d == 0 && r == 0))
      throw std::logic_error("basis upm: state is bound to duration " + std::to_string(st.d) +
                             ", asked for d=" + std::to_string(d));
    const Eigen::VectorXd phi = config_.features(static_cast<double>(r) / d);
    Eigen::LLT<Eigen::MatrixXd> llt(st.lambda);
    if (llt.info() != Eigen::Success)
      throw NumericalError("basis upm: posterior precision lost positive definiteness");
    const Eigen::VectorXd mean_w = llt.solve(st.eta);
    const double var = phi.dot(llt.solve(phi)) + config_.states[z].noise_var;
    return scalar_normal_logpdf(y[0], phi.dot(mean_w), var);
  }

 private:
  BasisUpmConfig config_;
  std::vector<Eigen::MatrixXd> prior_precision_;
  std::vector<Eigen::VectorXd> prior_eta_;
  std::vector<Eigen::MatrixXd> weight_chol_;
};

}  // namespace

double Upm::log_predictive(const Eigen::VectorXd& y, int r, int d, int z,
                           const UpmState& s) const {
  if (y.size() != dim())
    throw std::invalid_argument("upm: observation has dimension " + std::to_string(y.size()) +
                                ", expected " + std::to_string(dim()));
  if (!y.allFinite()) throw std::invalid_argument("upm: non-finite observation");
  if (z < 0 || z >= num_states())
    throw std::invalid_argument("upm: hidden state out of range");
  if (d < 1 || r < 0 || r >= d)
    throw std::invalid_argument("upm: need 0 <= r < d, got r=" + std::to_string(r) +
                                ", d=" + std::to_string(d));
  return log_predictive_impl(y, r, d, z, s);
}

std::unique_ptr<Upm> make_upm(const UpmConfig& config) {
  if (const auto* g = std::get_if<GaussianUpmConfig>(&config)) {
    if (g->mode == GaussianUpmConfig::Mode::kFixed)
      return std::make_unique<FixedGaussianUpm>(*g);
    return std::make_unique<ConjugateGaussianUpm>(*g);
  }
  if (const auto* s = std::get_if<SineUpmConfig>(&config))
    return std::make_unique<SineUpm>(*s);
  return std::make_unique<BasisUpm>(std::get<BasisUpmConfig>(config));
}

// ---------------------------------------------------------------------------
// MLE fitting

namespace {

void add_warning(std::vector<std::string>* warnings, const std::string& msg) {
  logging::warn(msg);
  if (warnings != nullptr) warnings->push_back(msg);
}

/// Scaled jitter until the Cholesky succeeds.
void regularize_spd(Eigen::MatrixXd& m, const std::string& what,
                    std::vector<std::string>* warnings) {
  if (Eigen::LLT<Eigen::MatrixXd>(m).info() == Eigen::Success) return;
  double jitter = 1e-9 * std::max(m.trace() / m.rows(), 1.0);
  for (int attempt = 0; attempt < 12; ++attempt) {
    m += jitter * Eigen::MatrixXd::Identity(m.rows(), m.cols());
    if (Eigen::LLT<Eigen::MatrixXd>(m).info() == Eigen::Success) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.3g", jitter);
      add_warning(warnings, what + ": singular covariance, added " + std::string(buf) +
                                " ridge jitter");
      return;
    }
    jitter *= 10.0;
  }
  throw std::runtime_error(what + ": covariance could not be regularized");
}

std::vector<std::vector<const TrainingSegment*>> group_by_state(
    const std::vector<TrainingSegment>& segments, int k) {
  std::vector<std::vector<const TrainingSegment*>> by_state(k);
  for (const auto& seg : segments) {
    if (seg.state < 0 || seg.state >= k)
      throw std::invalid_argument("fit: segment state " + std::to_string(seg.state) +
                                  " out of range");
    if (seg.y.rows() < 1) throw std::invalid_argument("fit: empty segment block");
    by_state[seg.state].push_back(&seg);
  }
  return by_state;
}

GaussianUpmConfig fit_gaussian(const GaussianUpmConfig& prototype,
                               const std::vector<TrainingSegment>& segments,
                               std::vector<std::string>* warnings) {
  GaussianUpmConfig out = prototype;
  const int k = prototype.num_states();
  const int m = prototype.dim();
  const auto by_state = group_by_state(segments, k);
  for (int z = 0; z < k; ++z) {
    long n = 0;
    for (const auto* seg : by_state[z]) n += seg->y.rows();
    if (n == 0) {
      add_warning(warnings, "fit: state " + std::to_string(z) +
                                " has no segments; keeping prototype emission parameters");
      continue;
    }
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(m);
    for (const auto* seg : by_state[z]) mean += seg->y.colwise().sum().transpose();
    mean /= static_cast<double>(n);
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(m, m);
    for (const auto* seg : by_state[z])
      for (Eigen::Index i = 0; i < seg->y.rows(); ++i) {
        const Eigen::VectorXd q = seg->y.row(i).transpose() - mean;
        cov += q * q.transpose();
      }
    cov /= static_cast<double>(n);
    regularize_spd(cov, "fit gaussian state " + std::to_string(z), warnings);
    if (prototype.mode == GaussianUpmConfig::Mode::kFixed) {
      out.states[z].mu = mean;
      out.states[z].sigma = cov;
    } else {
      // moment-matched empirical Bayes: center the prior on the pooled
      // moments with a weakly informative strength
      NiwPrior pr;
      pr.mu0 = mean;
      pr.kappa0 = 1.0;
      pr.nu0 = m + 2.0;
      pr.psi0 = cov * (pr.nu0 - m - 1.0);
      regularize_spd(pr.psi0, "fit gaussian prior state " + std::to_string(z), warnings);
      out.priors[z] = std::move(pr);
    }
  }
  return out;
}

SineUpmConfig fit_sine(const SineUpmConfig& prototype,
                       const std::vector<TrainingSegment>& segments,
                       std::vector<std::string>* warnings) {
  SineUpmConfig out = prototype;
  const int k = prototype.num_states();
  const auto by_state = group_by_state(segments, k);
  for (int z = 0; z < k; ++z) {
    double ss = 0.0, sy0 = 0.0, sy1 = 0.0;
    long n = 0;
    for (const auto* seg : by_state[z]) {
      const int d = static_cast<int>(seg->y.rows());
      for (int r = 0; r < d; ++r) {
        const double s = std::sin(SineUpm::phase(r, d));
        ss += s * s;
        sy0 += s * seg->y(r, 0);
        sy1 += s * seg->y(r, 1);
        ++n;
      }
    }
    if (n == 0) {
      add_warning(warnings, "fit: state " + std::to_string(z) +
                                " has no segments; keeping prototype emission parameters");
      continue;
    }
    double b = 0.0, c = 0.0;
    if (ss > 0.0) {
      b = sy0 / ss;
      c = sy1 / ss;
    } else {
      add_warning(warnings, "fit sine state " + std::to_string(z) +
                                ": all phases at sin(x)=0, amplitudes unidentifiable");
    }
    double resid = 0.0;
    for (const auto* seg : by_state[z]) {
      const int d = static_cast<int>(seg->y.rows());
      for (int r = 0; r < d; ++r) {
        const double s = std::sin(SineUpm::phase(r, d));
        const double q0 = seg->y(r, 0) - b * s;
        const double q1 = seg->y(r, 1) - c * s;
        resid += q0 * q0 + q1 * q1;
      }
    }
    out.states[z].b = b;
    out.states[z].c = c;
    out.states[z].sigma2 = std::max(resid / (2.0 * n), 1e-12);
  }
  return out;
}

BasisUpmConfig fit_basis(const BasisUpmConfig& prototype,
                         const std::vector<TrainingSegment>& segments,
                         std::vector<std::string>* warnings) {
  BasisUpmConfig out = prototype;
  const int k = prototype.num_states();
  const int nb = prototype.num_basis();
  const auto by_state = group_by_state(segments, k);
  for (int z = 0; z < k; ++z) {
    if (by_state[z].empty()) {
      add_warning(warnings, "fit: state " + std::to_string(z) +
                                " has no segments; keeping prototype emission parameters");
      continue;
    }
    std::vector<Eigen::VectorXd> weights;
    double resid = 0.0;
    long n_points = 0;
    for (const auto* seg : by_state[z]) {
      const int d = static_cast<int>(seg->y.rows());
      Eigen::MatrixXd design(d, nb);
      for (int r = 0; r < d; ++r)
        design.row(r) = prototype.features(static_cast<double>(r) / d).transpose();
      Eigen::MatrixXd gram = design.transpose() * design;
      const double ridge = 1e-10 * std::max(gram.trace() / nb, 1.0);
      gram += ridge * Eigen::MatrixXd::Identity(nb, nb);
      const Eigen::VectorXd w = gram.llt().solve(design.transpose() * seg->y.col(0));
      resid += (seg->y.col(0) - design * w).squaredNorm();
      n_points += d;
      weights.push_back(w);
    }
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(nb);
    for (const auto& w : weights) mean += w;
    mean /= static_cast<double>(weights.size());
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(nb, nb);
    if (weights.size() >= 2) {
      for (const auto& w : weights) {
        const Eigen::VectorXd q = w - mean;
        cov += q * q.transpose();
      }
      cov /= static_cast<double>(weights.size() - 1);
    } else {
      add_warning(warnings, "fit basis state " + std::to_string(z) +
                                ": single segment, weight covariance unidentifiable");
    }
    regularize_spd(cov, "fit basis state " + std::to_string(z), warnings);
    out.states[z].weight_mean = mean;
    out.states[z].weight_cov = cov;
    out.states[z].noise_var = std::max(resid / static_cast<double>(n_points), 1e-12);
  }
  return out;
}

}  // namespace

UpmConfig fit_upm_mle(const UpmConfig& prototype, const std::vector<TrainingSegment>& segments,
                      std::vector<std::string>* warnings) {
  const int m = upm_dim(prototype);
  for (const auto& seg : segments)
    if (seg.y.cols() != m)
      throw std::invalid_argument("fit: segment block has " + std::to_string(seg.y.cols()) +
                                  " columns, model dimension is " + std::to_string(m));
  if (const auto* g = std::get_if<GaussianUpmConfig>(&prototype))
    return fit_gaussian(*g, segments, warnings);
  if (const auto* s = std::get_if<SineUpmConfig>(&prototype))
    return fit_sine(*s, segments, warnings);
  return fit_basis(std::get<BasisUpmConfig>(prototype), segments, warnings);
}

// ---------------------------------------------------------------------------
// Frequency-band features

Eigen::VectorXd band_features(const Eigen::MatrixXd& epoch,
                              const std::vector<std::pair<double, double>>& bands,
                              double sample_rate, bool log_amplitude) {
  const Eigen::Index n = epoch.rows();
  const Eigen::Index channels = epoch.cols();
  if (n < 2) throw std::invalid_argument("band_features: epoch needs at least 2 samples");
  if (!(sample_rate > 0.0)) throw std::invalid_argument("band_features: invalid sample rate");
  const double nyquist = sample_rate / 2.0;
  const double bin_hz = sample_rate / static_cast<double>(n);
  const Eigen::Index n_half = n / 2;

  std::vector<std::vector<Eigen::Index>> band_bins;
  for (const auto& [lo, hi] : bands) {
    if (!(lo >= 0.0) || !(hi >= lo)) throw std::invalid_argument("band_features: malformed band");
    if (hi > nyquist + 1e-12)
      throw std::invalid_argument("band_features: band exceeds the Nyquist frequency");
    std::vector<Eigen::Index> bins;
    for (Eigen::Index k = 0; k <= n_half; ++k) {
      const double f = k * bin_hz;
      if (f >= lo - 1e-12 && f <= hi + 1e-12) bins.push_back(k);
    }
    if (bins.empty())
      throw std::invalid_argument("band_features: band contains no spectral bins at this length");
    band_bins.push_back(std::move(bins));
  }

  Eigen::FFT<double> fft;
  Eigen::VectorXd out(channels * static_cast<Eigen::Index>(bands.size()));
  std::vector<std::complex<double>> spectrum;
  std::vector<double> signal(n);
  for (Eigen::Index ch = 0; ch < channels; ++ch) {
    for (Eigen::Index i = 0; i < n; ++i) signal[i] = epoch(i, ch);
    fft.fwd(spectrum, signal);
    // one-sided amplitude: a pure tone of amplitude A lands at its bin as A
    Eigen::VectorXd amp(n_half + 1);
    for (Eigen::Index k = 0; k <= n_half; ++k) {
      const double scale = (k == 0 || (n % 2 == 0 && k == n_half)) ? 1.0 : 2.0;
      amp[k] = scale * std::abs(spectrum[k]) / static_cast<double>(n);
    }
    for (std::size_t bi = 0; bi < band_bins.size(); ++bi) {
      double acc = 0.0;
      for (const Eigen::Index k : band_bins[bi]) acc += amp[k];
      double feature = acc / static_cast<double>(band_bins[bi].size());
      if (log_amplitude) feature = std::log(feature + 1e-12);
      out[ch * static_cast<Eigen::Index>(bands.size()) + static_cast<Eigen::Index>(bi)] = feature;
    }
  }
  return out;
}

}  // namespace bosd
