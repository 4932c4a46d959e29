#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "bosd/bocpd.hpp"
#include "bosd/numerics.hpp"

using namespace bosd;

namespace {

GaussianUpmConfig conjugate_1d() {
  GaussianUpmConfig config;
  config.mode = GaussianUpmConfig::Mode::kConjugate;
  NiwPrior pr;
  pr.mu0 = Eigen::VectorXd::Zero(1);
  pr.kappa0 = 1.0;
  pr.nu0 = 3.0;
  pr.psi0 = Eigen::MatrixXd::Constant(1, 1, 1.0);
  config.priors = {pr};
  return config;
}

Eigen::VectorXd obs1(double v) { return Eigen::VectorXd::Constant(1, v); }

/// Independent oracle: enumerate every run-length path r_1..r_T (r_1 = 0,
/// each later step either grows or resets), scoring segments through the
/// observation model directly. Returns per-step posteriors and the log
/// marginal likelihood.
struct PathOracle {
  std::vector<Eigen::VectorXd> posteriors;  // linear domain, length T
  double log_marginal = 0.0;
};

PathOracle enumerate_run_length_paths(const HazardFn& hazard, const Upm& upm,
                                      const std::vector<double>& ys) {
  const int t_len = static_cast<int>(ys.size());
  const int r_max = hazard.support() - 1;
  PathOracle out;

  // weight of one run-length trajectory of length t: trajectory prior under
  // the capped hazard times the segment-wise observation likelihood
  const auto path_weight = [&](const std::vector<int>& path) {
    double log_w = 0.0;
    UpmState state = upm.reset(0);
    for (std::size_t t = 0; t < path.size(); ++t) {
      if (t > 0) {
        const int prev = path[t - 1];
        const double h = prev >= r_max ? 1.0 : hazard(prev);
        log_w += path[t] == 0 ? std::log(h) : std::log1p(-h);
      }
      if (path[t] == 0) state = upm.reset(0);
      log_w += upm.log_predictive(obs1(ys[t]), path[t], path[t] + 1, 0, state);
      state = upm.update(state, obs1(ys[t]));
    }
    return std::exp(log_w);
  };

  for (int t = 1; t <= t_len; ++t) {
    Eigen::VectorXd mass = Eigen::VectorXd::Zero(r_max + 1);
    std::vector<int> path;
    const auto dfs = [&](auto&& self, int step, int prev) -> void {
      if (step == t) {
        mass[path.back()] += path_weight(path);
        return;
      }
      if (step == 0) {
        path.push_back(0);  // the first observation opens the first segment
        self(self, 1, 0);
        path.pop_back();
        return;
      }
      path.push_back(0);
      self(self, step + 1, 0);
      path.pop_back();
      if (prev + 1 <= r_max && hazard(prev) < 1.0) {
        path.push_back(prev + 1);
        self(self, step + 1, prev + 1);
        path.pop_back();
      }
    };
    dfs(dfs, 0, 0);
    if (t == t_len) out.log_marginal = std::log(mass.sum());
    out.posteriors.push_back(mass / mass.sum());
  }
  return out;
}

}  // namespace

TEST_CASE("init puts all mass at r=0 with zero accumulated evidence") {
  BocpdFilter filter(HazardFn::constant(0.3, 8), make_upm(conjugate_1d()));
  CHECK(filter.posterior()[0] == doctest::Approx(1.0));
  CHECK(filter.cumulative_log_evidence() == 0.0);
  BocpdFilter again(HazardFn::constant(0.3, 8), make_upm(conjugate_1d()));
  CHECK(filter.log_posterior() == again.log_posterior());
}

TEST_CASE("hazard one forces a change point at every step") {
  BocpdFilter filter(HazardFn::constant(1.0, 6), make_upm(conjugate_1d()));
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal;
  for (int t = 0; t < 10; ++t) {
    filter.step(obs1(normal(rng)));
    CHECK(filter.posterior()[0] == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("hazard zero grows the run length deterministically") {
  const int d_max = 16;
  BocpdFilter filter(HazardFn::constant(0.0, d_max), make_upm(conjugate_1d()));
  std::mt19937_64 rng(4);
  std::normal_distribution<double> normal;
  for (int n = 1; n <= 10; ++n) {
    filter.step(obs1(normal(rng)));
    CHECK(filter.posterior()[n - 1] == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("posterior matches the 2^(T-1) change-point enumeration at T=4") {
  const HazardFn hazard = HazardFn::constant(0.3, 4);
  const std::shared_ptr<const Upm> upm = make_upm(conjugate_1d());
  BocpdFilter filter(hazard, upm);
  const std::vector<double> ys = {0.4, -1.2, 2.2, 1.9};
  const PathOracle oracle = enumerate_run_length_paths(hazard, *upm, ys);
  double cum = 0.0;
  for (std::size_t t = 0; t < ys.size(); ++t) {
    cum += filter.step(obs1(ys[t]));
    CHECK((filter.posterior() - oracle.posteriors[t]).cwiseAbs().maxCoeff() < 1e-10);
  }
  CHECK(cum == doctest::Approx(oracle.log_marginal).epsilon(1e-10));
  CHECK(filter.cumulative_log_evidence() == doctest::Approx(oracle.log_marginal));
}

TEST_CASE("posterior matches path enumeration on random small instances") {
  for (unsigned seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> normal;
    const int d_max = 2 + static_cast<int>(rng() % 3);  // up to 4
    const int t_len = 2 + static_cast<int>(rng() % 7);  // up to 8
    Eigen::VectorXd hvals(d_max);
    for (int i = 0; i < d_max; ++i) hvals[i] = 0.05 + 0.9 * unif(rng);
    const HazardFn hazard(hvals);
    const std::shared_ptr<const Upm> upm = make_upm(conjugate_1d());
    std::vector<double> ys;
    for (int t = 0; t < t_len; ++t) ys.push_back(normal(rng) * 2.0);
    const PathOracle oracle = enumerate_run_length_paths(hazard, *upm, ys);
    BocpdFilter filter(hazard, upm);
    for (int t = 0; t < t_len; ++t) {
      filter.step(obs1(ys[t]));
      REQUIRE((filter.posterior() - oracle.posteriors[t]).cwiseAbs().maxCoeff() < 1e-10);
    }
    REQUIRE(filter.cumulative_log_evidence() ==
            doctest::Approx(oracle.log_marginal).epsilon(1e-10));
  }
}

TEST_CASE("posterior stays normalized over a long run") {
  BocpdFilter filter(HazardFn::constant(0.1, 32), make_upm(conjugate_1d()));
  std::mt19937_64 rng(9);
  std::normal_distribution<double> normal;
  for (int t = 0; t < 300; ++t) {
    filter.step(obs1(normal(rng) + (t / 50) % 2 * 3.0));
    CHECK(std::abs(filter.posterior().sum() - 1.0) < 1e-10);
  }
}

TEST_CASE("one-step prediction at t=0 is the prior predictive") {
  const std::shared_ptr<const Upm> upm = make_upm(conjugate_1d());
  BocpdFilter filter(HazardFn::constant(0.25, 8), upm);
  const double expected = upm->log_predictive(obs1(0.6), 0, 1, 0, upm->reset(0));
  CHECK(filter.log_predictive(obs1(0.6)) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("prediction equals the evidence the next step reports") {
  const std::shared_ptr<const Upm> upm = make_upm(conjugate_1d());
  BocpdFilter filter(HazardFn::constant(0.2, 8), upm);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal;
  for (int t = 0; t < 6; ++t) {
    const Eigen::VectorXd y = obs1(normal(rng));
    const double predicted = filter.log_predictive(y);
    const double stepped = filter.step(y);
    CHECK(predicted == stepped);
  }
}

TEST_CASE("predictive mixture integrates to one (importance-sampled)") {
  const std::shared_ptr<const Upm> upm = make_upm(conjugate_1d());
  BocpdFilter filter(HazardFn::constant(0.3, 8), upm);
  for (double v : {0.5, -0.2, 1.4}) filter.step(obs1(v));
  // proposal: a wide normal covering the predictive bulk
  std::mt19937_64 rng(31);
  std::normal_distribution<double> proposal(0.0, 6.0);
  const double log_q_const = -0.5 * std::log(2.0 * M_PI * 36.0);
  double acc = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double y = proposal(rng);
    const double log_q = log_q_const - 0.5 * y * y / 36.0;
    acc += std::exp(filter.log_predictive(obs1(y)) - log_q);
  }
  CHECK(acc / n == doctest::Approx(1.0).epsilon(1e-2));
}

TEST_CASE("a step where every hypothesis underflows fails loudly") {
  GaussianUpmConfig config;  // fixed, tiny variance
  config.states = {GaussianStateParams{Eigen::VectorXd::Zero(1),
                                       Eigen::MatrixXd::Constant(1, 1, 1e-6)}};
  BocpdFilter filter(HazardFn::constant(0.5, 4), make_upm(config));
  CHECK_THROWS_AS(filter.step(obs1(1e200)), NumericalError);
}

TEST_CASE("duration-dependent models are rejected at construction") {
  SineUpmConfig sine;
  sine.states = {SineStateParams{1.0, 1.0, 0.5}};
  CHECK_THROWS_AS(BocpdFilter(HazardFn::constant(0.5, 4), make_upm(sine)),
                  std::invalid_argument);
}

TEST_CASE("multi-state models are rejected at construction") {
  GaussianUpmConfig config;
  config.states = {GaussianStateParams{Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Identity(1, 1)},
                   GaussianStateParams{Eigen::VectorXd::Ones(1), Eigen::MatrixXd::Identity(1, 1)}};
  CHECK_THROWS_AS(BocpdFilter(HazardFn::constant(0.5, 4), make_upm(config)),
                  std::invalid_argument);
}
