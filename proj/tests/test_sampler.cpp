#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "bosd/numerics.hpp"
#include "bosd/sampler.hpp"

using namespace bosd;

namespace {

GaussianUpmConfig fixed_gaussians(const std::vector<double>& means, double var = 1.0) {
  GaussianUpmConfig config;
  for (const double m : means)
    config.states.push_back(GaussianStateParams{Eigen::VectorXd::Constant(1, m),
                                                Eigen::MatrixXd::Constant(1, 1, var)});
  return config;
}

HsmmParams two_state_model() {
  HsmmParams params;
  params.pi = Eigen::Vector2d(0.5, 0.5);
  params.a = Eigen::MatrixXd(2, 2);
  params.a << 0.0, 1.0, 1.0, 0.0;
  params.d = Eigen::MatrixXd(2, 5);
  params.d << 0.1, 0.2, 0.4, 0.2, 0.1, 0.3, 0.3, 0.2, 0.1, 0.1;
  params.upm = fixed_gaussians({-1.5, 1.5});
  return params;
}

}  // namespace

TEST_CASE("identical seeds give bitwise-identical draws") {
  const HsmmParams params = two_state_model();
  const SampledSequence a = sample(params, 200, 77);
  const SampledSequence b = sample(params, 200, 77);
  CHECK(a.y == b.y);
  CHECK(a.state == b.state);
  CHECK(a.labels.segments.size() == b.labels.segments.size());
  const SampledSequence c = sample(params, 200, 78);
  CHECK(a.y != c.y);
}

TEST_CASE("point-mass durations tile the sequence exactly") {
  HsmmParams params = two_state_model();
  params.d = Eigen::MatrixXd::Zero(2, 5);
  params.d(0, 4) = 1.0;
  params.d(1, 4) = 1.0;
  const SampledSequence draw = sample(params, 10, 5);
  CHECK(draw.labels.segments.size() == 2);
  CHECK(draw.labels.segments[0].duration == 5);
  CHECK(draw.labels.segments[1].duration == 5);
  CHECK(!draw.labels.final_truncated);
}

TEST_CASE("a single self-looping state labels everything the same") {
  HsmmParams params;
  params.pi = Eigen::VectorXd::Ones(1);
  params.a = Eigen::MatrixXd::Ones(1, 1);
  params.d = Eigen::MatrixXd::Constant(1, 4, 0.25);
  params.upm = fixed_gaussians({0.0});
  const SampledSequence draw = sample(params, 50, 9);
  for (const int z : draw.state) CHECK(z == 0);
}

TEST_CASE("per-step ground truth is consistent with the labels") {
  const SampledSequence draw = sample(two_state_model(), 300, 13);
  int t = 0;
  for (const auto& seg : draw.labels.segments) {
    for (int r = 0; r < seg.duration; ++r) {
      CHECK(draw.run_length[t] == r);
      CHECK(draw.duration[t] == seg.duration);
      CHECK(draw.state[t] == seg.state);
      CHECK(draw.residual[t] == seg.duration - 1 - r);
      ++t;
    }
  }
  CHECK(t == 300);
  // labels tile [1, T]
  CHECK_NOTHROW(check_labels(draw.labels, 300, 2, 5, "sampled"));
}

TEST_CASE("empirical duration histogram approaches the duration row") {
  HsmmParams params = two_state_model();
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(5);
  double total = 0.0;
  for (int s = 0; s < 120; ++s) {
    const SampledSequence draw = sample(params, 500, 200 + s);
    const auto& segs = draw.labels.segments;
    for (std::size_t i = 0; i + 1 < segs.size(); ++i) {  // skip possibly truncated tails
      if (segs[i].state != 0) continue;
      counts[segs[i].duration - 1] += 1.0;
      total += 1.0;
    }
  }
  REQUIRE(total > 10000);
  const Eigen::VectorXd hist = counts / total;
  CHECK(0.5 * (hist - params.d.row(0).transpose()).cwiseAbs().sum() < 0.02);
}

TEST_CASE("truncated final segments are flagged") {
  HsmmParams params = two_state_model();
  params.d = Eigen::MatrixXd::Zero(2, 5);
  params.d(0, 4) = 1.0;
  params.d(1, 4) = 1.0;
  const SampledSequence draw = sample(params, 7, 3);  // 5 + 2: second segment cut
  CHECK(draw.labels.final_truncated);
  CHECK(draw.labels.segments.back().duration == 2);
}

TEST_CASE("enumeration refuses oversized instances") {
  const HsmmParams params = two_state_model();
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(12, 1);
  CHECK_THROWS_AS(enumerate_posterior(params, y), std::invalid_argument);
}

TEST_CASE("enumeration at T=1 is the pi x D prior weighted by the emission") {
  HsmmParams params = two_state_model();
  params.d = params.d.leftCols(4).eval();
  for (int z = 0; z < 2; ++z) params.d.row(z) /= params.d.row(z).sum();
  Eigen::MatrixXd y(1, 1);
  y << 0.3;
  const EnumerationResult res = enumerate_posterior(params, y);
  const auto upm = make_upm(params.upm);
  Eigen::VectorXd direct(2 * JointPosterior::tri_size(4));
  JointPosterior expected(2, 4);
  double total = kNegInf;
  for (int z = 0; z < 2; ++z)
    for (int d = 1; d <= 4; ++d) {
      const double w = std::log(params.pi[z]) + std::log(params.d(z, d - 1)) +
                       upm->log_predictive(y.row(0).transpose(), 0, d, z, UpmState());
      expected.at(z, d, 0) = w;
      total = log_add(total, w);
    }
  expected.log_mass().array() -= total;
  CHECK((exp_mass(res.per_step[0].log_mass()) - exp_mass(expected.log_mass()))
            .cwiseAbs()
            .maxCoeff() < 1e-12);
  CHECK(res.log_marginal_likelihood == doctest::Approx(total).epsilon(1e-12));
}

TEST_CASE("synthetic benchmark is deterministic and self-consistent") {
  SyntheticBenchmarkConfig config;
  config.t_len = 120;
  const SyntheticBenchmarkResult a = synthetic_benchmark(config, 2024);
  const SyntheticBenchmarkResult b = synthetic_benchmark(config, 2024);
  CHECK(a.sequence.y == b.sequence.y);
  CHECK(a.steps.size() == 120);
  CHECK(validate(a.params).ok());
  for (const auto& step : a.steps)
    CHECK(std::abs(exp_mass(step.log_state).sum() - 1.0) < 1e-10);
}
