#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "bosd/bosd_filter.hpp"
#include "bosd/learning.hpp"
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

TrainSequence make_sequence(const std::vector<LabeledSegment>& segments, double fill = 0.0) {
  TrainSequence seq;
  int t_len = 0;
  for (const auto& s : segments) t_len += s.duration;
  seq.y = Eigen::MatrixXd::Constant(t_len, 1, fill);
  seq.labels.segments = segments;
  return seq;
}

}  // namespace

TEST_CASE("counts follow the segment structure exactly") {
  const TrainSequence seq = make_sequence({{0, 1, 2}, {1, 3, 3}});
  LearnConfig config;
  config.smoothing_alpha = 0.0;
  config.fit_upm = false;
  const FitReport report = fit_supervised({seq}, fixed_gaussians({0.0, 1.0}), 4, config);
  CHECK(report.params.pi[0] == doctest::Approx(1.0));
  CHECK(report.params.pi[1] == doctest::Approx(0.0));
  CHECK(report.d_counts(0, 1) == 1.0);  // state 0, duration 2
  CHECK(report.d_counts(1, 2) == 1.0);  // state 1, duration 3
  CHECK(report.a_counts(0, 1) == 1.0);
  CHECK(report.params.a(0, 1) == doctest::Approx(1.0));
  CHECK(report.params.d(0, 1) == doctest::Approx(1.0));
  CHECK(report.params.d(1, 2) == doctest::Approx(1.0));
}

TEST_CASE("two sequences starting in different states split pi") {
  const TrainSequence seq0 = make_sequence({{0, 1, 2}, {1, 3, 2}});
  const TrainSequence seq1 = make_sequence({{1, 1, 2}, {0, 3, 2}});
  LearnConfig config;
  config.smoothing_alpha = 0.0;
  config.fit_upm = false;
  const FitReport report = fit_supervised({seq0, seq1}, fixed_gaussians({0.0, 1.0}), 4, config);
  CHECK(report.params.pi[0] == doctest::Approx(0.5));
  CHECK(report.params.pi[1] == doctest::Approx(0.5));
}

TEST_CASE("smoothing-only rows are uniform") {
  // state 1 never appears: with alpha > 0 its rows carry the prior only
  const TrainSequence seq = make_sequence({{0, 1, 2}, {0, 3, 2}});
  LearnConfig config;
  config.smoothing_alpha = 1.0;
  config.fit_upm = false;
  const FitReport report = fit_supervised({seq}, fixed_gaussians({0.0, 1.0}), 3, config);
  for (int d = 0; d < 3; ++d) CHECK(report.params.d(1, d) == doctest::Approx(1.0 / 3.0));
  for (int j = 0; j < 2; ++j) CHECK(report.params.a(1, j) == doctest::Approx(0.5));
  CHECK(validate(report.params).ok());
}

TEST_CASE("a never-observed state with zero smoothing is an error naming it") {
  const TrainSequence seq = make_sequence({{0, 1, 2}, {0, 3, 2}});
  LearnConfig config;
  config.smoothing_alpha = 0.0;
  config.fit_upm = false;
  CHECK_THROWS_WITH_AS(fit_supervised({seq}, fixed_gaussians({0.0, 1.0}), 3, config),
                       doctest::Contains("state 1"), std::invalid_argument);
}

TEST_CASE("labels that do not tile the sequence are rejected with a location") {
  TrainSequence seq = make_sequence({{0, 1, 2}, {1, 3, 2}});
  seq.labels.segments[1].start = 4;  // gap
  LearnConfig config;
  config.fit_upm = false;
  CHECK_THROWS_WITH_AS(fit_supervised({seq}, fixed_gaussians({0.0, 1.0}), 4, config),
                       doctest::Contains("segment 1"), std::invalid_argument);
}

TEST_CASE("durations beyond the model bound are rejected with a location") {
  const TrainSequence seq = make_sequence({{0, 1, 6}});
  LearnConfig config;
  config.fit_upm = false;
  CHECK_THROWS_WITH_AS(fit_supervised({seq}, fixed_gaussians({0.0, 1.0}), 4, config),
                       doctest::Contains("duration 6"), std::invalid_argument);
}

TEST_CASE("count conservation across sequences") {
  std::mt19937_64 rng(5);
  HsmmParams truth;
  truth.pi = Eigen::Vector2d(0.5, 0.5);
  truth.a = Eigen::MatrixXd(2, 2);
  truth.a << 0.0, 1.0, 1.0, 0.0;
  truth.d = Eigen::MatrixXd(2, 4);
  truth.d << 0.1, 0.4, 0.3, 0.2, 0.25, 0.25, 0.25, 0.25;
  truth.upm = fixed_gaussians({-1.0, 1.0});
  std::vector<TrainSequence> sequences;
  int total_segments = 0;
  for (int s = 0; s < 20; ++s) {
    const SampledSequence draw = sample(truth, 40, 1000 + s);
    sequences.push_back(TrainSequence{draw.y, draw.labels});
    total_segments += static_cast<int>(draw.labels.segments.size());
  }
  LearnConfig config;
  config.smoothing_alpha = 0.0;
  config.fit_upm = false;
  const FitReport report = fit_supervised(sequences, truth.upm, 4, config);
  int truncated = 0;
  for (const auto& seq : sequences) truncated += seq.labels.final_truncated ? 1 : 0;
  CHECK(report.d_counts.sum() == doctest::Approx(total_segments - truncated));
  CHECK(report.a_counts.sum() == doctest::Approx(total_segments - 20));
  CHECK(report.pi_counts.sum() == doctest::Approx(20));
}

TEST_CASE("estimator recovery from sampled sequences") {
  HsmmParams truth;
  truth.pi = Eigen::Vector2d(0.7, 0.3);
  truth.a = Eigen::MatrixXd(2, 2);
  truth.a << 0.0, 1.0, 1.0, 0.0;
  truth.d = Eigen::MatrixXd(2, 6);
  truth.d << 0.0, 0.3, 0.4, 0.2, 0.1, 0.0, 0.0, 0.0, 0.2, 0.3, 0.3, 0.2;
  truth.upm = fixed_gaussians({-2.0, 2.0}, 0.25);
  std::vector<TrainSequence> sequences;
  for (int s = 0; s < 100; ++s) {
    const SampledSequence draw = sample(truth, 120, 42 + s);
    sequences.push_back(TrainSequence{draw.y, draw.labels});
  }
  LearnConfig config;
  config.smoothing_alpha = 0.0;
  const FitReport report = fit_supervised(sequences, truth.upm, 6, config);
  CHECK((report.params.a - truth.a).cwiseAbs().maxCoeff() <= 0.05);
  CHECK((report.params.d - truth.d).cwiseAbs().maxCoeff() <= 0.05);
  CHECK((report.params.pi - truth.pi).cwiseAbs().maxCoeff() <= 0.1);  // only 100 draws feed pi
  const auto& fitted = std::get<GaussianUpmConfig>(report.params.upm);
  CHECK(std::abs(fitted.states[0].mu[0] + 2.0) < 0.05);
  CHECK(std::abs(fitted.states[1].mu[0] - 2.0) < 0.05);
}

TEST_CASE("complete-data log likelihood is maximized at the fitted counts") {
  std::mt19937_64 rng(9);
  HsmmParams truth;
  truth.pi = Eigen::Vector2d(0.6, 0.4);
  truth.a = Eigen::MatrixXd(2, 2);
  truth.a << 0.2, 0.8, 0.7, 0.3;
  truth.d = Eigen::MatrixXd(2, 4);
  truth.d << 0.1, 0.2, 0.3, 0.4, 0.4, 0.3, 0.2, 0.1;
  truth.upm = fixed_gaussians({-1.0, 1.0});
  std::vector<TrainSequence> sequences;
  for (int s = 0; s < 12; ++s) {
    SampledSequence draw = sample(truth, 37, 7 + s);
    // keep the optimality probe exact: drop censored tails by re-labeling the
    // final segment as complete (its observed duration is what we count)
    draw.labels.final_truncated = false;
    sequences.push_back(TrainSequence{draw.y, draw.labels});
  }
  LearnConfig config;
  config.smoothing_alpha = 0.0;
  config.fit_upm = false;
  FitReport report = fit_supervised(sequences, truth.upm, 4, config);
  const double best = complete_data_loglik(report.params, sequences);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    HsmmParams perturbed = report.params;
    for (int z = 0; z < 2; ++z) {
      for (int j = 0; j < 2; ++j) perturbed.a(z, j) = std::max(perturbed.a(z, j) + 0.2 * (unif(rng) - 0.5), 1e-4);
      perturbed.a.row(z) /= perturbed.a.row(z).sum();
      for (int d = 0; d < 4; ++d) perturbed.d(z, d) = std::max(perturbed.d(z, d) + 0.2 * (unif(rng) - 0.5), 1e-4);
      perturbed.d.row(z) /= perturbed.d.row(z).sum();
      perturbed.pi[z] = std::max(perturbed.pi[z] + 0.2 * (unif(rng) - 0.5), 1e-4);
    }
    perturbed.pi /= perturbed.pi.sum();
    CHECK(complete_data_loglik(perturbed, sequences) <= best + 1e-9);
  }
}

TEST_CASE("single deterministic segment reduces to the emission log likelihood") {
  HsmmParams params;
  params.pi = Eigen::VectorXd::Ones(1);
  params.a = Eigen::MatrixXd::Ones(1, 1);
  params.d = Eigen::MatrixXd::Zero(1, 3);
  params.d(0, 2) = 1.0;
  params.upm = fixed_gaussians({0.5});
  const auto upm = make_upm(params.upm);
  TrainSequence seq;
  seq.y = Eigen::MatrixXd::Zero(3, 1);
  seq.y << 0.1, 0.9, 0.4;
  seq.labels.segments = {{0, 1, 3}};
  double emission = 0.0;
  for (int r = 0; r < 3; ++r)
    emission += upm->log_predictive(seq.y.row(r).transpose(), r, 3, 0, UpmState());
  CHECK(complete_data_loglik(params, {seq}) == doctest::Approx(emission).epsilon(1e-12));
}

TEST_CASE("loglik matches the filter evidence when only one segmentation is possible") {
  HsmmParams params;
  params.pi = Eigen::Vector2d(1.0, 0.0);
  params.a = Eigen::MatrixXd(2, 2);
  params.a << 0.0, 1.0, 1.0, 0.0;
  params.d = Eigen::MatrixXd::Zero(2, 3);
  params.d(0, 1) = 1.0;  // state 0 always lasts 2
  params.d(1, 2) = 1.0;  // state 1 always lasts 3
  params.upm = fixed_gaussians({-1.0, 1.0});
  TrainSequence seq;
  seq.y = Eigen::MatrixXd::Zero(10, 1);
  seq.y << -0.9, -1.2, 1.1, 0.8, 1.3, -1.0, -0.7, 0.9, 1.2, 1.1;
  seq.labels.segments = {{0, 1, 2}, {1, 3, 3}, {0, 6, 2}, {1, 8, 3}};
  BosdFilter filter(params);
  for (int t = 0; t < 10; ++t) filter.step(seq.y.row(t).transpose());
  CHECK(complete_data_loglik(params, {seq}) ==
        doctest::Approx(filter.cumulative_log_evidence()).epsilon(1e-10));
}

TEST_CASE("censored final segments marginalize over the unseen duration") {
  // point-mass structure except the final state, whose duration row has two
  // candidates; the filter's evidence must equal the censored labeled loglik
  HsmmParams params;
  params.pi = Eigen::Vector2d(1.0, 0.0);
  params.a = Eigen::MatrixXd(2, 2);
  params.a << 0.0, 1.0, 1.0, 0.0;
  params.d = Eigen::MatrixXd::Zero(2, 8);
  params.d(0, 2) = 1.0;             // state 0 always lasts 3
  params.d(1, 5) = 0.4;             // state 1 lasts 6 or 8
  params.d(1, 7) = 0.6;
  params.upm = fixed_gaussians({-1.0, 1.0});
  TrainSequence seq;
  seq.y = Eigen::MatrixXd::Zero(7, 1);
  seq.y << -0.9, -1.2, -1.1, 1.1, 0.8, 1.3, 0.9;  // state 1 observed 4 of 6-or-8 steps
  seq.labels.segments = {{0, 1, 3}, {1, 4, 4}};
  seq.labels.final_truncated = true;
  BosdFilter filter(params);
  for (int t = 0; t < 7; ++t) filter.step(seq.y.row(t).transpose());
  CHECK(complete_data_loglik(params, {seq}) ==
        doctest::Approx(filter.cumulative_log_evidence()).epsilon(1e-10));
}

TEST_CASE("zero-probability events are reported with their locations") {
  HsmmParams params;
  params.pi = Eigen::Vector2d(1.0, 0.0);
  params.a = Eigen::MatrixXd(2, 2);
  params.a << 0.0, 1.0, 1.0, 0.0;
  params.d = Eigen::MatrixXd::Constant(2, 2, 0.5);
  params.upm = fixed_gaussians({0.0, 1.0});
  TrainSequence seq;
  seq.y = Eigen::MatrixXd::Zero(4, 1);
  seq.labels.segments = {{1, 1, 2}, {0, 3, 2}};  // pi forbids starting in state 1
  std::vector<std::string> locations;
  const double ll = complete_data_loglik(params, {seq}, &locations);
  CHECK(ll == kNegInf);
  REQUIRE(!locations.empty());
  CHECK(locations.front().find("segment 0") != std::string::npos);
}
