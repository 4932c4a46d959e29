#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "bosd/bosd_filter.hpp"
#include "bosd/learning.hpp"
#include "bosd/model.hpp"

namespace bosd {

/// A draw from the generative model together with its ground truth. The
/// per-step arrays follow the labels: for a final segment cut off at T the
/// recorded duration/residual use the truncated length.
struct SampledSequence {
  Eigen::MatrixXd y;  // T x M
  SegmentLabels labels;
  std::vector<int> run_length;  // per step
  std::vector<int> duration;
  std::vector<int> state;
  std::vector<int> residual;
  std::uint64_t seed = 0;
};

/// Deterministic per seed: states via pi/A, durations via D, emissions via
/// the configured observation model. A sampled duration overrunning T is
/// truncated and flagged (emissions still use the true duration).
SampledSequence sample(const HsmmParams& params, int t_len, std::uint64_t seed);

/// Exact posterior over (r_t, d_t, z_t) at each prefix length, computed by
/// explicit summation over every labeled segmentation; the independent
/// ground truth the filters are tested against.
struct EnumerationResult {
  std::vector<JointPosterior> per_step;      // posterior after t observations
  std::vector<double> log_evidence;          // log p(y_t | Y_{1:t-1})
  double log_marginal_likelihood = 0.0;      // log p(Y_{1:T})
};

/// Refuses instances beyond T <= 10, K <= 3, D_max <= 5.
EnumerationResult enumerate_posterior(const HsmmParams& params, const Eigen::MatrixXd& y);

/// Four-state planar-sine replica: sampled trajectory plus the filtered
/// posterior under the true parameters.
struct SyntheticBenchmarkConfig {
  int t_len = 800;
  double sigma2 = 0.01;
  int d_max = 36;
};

struct SyntheticBenchmarkResult {
  HsmmParams params;
  SampledSequence sequence;
  std::vector<StepMarginals> steps;
};

HsmmParams synthetic_model(const SyntheticBenchmarkConfig& config);
SyntheticBenchmarkResult synthetic_benchmark(const SyntheticBenchmarkConfig& config,
                                             std::uint64_t seed);

}  // namespace bosd
