#include "bosd/sampler.hpp"

#include <cmath>

#include "bosd/numerics.hpp"
#include "bosd/rng.hpp"

namespace bosd {

SampledSequence sample(const HsmmParams& params, int t_len, std::uint64_t seed) {
  const ValidationReport report = validate(params);
  if (!report.ok()) throw std::invalid_argument("sample: invalid model: " + report.errors.front());
  if (t_len < 1) throw std::invalid_argument("sample: t_len must be >= 1");
  Rng rng(seed);
  const auto upm = make_upm(params.upm);

  SampledSequence out;
  out.seed = seed;
  out.y.resize(t_len, upm->dim());
  out.run_length.resize(t_len);
  out.duration.resize(t_len);
  out.state.resize(t_len);
  out.residual.resize(t_len);

  int t = 0;  // 0-based write position
  int z = rng.discrete(params.pi);
  while (t < t_len) {
    const int d = rng.discrete(params.d.row(z).transpose()) + 1;
    const Eigen::MatrixXd block = upm->sample_segment(z, d, rng);
    const int emitted = std::min(d, t_len - t);
    const bool truncated = emitted < d;
    out.y.middleRows(t, emitted) = block.topRows(emitted);
    for (int r = 0; r < emitted; ++r) {
      out.run_length[t + r] = r;
      out.duration[t + r] = emitted;  // labels record the observed length
      out.state[t + r] = z;
      out.residual[t + r] = emitted - 1 - r;
    }
    out.labels.segments.push_back(LabeledSegment{z, t + 1, emitted});
    out.labels.final_truncated = truncated;
    t += emitted;
    if (t < t_len) z = rng.discrete(params.a.row(z).transpose());
  }
  return out;
}

EnumerationResult enumerate_posterior(const HsmmParams& params, const Eigen::MatrixXd& y) {
  const int t_len = static_cast<int>(y.rows());
  const int k = params.num_states();
  const int d_max = params.max_duration();
  if (t_len > 10 || k > 3 || d_max > 5)
    throw std::invalid_argument(
        "enumerate_posterior: instance too large (limits: T<=10, K<=3, D_max<=5)");
  const ValidationReport report = validate(params);
  if (!report.ok())
    throw std::invalid_argument("enumerate_posterior: invalid model: " + report.errors.front());
  const auto upm = make_upm(params.upm);

  // log-likelihood of a block of m observations starting at `start`
  // (0-based), under a duration-d segment of state z
  const auto block_loglik = [&](int start, int m, int d, int z) {
    UpmState s = upm->reset(z, d);
    double acc = 0.0;
    for (int r = 0; r < m; ++r) {
      const Eigen::VectorXd obs = y.row(start + r).transpose();
      acc += upm->log_predictive(obs, r, d, z, s);
      if (r + 1 < m) s = upm->update(s, obs);
    }
    return acc;
  };

  EnumerationResult out;
  for (int t = 1; t <= t_len; ++t) {
    JointPosterior table(k, d_max);
    // DFS over labeled segmentations of the prefix [1, t]; the final segment
    // may be partial, carrying a duration hypothesis d >= its emitted length
    const auto dfs = [&](auto&& self, int pos, int prev_state, double log_w) -> void {
      for (int z = 0; z < k; ++z) {
        const double trans = pos == 0 ? log_or_neg_inf(params.pi[z])
                                      : log_or_neg_inf(params.a(prev_state, z));
        if (trans == kNegInf) continue;
        for (int d = 1; d <= d_max; ++d) {
          const double dur = log_or_neg_inf(params.d(z, d - 1));
          if (dur == kNegInf) continue;
          const int remaining = t - pos;
          const int m = std::min(d, remaining);
          const double w = log_w + trans + dur + block_loglik(pos, m, d, z);
          if (d < remaining) {
            self(self, pos + d, z, w);
          } else {
            // the segment reaches (or passes) the prefix end: it is the
            // hypothesis active at time t with r = m - 1
            double& cell = table.at(z, d, m - 1);
            cell = log_add(cell, w);
          }
        }
      }
    };
    dfs(dfs, 0, -1, 0.0);
    const double log_z = log_sum_exp(table.log_mass());
    table.log_mass().array() -= log_z;
    out.per_step.push_back(std::move(table));
    out.log_evidence.push_back(log_z - out.log_marginal_likelihood);
    out.log_marginal_likelihood = log_z;
  }
  return out;
}

HsmmParams synthetic_model(const SyntheticBenchmarkConfig& config) {
  // four planar-sine states with distinct amplitude directions and
  // non-overlapping duration ranges; values pinned for reproducibility
  constexpr int k = 4;
  HsmmParams params;
  params.pi = Eigen::VectorXd::Constant(k, 1.0 / k);
  params.a = Eigen::MatrixXd::Zero(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j)
      if (i != j) params.a(i, j) = 1.0 / (k - 1);
  params.d = Eigen::MatrixXd::Zero(k, config.d_max);
  for (int z = 0; z < k; ++z) {
    const int lo = 8 + 5 * z;
    const int hi = std::min(lo + 7, config.d_max);
    if (lo > config.d_max)
      throw std::invalid_argument("synthetic_model: d_max too small for four states");
    for (int d = lo; d <= hi; ++d) params.d(z, d - 1) = 1.0;
    params.d.row(z) /= params.d.row(z).sum();
  }
  SineUpmConfig upm;
  upm.states = {SineStateParams{1.0, 2.0, config.sigma2},
                SineStateParams{-1.5, 1.0, config.sigma2},
                SineStateParams{2.5, -0.5, config.sigma2},
                SineStateParams{-2.0, -2.0, config.sigma2}};
  params.upm = upm;
  return params;
}

SyntheticBenchmarkResult synthetic_benchmark(const SyntheticBenchmarkConfig& config,
                                             std::uint64_t seed) {
  SyntheticBenchmarkResult out;
  out.params = synthetic_model(config);
  out.sequence = sample(out.params, config.t_len, seed);
  BosdFilter filter(out.params);
  out.steps.reserve(config.t_len);
  for (int t = 0; t < config.t_len; ++t)
    out.steps.push_back(filter.step(out.sequence.y.row(t).transpose()));
  return out;
}

}  // namespace bosd
