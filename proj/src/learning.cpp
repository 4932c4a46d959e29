#include "bosd/learning.hpp"

#include <cmath>
#include <sstream>

#include "bosd/log.hpp"
#include "bosd/numerics.hpp"

namespace bosd {

void check_labels(const SegmentLabels& labels, int t_len, int num_states, int max_duration,
                  const std::string& where) {
  if (labels.segments.empty())
    throw std::invalid_argument(where + ": no segments");
  int expect_start = 1;
  for (std::size_t i = 0; i < labels.segments.size(); ++i) {
    const auto& seg = labels.segments[i];
    std::ostringstream loc;
    loc << where << ", segment " << i;
    if (seg.state < 0 || seg.state >= num_states)
      throw std::invalid_argument(loc.str() + ": state " + std::to_string(seg.state) +
                                  " out of range [0, " + std::to_string(num_states) + ")");
    if (seg.duration < 1 || seg.duration > max_duration)
      throw std::invalid_argument(loc.str() + ": duration " + std::to_string(seg.duration) +
                                  " outside [1, " + std::to_string(max_duration) + "]");
    if (seg.start != expect_start)
      throw std::invalid_argument(loc.str() + ": starts at " + std::to_string(seg.start) +
                                  ", expected " + std::to_string(expect_start) +
                                  " (labels must tile the sequence)");
    expect_start += seg.duration;
  }
  if (expect_start != t_len + 1)
    throw std::invalid_argument(where + ": segments cover [1, " + std::to_string(expect_start - 1) +
                                "], sequence has T=" + std::to_string(t_len));
}

FitReport fit_supervised(const std::vector<TrainSequence>& sequences,
                         const UpmConfig& upm_prototype, int max_duration,
                         const LearnConfig& config) {
  if (sequences.empty()) throw std::invalid_argument("fit_supervised: no sequences");
  if (config.smoothing_alpha < 0.0)
    throw std::invalid_argument("fit_supervised: smoothing_alpha must be >= 0");
  const int k = upm_num_states(upm_prototype);
  FitReport report;
  report.smoothing_alpha = config.smoothing_alpha;
  report.pi_counts = Eigen::VectorXd::Zero(k);
  report.a_counts = Eigen::MatrixXd::Zero(k, k);
  report.d_counts = Eigen::MatrixXd::Zero(k, max_duration);

  std::vector<TrainingSegment> upm_segments;
  std::vector<bool> state_seen(k, false);
  for (std::size_t s = 0; s < sequences.size(); ++s) {
    const auto& seq = sequences[s];
    const std::string where = "sequence " + std::to_string(s);
    check_labels(seq.labels, static_cast<int>(seq.y.rows()), k, max_duration, where);
    const auto& segs = seq.labels.segments;
    for (std::size_t i = 0; i < segs.size(); ++i) {
      const auto& seg = segs[i];
      state_seen[seg.state] = true;
      const bool censored = seq.labels.final_truncated && i + 1 == segs.size();
      if (i == 0) report.pi_counts[seg.state] += 1.0;
      if (i > 0) report.a_counts(segs[i - 1].state, seg.state) += 1.0;
      if (!censored) report.d_counts(seg.state, seg.duration - 1) += 1.0;
      const bool usable_for_upm = !censored || !upm_duration_dependent(upm_prototype);
      if (config.fit_upm && usable_for_upm)
        upm_segments.push_back(
            TrainingSegment{seg.state, seq.y.middleRows(seg.start - 1, seg.duration)});
    }
  }

  if (config.smoothing_alpha == 0.0)
    for (int z = 0; z < k; ++z)
      if (!state_seen[z])
        throw std::invalid_argument("fit_supervised: state " + std::to_string(z) +
                                    " never observed and smoothing is 0");

  const double alpha = config.smoothing_alpha;
  HsmmParams params;
  params.pi = (report.pi_counts.array() + alpha).matrix();
  params.pi /= params.pi.sum();
  params.a = (report.a_counts.array() + alpha).matrix();
  params.d = (report.d_counts.array() + alpha).matrix();
  for (int z = 0; z < k; ++z) {
    double a_row = params.a.row(z).sum();
    if (a_row == 0.0) {
      report.warnings.push_back("state " + std::to_string(z) +
                                ": no outgoing transitions observed, using a uniform row");
      params.a.row(z).setConstant(1.0 / k);
    } else {
      params.a.row(z) /= a_row;
    }
    double d_row = params.d.row(z).sum();
    if (d_row == 0.0) {
      report.warnings.push_back("state " + std::to_string(z) +
                                ": no completed segments observed, using a uniform duration row");
      params.d.row(z).setConstant(1.0 / max_duration);
    } else {
      params.d.row(z) /= d_row;
    }
  }

  params.upm = upm_prototype;
  if (config.fit_upm) params.upm = fit_upm_mle(upm_prototype, upm_segments, &report.warnings);
  report.params = std::move(params);

  const ValidationReport check = validate(report.params);
  for (const auto& e : check.errors)
    report.warnings.push_back("fitted model failed validation: " + e);
  return report;
}

namespace {

/// Marginal log-likelihood of a (possibly censored) segment block: for a
/// completed segment this is log D_{z,d} + log p(block | z, d); a censored
/// block of length m is summed over duration hypotheses d >= m.
double segment_term(const HsmmParams& params, const Upm& upm, const Eigen::MatrixXd& block,
                    int z, bool censored, std::vector<std::string>* neg_inf_locations,
                    const std::string& where) {
  const int m = static_cast<int>(block.rows());
  const int d_max = params.max_duration();
  const auto block_loglik = [&](int d) {
    UpmState s = upm.reset(z, d);
    double acc = 0.0;
    for (int r = 0; r < m; ++r) {
      const Eigen::VectorXd y = block.row(r).transpose();
      acc += upm.log_predictive(y, r, d, z, s);
      if (r + 1 < m) s = upm.update(s, y);
    }
    return acc;
  };
  double out;
  if (!censored) {
    out = log_or_neg_inf(params.d(z, m - 1)) + block_loglik(m);
  } else {
    out = kNegInf;
    for (int d = m; d <= d_max; ++d) {
      const double pd = params.d(z, d - 1);
      if (pd <= 0.0) continue;
      out = log_add(out, std::log(pd) + block_loglik(d));
    }
  }
  if (out == kNegInf && neg_inf_locations != nullptr)
    neg_inf_locations->push_back(where + ": zero-probability segment (state " +
                                 std::to_string(z) + ", length " + std::to_string(m) + ")");
  return out;
}

}  // namespace

double complete_data_loglik(const HsmmParams& params,
                            const std::vector<TrainSequence>& sequences,
                            std::vector<std::string>* neg_inf_locations) {
  const auto upm = make_upm(params.upm);
  double total = 0.0;
  for (std::size_t s = 0; s < sequences.size(); ++s) {
    const auto& seq = sequences[s];
    const std::string where = "sequence " + std::to_string(s);
    check_labels(seq.labels, static_cast<int>(seq.y.rows()), params.num_states(),
                 params.max_duration(), where);
    const auto& segs = seq.labels.segments;
    for (std::size_t i = 0; i < segs.size(); ++i) {
      const auto& seg = segs[i];
      const bool censored = seq.labels.final_truncated && i + 1 == segs.size();
      double structural;
      std::string which;
      if (i == 0) {
        structural = log_or_neg_inf(params.pi[seg.state]);
        which = "pi";
      } else {
        structural = log_or_neg_inf(params.a(segs[i - 1].state, seg.state));
        which = "transition";
      }
      if (structural == kNegInf && neg_inf_locations != nullptr)
        neg_inf_locations->push_back(where + ", segment " + std::to_string(i) +
                                     ": zero-probability " + which);
      total += structural;
      total += segment_term(params, *upm, seq.y.middleRows(seg.start - 1, seg.duration),
                            seg.state, censored, neg_inf_locations,
                            where + ", segment " + std::to_string(i));
    }
  }
  return total;
}

}  // namespace bosd
