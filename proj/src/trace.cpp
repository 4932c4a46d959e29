#include "bosd/trace.hpp"

#include <cmath>

#include "bosd/numerics.hpp"
#include "bosd/residual.hpp"

namespace bosd {

std::vector<int> cdf_grid(int d_max, int max_cols) {
  std::vector<int> grid;
  if (d_max <= max_cols) {
    grid.reserve(d_max);
    for (int i = 0; i < d_max; ++i) grid.push_back(i);
    return grid;
  }
  const int stride = (d_max - 1 + max_cols - 2) / (max_cols - 1);  // ceil((d_max-1)/(max_cols-1))
  for (int i = 0; i < d_max - 1; i += stride) grid.push_back(i);
  grid.push_back(d_max - 1);
  return grid;
}

namespace {

Eigen::VectorXd cdf_on_grid(const Eigen::VectorXd& log_pmf, const std::vector<int>& grid) {
  const Eigen::VectorXd full = cdf_from_log_pmf(log_pmf);
  Eigen::VectorXd out(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t i = 0; i < grid.size(); ++i) out[static_cast<Eigen::Index>(i)] = full[grid[i]];
  return out;
}

}  // namespace

TraceRow make_trace_row(int t, const StepMarginals& step, const std::vector<int>& grid) {
  TraceRow row;
  row.t = t;
  row.map_state = step.map_state;
  row.log_evidence = step.log_evidence;
  row.state_marginal = exp_mass(step.log_state);
  row.run_length_cdf = cdf_on_grid(step.log_run_length, grid);
  row.residual_cdf = cdf_on_grid(step.log_residual, grid);
  return row;
}

MetricsReport eval_metrics(const std::vector<int>& predicted, const std::vector<int>& truth,
                           int num_states) {
  if (predicted.size() != truth.size())
    throw std::invalid_argument("eval_metrics: prediction and truth lengths differ (" +
                                std::to_string(predicted.size()) + " vs " +
                                std::to_string(truth.size()) + ")");
  if (predicted.empty()) throw std::invalid_argument("eval_metrics: empty input");
  MetricsReport report;
  report.confusion = Eigen::MatrixXd::Zero(num_states, num_states);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] < 0 || truth[i] >= num_states || predicted[i] < 0 || predicted[i] >= num_states)
      throw std::invalid_argument("eval_metrics: state out of range at step " + std::to_string(i));
    report.confusion(truth[i], predicted[i]) += 1.0;
  }
  report.precision.resize(num_states);
  report.recall.resize(num_states);
  report.f1.resize(num_states);
  report.support.resize(num_states);
  const double total = static_cast<double>(truth.size());
  for (int z = 0; z < num_states; ++z) {
    const double tp = report.confusion(z, z);
    const double pred_total = report.confusion.col(z).sum();
    const double true_total = report.confusion.row(z).sum();
    report.precision[z] = pred_total > 0.0 ? tp / pred_total : 0.0;
    report.recall[z] = true_total > 0.0 ? tp / true_total : 0.0;
    const double pr = report.precision[z] + report.recall[z];
    report.f1[z] = pr > 0.0 ? 2.0 * report.precision[z] * report.recall[z] / pr : 0.0;
    report.support[z] = true_total;
    report.macro_precision += report.precision[z] / num_states;
    report.macro_recall += report.recall[z] / num_states;
    report.macro_f1 += report.f1[z] / num_states;
    report.weighted_precision += report.precision[z] * true_total / total;
    report.weighted_recall += report.recall[z] * true_total / total;
    report.weighted_f1 += report.f1[z] * true_total / total;
  }
  return report;
}

std::vector<int> expand_labels(const SegmentLabels& labels, int t_len) {
  std::vector<int> out(t_len, -1);
  for (const auto& seg : labels.segments)
    for (int i = 0; i < seg.duration; ++i) {
      const int t = seg.start - 1 + i;
      if (t < 0 || t >= t_len)
        throw std::invalid_argument("expand_labels: segment exceeds sequence length");
      out[t] = seg.state;
    }
  for (int t = 0; t < t_len; ++t)
    if (out[t] < 0)
      throw std::invalid_argument("expand_labels: step " + std::to_string(t + 1) + " unlabeled");
  return out;
}

}  // namespace bosd
