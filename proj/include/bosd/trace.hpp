#pragma once

#include <Eigen/Dense>
#include <vector>

#include "bosd/bosd_filter.hpp"
#include "bosd/learning.hpp"

namespace bosd {

/// One exported filtering step: CDFs are evaluated on a fixed index grid so
/// that traces stay bounded for large maximum durations.
struct TraceRow {
  int t = 0;  // 1-based observation index
  int map_state = 0;
  double log_evidence = 0.0;
  Eigen::VectorXd state_marginal;
  Eigen::VectorXd run_length_cdf;
  Eigen::VectorXd residual_cdf;
};

struct PosteriorTrace {
  std::vector<int> grid;  // run-length / residual indices the CDF columns sit on
  int num_states = 0;
  std::vector<TraceRow> rows;
};

/// Full resolution up to `max_cols` points, strided above, always keeping
/// index 0 and d_max - 1 so the final CDF column ends at 1.
std::vector<int> cdf_grid(int d_max, int max_cols = 256);

TraceRow make_trace_row(int t, const StepMarginals& step, const std::vector<int>& grid);

/// Classification quality of a MAP state sequence against expanded labels.
struct MetricsReport {
  Eigen::MatrixXd confusion;  // rows: truth, cols: prediction
  Eigen::VectorXd precision;
  Eigen::VectorXd recall;
  Eigen::VectorXd f1;
  Eigen::VectorXd support;
  double macro_precision = 0.0, macro_recall = 0.0, macro_f1 = 0.0;
  double weighted_precision = 0.0, weighted_recall = 0.0, weighted_f1 = 0.0;
};

MetricsReport eval_metrics(const std::vector<int>& predicted, const std::vector<int>& truth,
                           int num_states);

/// Per-step state sequence implied by a labeled segmentation.
std::vector<int> expand_labels(const SegmentLabels& labels, int t_len);

}  // namespace bosd
