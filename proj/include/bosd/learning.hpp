#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "bosd/model.hpp"
#include "bosd/upm.hpp"

namespace bosd {

/// One labeled segment: hidden state, 1-based start step, duration.
struct LabeledSegment {
  int state = 0;
  int start = 1;
  int duration = 1;
};

/// A labeled segmentation of one sequence. Segments must tile [1, T] in
/// order with no gaps or overlaps. `final_truncated` marks a last segment
/// cut off by the end of the recording; its duration is then censored and
/// excluded from duration counts and duration-dependent emission fitting.
struct SegmentLabels {
  std::vector<LabeledSegment> segments;
  bool final_truncated = false;
};

struct TrainSequence {
  Eigen::MatrixXd y;  // T x M
  SegmentLabels labels;
};

struct LearnConfig {
  double smoothing_alpha = 1e-3;  // additive count smoothing on pi, A, D
  bool fit_upm = true;            // delegate emission fitting to the UPM
};

struct FitReport {
  HsmmParams params;
  Eigen::VectorXd pi_counts;
  Eigen::MatrixXd a_counts;
  Eigen::MatrixXd d_counts;
  double smoothing_alpha = 0.0;
  std::vector<std::string> warnings;
};

/// Throws std::invalid_argument naming the first offending segment if the
/// labels do not tile [1, T] or exceed the model bounds.
void check_labels(const SegmentLabels& labels, int t_len, int num_states, int max_duration,
                  const std::string& where);

/// Supervised maximum-likelihood fit of pi, A, D by segment counting, plus
/// per-state emission parameters via fit_upm_mle. First segments feed pi but
/// not A; adjacent pairs feed A; completed segments feed D.
FitReport fit_supervised(const std::vector<TrainSequence>& sequences,
                         const UpmConfig& upm_prototype, int max_duration,
                         const LearnConfig& config);

/// log p(Y, S) = log p(S) + log p(Y | S) for a labeled segmentation under
/// the given parameters. A censored final segment contributes its duration
/// survival mass, marginalizing the emission block over d >= observed length.
/// Cells hit with probability zero are reported through `neg_inf_locations`.
double complete_data_loglik(const HsmmParams& params,
                            const std::vector<TrainSequence>& sequences,
                            std::vector<std::string>* neg_inf_locations = nullptr);

}  // namespace bosd
