#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "bosd/learning.hpp"
#include "bosd/model.hpp"
#include "bosd/trace.hpp"

namespace bosd::io {

/// Canonical model document: fixed field order (`k`, `d_max`, `pi`, `a`,
/// `d`, `upm`), doubles printed with 17 significant digits, so load/save
/// round-trips byte-identically.
std::string model_to_json(const HsmmParams& params);
HsmmParams model_from_json(const std::string& text);
void save_model(const HsmmParams& params, const std::string& path);
HsmmParams load_model(const std::string& path);

/// Sequence CSV: header `t,y_1,...,y_M`, t running 1..T.
void write_sequence_csv(const std::string& path, const Eigen::MatrixXd& y);
Eigen::MatrixXd read_sequence_csv(const std::string& path);

/// Labels CSV: header `seq_id,state,start,duration` (1-based start).
void write_labels_csv(const std::string& path,
                      const std::map<int, SegmentLabels>& labels_by_sequence);
std::map<int, SegmentLabels> read_labels_csv(const std::string& path);

/// Trace CSV: self-describing header
/// `t,map_state,log_evidence,state_<z>...,rl_cdf_<g>...,res_cdf_<g>...`.
void write_trace_header(std::ostream& os, int num_states, const std::vector<int>& grid);
void write_trace_row(std::ostream& os, const TraceRow& row);
void write_trace_csv(const std::string& path, const PosteriorTrace& trace);
PosteriorTrace read_trace_csv(const std::string& path);

std::string metrics_to_json(const MetricsReport& report, const std::vector<std::string>& names);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

/// %.17g, the fixed float format used across all exported files.
std::string format_double(double v);

/// strtod without the out_of_range throw std::stod makes on subnormals.
double parse_double(const std::string& field);

}  // namespace bosd::io
