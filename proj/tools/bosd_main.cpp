#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>

#include "bosd/bocpd.hpp"
#include "bosd/bosd_filter.hpp"
#include "bosd/io.hpp"
#include "bosd/learning.hpp"
#include "bosd/log.hpp"
#include "bosd/numerics.hpp"
#include "bosd/residual.hpp"
#include "bosd/sampler.hpp"
#include "bosd/trace.hpp"

namespace {

using nlohmann::json;

struct CliConfig {
  bosd::HsmmParams model;
  bool has_model = false;
  int t_len = 500;
  std::uint64_t seed = 0;
  double smoothing_alpha = 1e-3;
  bool fit_upm = true;
  bool final_truncated = false;
  int trace_max_cols = 256;
  // feature extraction
  std::vector<std::pair<double, double>> bands;
  double sample_rate = 128.0;
  int epoch_len = 512;
  bool log_amplitude = false;
};

CliConfig load_config(const std::string& path) {
  CliConfig config;
  if (path.empty()) return config;
  json j;
  try {
    j = json::parse(bosd::io::read_text_file(path));
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(path + ": config parse error: " + e.what());
  }
  if (j.contains("model")) {
    config.model = bosd::io::model_from_json(j.at("model").dump());
    config.has_model = true;
  } else if (j.contains("model_path")) {
    config.model = bosd::io::load_model(j.at("model_path").get<std::string>());
    config.has_model = true;
  }
  config.t_len = j.value("t", config.t_len);
  config.seed = j.value("seed", config.seed);
  config.smoothing_alpha = j.value("smoothing_alpha", config.smoothing_alpha);
  config.fit_upm = j.value("fit_upm", config.fit_upm);
  config.final_truncated = j.value("final_truncated", config.final_truncated);
  config.trace_max_cols = j.value("trace_max_cols", config.trace_max_cols);
  if (j.contains("features")) {
    const auto& f = j.at("features");
    config.sample_rate = f.value("sample_rate", config.sample_rate);
    config.epoch_len = f.value("epoch_len", config.epoch_len);
    config.log_amplitude = f.value("log_amplitude", config.log_amplitude);
    if (f.contains("bands"))
      for (const auto& b : f.at("bands"))
        config.bands.emplace_back(b.at(0).get<double>(), b.at(1).get<double>());
  }
  return config;
}

const bosd::HsmmParams& require_model(const CliConfig& config) {
  if (!config.has_model)
    throw std::invalid_argument("config must provide `model` (inline) or `model_path`");
  return config.model;
}

void warn_on_advisories(const bosd::HsmmParams& params) {
  const auto report = bosd::validate(params);
  for (const auto& a : report.advisories) bosd::logging::warn(a);
  if (!report.ok()) {
    std::string msg = "invalid model:";
    for (const auto& e : report.errors) msg += "\n  " + e;
    throw std::invalid_argument(msg);
  }
}

int cmd_sample(const std::string& config_path, std::optional<std::uint64_t> seed_flag,
               const std::string& out_prefix) {
  const CliConfig config = load_config(config_path);
  const bosd::HsmmParams& model = require_model(config);
  warn_on_advisories(model);
  const std::uint64_t seed = seed_flag.value_or(config.seed);
  const bosd::SampledSequence draw = bosd::sample(model, config.t_len, seed);
  bosd::io::write_sequence_csv(out_prefix + "_sequence.csv", draw.y);
  bosd::io::write_labels_csv(out_prefix + "_labels.csv", {{0, draw.labels}});
  bosd::io::save_model(model, out_prefix + "_model.json");
  std::cout << "sampled T=" << draw.y.rows() << " M=" << draw.y.cols()
            << " segments=" << draw.labels.segments.size()
            << (draw.labels.final_truncated ? " (final truncated)" : "") << " seed=" << seed
            << "\n";
  return 0;
}

int cmd_fit(const std::vector<std::string>& sequence_paths, const std::string& labels_path,
            const std::string& config_path, const std::string& out_model,
            const std::string& out_report) {
  const CliConfig config = load_config(config_path);
  const bosd::HsmmParams& prototype = require_model(config);
  auto labels = bosd::io::read_labels_csv(labels_path);
  std::vector<bosd::TrainSequence> sequences;
  for (std::size_t i = 0; i < sequence_paths.size(); ++i) {
    bosd::TrainSequence seq;
    seq.y = bosd::io::read_sequence_csv(sequence_paths[i]);
    const auto it = labels.find(static_cast<int>(i));
    if (it == labels.end())
      throw std::invalid_argument(labels_path + ": no labels for seq_id " + std::to_string(i) +
                                  " (ids follow --sequences order)");
    seq.labels = it->second;
    seq.labels.final_truncated = config.final_truncated;
    sequences.push_back(std::move(seq));
  }
  bosd::LearnConfig learn;
  learn.smoothing_alpha = config.smoothing_alpha;
  learn.fit_upm = config.fit_upm;
  const bosd::FitReport report =
      bosd::fit_supervised(sequences, prototype.upm, prototype.max_duration(), learn);
  for (const auto& w : report.warnings) bosd::logging::warn(w);
  bosd::io::save_model(report.params, out_model);
  if (!out_report.empty()) {
    json j;
    j["smoothing_alpha"] = report.smoothing_alpha;
    j["warnings"] = report.warnings;
    j["pi_counts"] = std::vector<double>(report.pi_counts.data(),
                                         report.pi_counts.data() + report.pi_counts.size());
    json a_counts = json::array(), d_counts = json::array();
    for (Eigen::Index i = 0; i < report.a_counts.rows(); ++i) {
      a_counts.push_back(std::vector<double>(
          report.a_counts.row(i).data(),
          report.a_counts.row(i).data() + report.a_counts.cols()));
      d_counts.push_back(std::vector<double>(
          report.d_counts.row(i).data(),
          report.d_counts.row(i).data() + report.d_counts.cols()));
    }
    j["a_counts"] = std::move(a_counts);
    j["d_counts"] = std::move(d_counts);
    bosd::io::write_text_file(out_report, j.dump(2) + "\n");
  }
  std::cout << "fitted model written to " << out_model << " (" << report.warnings.size()
            << " warnings)\n";
  return 0;
}

/// Streams the sequence CSV through the filter one row at a time; memory
/// stays bounded by the filter state regardless of T.
int cmd_infer(const std::string& sequence_path, const std::string& model_path,
              const std::string& mode, const std::string& out_trace,
              const std::string& config_path) {
  const CliConfig config = load_config(config_path);
  const bosd::HsmmParams model = bosd::io::load_model(model_path);
  warn_on_advisories(model);
  const std::vector<int> grid = bosd::cdf_grid(model.max_duration(), config.trace_max_cols);

  std::ifstream in(sequence_path);
  if (!in) throw std::invalid_argument("cannot open file: " + sequence_path);
  std::string line;
  if (!std::getline(in, line))
    throw std::invalid_argument(sequence_path + ": empty sequence file");
  std::size_t columns = 1;
  for (const char ch : line) columns += ch == ',' ? 1 : 0;
  const int m = static_cast<int>(columns) - 1;
  if (m < 1) throw std::invalid_argument(sequence_path + ": no observation columns");

  std::ofstream out(out_trace);
  if (!out) throw std::invalid_argument("cannot write file: " + out_trace);

  double cumulative = 0.0;
  int t = 0;
  const auto each_row = [&](auto&& step_fn) {
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      Eigen::VectorXd y(m);
      std::size_t pos = line.find(',');
      for (int c = 0; c < m; ++c) {
        const std::size_t next = line.find(',', pos + 1);
        y[c] = bosd::io::parse_double(line.substr(pos + 1, next - pos - 1));
        pos = next;
      }
      ++t;
      step_fn(y);
    }
  };

  try {
    if (mode == "bosd") {
      bosd::BosdFilter filter(model);
      bosd::io::write_trace_header(out, model.num_states(), grid);
      each_row([&](const Eigen::VectorXd& y) {
        const bosd::StepMarginals step = filter.step(y);
        cumulative += step.log_evidence;
        bosd::io::write_trace_row(out, bosd::make_trace_row(t, step, grid));
      });
    } else if (mode == "bocpd") {
      if (model.num_states() != 1)
        throw std::invalid_argument("bocpd mode needs a single-state model");
      const bosd::HazardFn hazard = bosd::hazard_from_duration(model.duration_pmf(0));
      bosd::BocpdFilter filter(hazard, bosd::make_upm(model.upm));
      const bosd::ResidualKernel kernel = bosd::residual_kernel(hazard);
      bosd::io::write_trace_header(out, 1, grid);
      each_row([&](const Eigen::VectorXd& y) {
        const double le = filter.step(y);
        cumulative += le;
        bosd::StepMarginals step;
        step.log_run_length = filter.log_posterior();
        step.log_residual = bosd::residual_log_posterior(kernel, filter.log_posterior());
        step.log_state = Eigen::VectorXd::Zero(1);
        step.log_evidence = le;
        step.map_state = 0;
        bosd::io::write_trace_row(out, bosd::make_trace_row(t, step, grid));
      });
    } else {
      throw std::invalid_argument("unknown mode '" + mode + "' (expected bosd or bocpd)");
    }
  } catch (const bosd::NumericalError& e) {
    std::cerr << "numeric failure at step " << t << ": " << e.what() << "\n";
    return 1;
  }
  std::cout << "T=" << t << " cumulative_log_evidence=" << bosd::io::format_double(cumulative)
            << "\n";
  return 0;
}

int cmd_eval(const std::string& trace_path, const std::string& labels_path, int seq_id,
             const std::string& out_path, const std::string& reference_path) {
  const bosd::PosteriorTrace trace = bosd::io::read_trace_csv(trace_path);
  auto labels = bosd::io::read_labels_csv(labels_path);
  const auto it = labels.find(seq_id);
  if (it == labels.end())
    throw std::invalid_argument(labels_path + ": no labels for seq_id " + std::to_string(seq_id));
  std::vector<int> predicted;
  predicted.reserve(trace.rows.size());
  for (const auto& row : trace.rows) predicted.push_back(row.map_state);
  const std::vector<int> truth =
      bosd::expand_labels(it->second, static_cast<int>(trace.rows.size()));
  const bosd::MetricsReport report = bosd::eval_metrics(predicted, truth, trace.num_states);

  std::vector<std::string> names;
  json out = json::parse(bosd::io::metrics_to_json(report, names));
  if (!reference_path.empty()) {
    const json ref = json::parse(bosd::io::read_text_file(reference_path));
    json deltas = json::array();
    for (const auto& state : ref.at("states")) {
      const int z = state.at("index").get<int>();
      if (z < 0 || z >= trace.num_states)
        throw std::invalid_argument(reference_path + ": reference state index out of range");
      json d;
      d["state"] = state.value("name", std::to_string(z));
      d["reference_f1"] = state.at("f1").get<double>();
      d["observed_f1"] = report.f1[z];
      d["delta_f1"] = report.f1[z] - state.at("f1").get<double>();
      deltas.push_back(std::move(d));
    }
    out["reference"] = ref.value("source", "");
    out["reference_deltas"] = std::move(deltas);
  }
  const std::string text = out.dump(2) + "\n";
  if (out_path.empty())
    std::cout << text;
  else
    bosd::io::write_text_file(out_path, text);
  return 0;
}

int cmd_features(const std::string& input_path, const std::string& config_path,
                 const std::string& out_path) {
  const CliConfig config = load_config(config_path);
  if (config.bands.empty())
    throw std::invalid_argument("config must provide features.bands for feature extraction");
  const Eigen::MatrixXd raw = bosd::io::read_sequence_csv(input_path);
  const int epochs = static_cast<int>(raw.rows()) / config.epoch_len;
  if (epochs < 1)
    throw std::invalid_argument(input_path + ": fewer samples than one epoch (" +
                                std::to_string(config.epoch_len) + ")");
  Eigen::MatrixXd features(epochs,
                           raw.cols() * static_cast<Eigen::Index>(config.bands.size()));
  for (int e = 0; e < epochs; ++e)
    features.row(e) = bosd::band_features(raw.middleRows(e * config.epoch_len, config.epoch_len),
                                          config.bands, config.sample_rate, config.log_amplitude)
                          .transpose();
  bosd::io::write_sequence_csv(out_path, features);
  std::cout << "wrote " << epochs << " epochs x " << features.cols() << " features\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian online segment detection: joint run-length, duration and state filtering"};
  app.require_subcommand(1);

  std::string config_path, out_path, labels_path, model_path, sequence_path, trace_path;
  std::string reference_path, report_path;
  std::string mode = "bosd";
  std::vector<std::string> sequence_paths;
  std::optional<std::uint64_t> seed_flag;
  int seq_id = 0;

  auto* sample_cmd = app.add_subcommand("sample", "Draw a sequence with ground-truth labels");
  sample_cmd->add_option("--config", config_path, "config JSON")->required();
  sample_cmd->add_option("--seed", seed_flag, "seed override");
  sample_cmd->add_option("--out", out_path, "output prefix")->required();

  auto* fit_cmd = app.add_subcommand("fit", "Supervised maximum-likelihood fit");
  fit_cmd->add_option("--sequences", sequence_paths, "sequence CSVs, order defines seq_id")
      ->required()
      ->delimiter(',');
  fit_cmd->add_option("--labels", labels_path, "labels CSV")->required();
  fit_cmd->add_option("--config", config_path, "config JSON (model prototype)")->required();
  fit_cmd->add_option("--out", out_path, "fitted model JSON")->required();
  fit_cmd->add_option("--report", report_path, "sidecar fit report JSON");

  auto* infer_cmd = app.add_subcommand("infer", "Filter a sequence and export the trace");
  infer_cmd->add_option("--sequence", sequence_path, "sequence CSV")->required();
  infer_cmd->add_option("--model", model_path, "model JSON")->required();
  infer_cmd->add_option("--mode", mode, "bosd | bocpd")->check(CLI::IsMember({"bosd", "bocpd"}));
  infer_cmd->add_option("--out", out_path, "trace CSV")->required();
  infer_cmd->add_option("--config", config_path, "config JSON (trace grid)");

  auto* eval_cmd = app.add_subcommand("eval", "Score MAP states against labels");
  eval_cmd->add_option("--trace", trace_path, "trace CSV")->required();
  eval_cmd->add_option("--labels", labels_path, "labels CSV")->required();
  eval_cmd->add_option("--seq-id", seq_id, "sequence id within the labels file");
  eval_cmd->add_option("--out", out_path, "metrics JSON (stdout when omitted)");
  eval_cmd->add_option("--reference", reference_path, "reference fixture for delta reporting");

  auto* features_cmd =
      app.add_subcommand("features", "Frequency-band features from raw multichannel samples");
  features_cmd->add_option("--input", sequence_path, "raw CSV (t,ch_1..ch_C)")->required();
  features_cmd->add_option("--config", config_path, "config JSON with features block")->required();
  features_cmd->add_option("--out", out_path, "feature sequence CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return 2;
  }

  try {
    if (sample_cmd->parsed()) return cmd_sample(config_path, seed_flag, out_path);
    if (fit_cmd->parsed())
      return cmd_fit(sequence_paths, labels_path, config_path, out_path, report_path);
    if (infer_cmd->parsed())
      return cmd_infer(sequence_path, model_path, mode, out_path, config_path);
    if (eval_cmd->parsed())
      return cmd_eval(trace_path, labels_path, seq_id, out_path, reference_path);
    if (features_cmd->parsed()) return cmd_features(sequence_path, config_path, out_path);
  } catch (const bosd::NumericalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
