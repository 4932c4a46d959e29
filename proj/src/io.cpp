#include "bosd/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace bosd::io {

using nlohmann::json;

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf);
}

double parse_double(const std::string& field) {
  char* end = nullptr;
  const double v = std::strtod(field.c_str(), &end);
  if (end == field.c_str())
    throw std::invalid_argument("malformed number: '" + field + "'");
  return v;  // subnormal underflow parses to the nearest denormal, keep it
}

namespace {

std::string vector_to_json(const Eigen::VectorXd& v) {
  std::string out = "[";
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i > 0) out += ", ";
    out += format_double(v[i]);
  }
  return out + "]";
}

std::string matrix_to_json(const Eigen::MatrixXd& m, const std::string& row_indent) {
  std::string out = "[";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    out += (i > 0 ? "," : "");
    out += "\n" + row_indent + vector_to_json(m.row(i).transpose());
  }
  return out + "]";
}

std::string upm_to_json(const UpmConfig& config) {
  std::string out = "{\n";
  if (const auto* g = std::get_if<GaussianUpmConfig>(&config)) {
    out += "    \"kind\": \"gaussian\",\n";
    if (g->mode == GaussianUpmConfig::Mode::kFixed) {
      out += "    \"mode\": \"fixed\",\n    \"states\": [";
      for (std::size_t z = 0; z < g->states.size(); ++z) {
        out += (z > 0 ? "," : "");
        out += "\n      {\"mu\": " + vector_to_json(g->states[z].mu) +
               ", \"sigma\": " + matrix_to_json(g->states[z].sigma, "        ") + "}";
      }
      out += "]\n";
    } else {
      out += "    \"mode\": \"conjugate\",\n    \"states\": [";
      for (std::size_t z = 0; z < g->priors.size(); ++z) {
        const auto& pr = g->priors[z];
        out += (z > 0 ? "," : "");
        out += "\n      {\"mu0\": " + vector_to_json(pr.mu0) +
               ", \"kappa0\": " + format_double(pr.kappa0) +
               ", \"nu0\": " + format_double(pr.nu0) + ", \"psi0\": " +
               matrix_to_json(pr.psi0, "        ") + "}";
      }
      out += "]\n";
    }
  } else if (const auto* s = std::get_if<SineUpmConfig>(&config)) {
    out += "    \"kind\": \"scaled_sine\",\n    \"states\": [";
    for (std::size_t z = 0; z < s->states.size(); ++z) {
      out += (z > 0 ? "," : "");
      out += "\n      {\"b\": " + format_double(s->states[z].b) +
             ", \"c\": " + format_double(s->states[z].c) +
             ", \"sigma2\": " + format_double(s->states[z].sigma2) + "}";
    }
    out += "]\n";
  } else {
    const auto& b = std::get<BasisUpmConfig>(config);
    out += "    \"kind\": \"basis\",\n";
    out += "    \"centers\": " + vector_to_json(b.centers) + ",\n";
    out += "    \"widths\": " + vector_to_json(b.widths) + ",\n    \"states\": [";
    for (std::size_t z = 0; z < b.states.size(); ++z) {
      out += (z > 0 ? "," : "");
      out += "\n      {\"weight_mean\": " + vector_to_json(b.states[z].weight_mean) +
             ", \"weight_cov\": " + matrix_to_json(b.states[z].weight_cov, "        ") +
             ", \"noise_var\": " + format_double(b.states[z].noise_var) + "}";
    }
    out += "]\n";
  }
  return out + "  }";
}

Eigen::VectorXd vector_from_json(const json& j, const std::string& what) {
  if (!j.is_array()) throw std::invalid_argument("model json: " + what + " must be an array");
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return v;
}

Eigen::MatrixXd matrix_from_json(const json& j, const std::string& what) {
  if (!j.is_array() || j.empty())
    throw std::invalid_argument("model json: " + what + " must be a non-empty array of rows");
  const std::size_t cols = j[0].size();
  Eigen::MatrixXd m(j.size(), cols);
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (j[i].size() != cols)
      throw std::invalid_argument("model json: " + what + " has ragged rows");
    for (std::size_t c = 0; c < cols; ++c)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = j[i][c].get<double>();
  }
  return m;
}

UpmConfig upm_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "gaussian") {
    GaussianUpmConfig config;
    const std::string mode = j.value("mode", "fixed");
    if (mode == "fixed") {
      config.mode = GaussianUpmConfig::Mode::kFixed;
      for (const auto& s : j.at("states"))
        config.states.push_back(GaussianStateParams{vector_from_json(s.at("mu"), "upm mu"),
                                                    matrix_from_json(s.at("sigma"), "upm sigma")});
    } else if (mode == "conjugate") {
      config.mode = GaussianUpmConfig::Mode::kConjugate;
      for (const auto& s : j.at("states")) {
        NiwPrior pr;
        pr.mu0 = vector_from_json(s.at("mu0"), "upm mu0");
        pr.kappa0 = s.at("kappa0").get<double>();
        pr.nu0 = s.at("nu0").get<double>();
        pr.psi0 = matrix_from_json(s.at("psi0"), "upm psi0");
        config.priors.push_back(std::move(pr));
      }
    } else {
      throw std::invalid_argument("model json: unknown gaussian mode '" + mode + "'");
    }
    return config;
  }
  if (kind == "scaled_sine") {
    SineUpmConfig config;
    for (const auto& s : j.at("states"))
      config.states.push_back(SineStateParams{s.at("b").get<double>(), s.at("c").get<double>(),
                                              s.at("sigma2").get<double>()});
    return config;
  }
  if (kind == "basis") {
    BasisUpmConfig config;
    config.centers = vector_from_json(j.at("centers"), "upm centers");
    config.widths = vector_from_json(j.at("widths"), "upm widths");
    for (const auto& s : j.at("states"))
      config.states.push_back(
          BasisStateParams{vector_from_json(s.at("weight_mean"), "upm weight_mean"),
                           matrix_from_json(s.at("weight_cov"), "upm weight_cov"),
                           s.at("noise_var").get<double>()});
    return config;
  }
  throw std::invalid_argument("model json: unknown upm kind '" + kind + "'");
}

}  // namespace

std::string model_to_json(const HsmmParams& params) {
  std::string out = "{\n";
  out += "  \"k\": " + std::to_string(params.num_states()) + ",\n";
  out += "  \"d_max\": " + std::to_string(params.max_duration()) + ",\n";
  out += "  \"pi\": " + vector_to_json(params.pi) + ",\n";
  out += "  \"a\": " + matrix_to_json(params.a, "    ") + ",\n";
  out += "  \"d\": " + matrix_to_json(params.d, "    ") + ",\n";
  out += "  \"upm\": " + upm_to_json(params.upm) + "\n";
  return out + "}\n";
}

HsmmParams model_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("model json: parse error: ") + e.what());
  }
  HsmmParams params;
  const int k = j.at("k").get<int>();
  const int d_max = j.at("d_max").get<int>();
  params.pi = vector_from_json(j.at("pi"), "pi");
  params.a = matrix_from_json(j.at("a"), "a");
  params.d = matrix_from_json(j.at("d"), "d");
  params.upm = upm_from_json(j.at("upm"));
  if (params.num_states() != k)
    throw std::invalid_argument("model json: pi length disagrees with k");
  if (params.max_duration() != d_max)
    throw std::invalid_argument("model json: d columns disagree with d_max");
  return params;
}

void save_model(const HsmmParams& params, const std::string& path) {
  write_text_file(path, model_to_json(params));
}

HsmmParams load_model(const std::string& path) { return model_from_json(read_text_file(path)); }

// ---------------------------------------------------------------------------
// CSV

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  return out;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open file: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

}  // namespace

void write_sequence_csv(const std::string& path, const Eigen::MatrixXd& y) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write file: " + path);
  out << "t";
  for (Eigen::Index c = 0; c < y.cols(); ++c) out << ",y_" << (c + 1);
  out << "\n";
  for (Eigen::Index t = 0; t < y.rows(); ++t) {
    out << (t + 1);
    for (Eigen::Index c = 0; c < y.cols(); ++c) out << "," << format_double(y(t, c));
    out << "\n";
  }
}

Eigen::MatrixXd read_sequence_csv(const std::string& path) {
  const auto lines = read_lines(path);
  if (lines.size() < 2) throw std::invalid_argument(path + ": sequence CSV has no data rows");
  const auto header = split_csv_line(lines[0]);
  if (header.empty() || header[0] != "t")
    throw std::invalid_argument(path + ": sequence CSV must start with a 't' column");
  const std::size_t m = header.size() - 1;
  if (m < 1) throw std::invalid_argument(path + ": sequence CSV has no observation columns");
  Eigen::MatrixXd y(lines.size() - 1, m);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto fields = split_csv_line(lines[i]);
    if (fields.size() != header.size())
      throw std::invalid_argument(path + ": row " + std::to_string(i) + " has " +
                                  std::to_string(fields.size()) + " fields, expected " +
                                  std::to_string(header.size()));
    for (std::size_t c = 0; c < m; ++c)
      y(static_cast<Eigen::Index>(i - 1), static_cast<Eigen::Index>(c)) =
          parse_double(fields[c + 1]);
  }
  return y;
}

void write_labels_csv(const std::string& path,
                      const std::map<int, SegmentLabels>& labels_by_sequence) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write file: " + path);
  out << "seq_id,state,start,duration\n";
  for (const auto& [seq_id, labels] : labels_by_sequence)
    for (const auto& seg : labels.segments)
      out << seq_id << "," << seg.state << "," << seg.start << "," << seg.duration << "\n";
}

std::map<int, SegmentLabels> read_labels_csv(const std::string& path) {
  const auto lines = read_lines(path);
  if (lines.empty() || split_csv_line(lines[0]) !=
                           std::vector<std::string>{"seq_id", "state", "start", "duration"})
    throw std::invalid_argument(path + ": labels CSV must have header seq_id,state,start,duration");
  std::map<int, SegmentLabels> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto fields = split_csv_line(lines[i]);
    if (fields.size() != 4)
      throw std::invalid_argument(path + ": row " + std::to_string(i) + " must have 4 fields");
    const int seq_id = std::stoi(fields[0]);
    out[seq_id].segments.push_back(
        LabeledSegment{std::stoi(fields[1]), std::stoi(fields[2]), std::stoi(fields[3])});
  }
  return out;
}

void write_trace_header(std::ostream& os, int num_states, const std::vector<int>& grid) {
  os << "t,map_state,log_evidence";
  for (int z = 0; z < num_states; ++z) os << ",state_" << z;
  for (const int g : grid) os << ",rl_cdf_" << g;
  for (const int g : grid) os << ",res_cdf_" << g;
  os << "\n";
}

void write_trace_row(std::ostream& os, const TraceRow& row) {
  os << row.t << "," << row.map_state << "," << format_double(row.log_evidence);
  for (Eigen::Index i = 0; i < row.state_marginal.size(); ++i)
    os << "," << format_double(row.state_marginal[i]);
  for (Eigen::Index i = 0; i < row.run_length_cdf.size(); ++i)
    os << "," << format_double(row.run_length_cdf[i]);
  for (Eigen::Index i = 0; i < row.residual_cdf.size(); ++i)
    os << "," << format_double(row.residual_cdf[i]);
  os << "\n";
}

void write_trace_csv(const std::string& path, const PosteriorTrace& trace) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write file: " + path);
  write_trace_header(out, trace.num_states, trace.grid);
  for (const auto& row : trace.rows) write_trace_row(out, row);
}

PosteriorTrace read_trace_csv(const std::string& path) {
  const auto lines = read_lines(path);
  if (lines.size() < 2) throw std::invalid_argument(path + ": trace CSV has no data rows");
  const auto header = split_csv_line(lines[0]);
  PosteriorTrace trace;
  std::size_t col = 3;
  while (col < header.size() && header[col].rfind("state_", 0) == 0) ++col;
  trace.num_states = static_cast<int>(col - 3);
  const std::size_t rl_begin = col;
  while (col < header.size() && header[col].rfind("rl_cdf_", 0) == 0) {
    trace.grid.push_back(std::stoi(header[col].substr(7)));
    ++col;
  }
  const std::size_t grid_size = trace.grid.size();
  if (header.size() != rl_begin + 2 * grid_size)
    throw std::invalid_argument(path + ": malformed trace header");
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto fields = split_csv_line(lines[i]);
    if (fields.size() != header.size())
      throw std::invalid_argument(path + ": row " + std::to_string(i) + " is malformed");
    TraceRow row;
    row.t = std::stoi(fields[0]);
    row.map_state = std::stoi(fields[1]);
    row.log_evidence = parse_double(fields[2]);
    row.state_marginal.resize(trace.num_states);
    for (int z = 0; z < trace.num_states; ++z)
      row.state_marginal[z] = parse_double(fields[3 + z]);
    row.run_length_cdf.resize(static_cast<Eigen::Index>(grid_size));
    row.residual_cdf.resize(static_cast<Eigen::Index>(grid_size));
    for (std::size_t g = 0; g < grid_size; ++g) {
      row.run_length_cdf[static_cast<Eigen::Index>(g)] = parse_double(fields[rl_begin + g]);
      row.residual_cdf[static_cast<Eigen::Index>(g)] =
          parse_double(fields[rl_begin + grid_size + g]);
    }
    trace.rows.push_back(std::move(row));
  }
  return trace;
}

std::string metrics_to_json(const MetricsReport& report, const std::vector<std::string>& names) {
  json j;
  json states = json::array();
  for (Eigen::Index z = 0; z < report.precision.size(); ++z) {
    json s;
    s["state"] = names.size() > static_cast<std::size_t>(z) ? names[z]
                                                            : std::to_string(z);
    s["precision"] = report.precision[z];
    s["recall"] = report.recall[z];
    s["f1"] = report.f1[z];
    s["support"] = report.support[z];
    states.push_back(std::move(s));
  }
  j["states"] = std::move(states);
  j["macro"] = {{"precision", report.macro_precision},
                {"recall", report.macro_recall},
                {"f1", report.macro_f1}};
  j["weighted"] = {{"precision", report.weighted_precision},
                   {"recall", report.weighted_recall},
                   {"f1", report.weighted_f1}};
  json conf = json::array();
  for (Eigen::Index i = 0; i < report.confusion.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index c = 0; c < report.confusion.cols(); ++c)
      row.push_back(report.confusion(i, c));
    conf.push_back(std::move(row));
  }
  j["confusion"] = std::move(conf);
  return j.dump(2) + "\n";
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot write file: " + path);
  out << content;
}

}  // namespace bosd::io
