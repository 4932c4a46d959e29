#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "bosd/bocpd.hpp"
#include "bosd/bosd_filter.hpp"
#include "bosd/io.hpp"
#include "bosd/learning.hpp"
#include "bosd/numerics.hpp"
#include "bosd/residual.hpp"
#include "bosd/sampler.hpp"
#include "bosd/trace.hpp"

namespace py = pybind11;
using namespace bosd;

namespace {

SegmentLabels labels_from_tuples(const std::vector<std::tuple<int, int, int>>& segments,
                                 bool final_truncated) {
  SegmentLabels labels;
  for (const auto& [state, start, duration] : segments)
    labels.segments.push_back(LabeledSegment{state, start, duration});
  labels.final_truncated = final_truncated;
  return labels;
}

std::vector<std::tuple<int, int, int>> labels_to_tuples(const SegmentLabels& labels) {
  std::vector<std::tuple<int, int, int>> out;
  for (const auto& seg : labels.segments)
    out.emplace_back(seg.state, seg.start, seg.duration);
  return out;
}

Eigen::MatrixXd joint_to_dense(const JointPosterior& joint) {
  // (z, d-1, r) flattened to (z * d_max + d - 1) x r, zeros where r >= d
  const int k = joint.num_states(), d_max = joint.max_duration();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(k * d_max, d_max);
  for (int z = 0; z < k; ++z)
    for (int d = 1; d <= d_max; ++d)
      for (int r = 0; r < d; ++r) {
        const double v = joint(z, d, r);
        out(z * d_max + d - 1, r) = v == kNegInf ? 0.0 : std::exp(v);
      }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Bayesian online segment detection: exact joint filtering over run "
            "length, segment duration and hidden state";

  py::register_exception<NumericalError>(m, "NumericalError");

  py::class_<HsmmParams>(m, "Model")
      .def_static("from_json", [](const std::string& text) { return io::model_from_json(text); },
                  py::arg("text"))
      .def_static("load", [](const std::string& path) { return io::load_model(path); },
                  py::arg("path"))
      .def("to_json", [](const HsmmParams& p) { return io::model_to_json(p); })
      .def("save", [](const HsmmParams& p, const std::string& path) { io::save_model(p, path); },
           py::arg("path"))
      .def_property_readonly("k", &HsmmParams::num_states)
      .def_property_readonly("d_max", &HsmmParams::max_duration)
      .def_property_readonly("pi", [](const HsmmParams& p) { return p.pi; })
      .def_property_readonly("a", [](const HsmmParams& p) { return p.a; })
      .def_property_readonly("d", [](const HsmmParams& p) { return p.d; })
      .def("validate", [](const HsmmParams& p) {
        const ValidationReport report = validate(p);
        py::dict out;
        out["ok"] = report.ok();
        out["errors"] = report.errors;
        out["advisories"] = report.advisories;
        return out;
      });

  m.def("hazard_from_duration",
        [](const Eigen::VectorXd& pmf) {
          return hazard_from_duration(DurationPmf(pmf)).values();
        },
        py::arg("pmf"), "Hazard H(r) of a duration pmf over d = 1..d_max");
  m.def("duration_from_hazard",
        [](const Eigen::VectorXd& hazard) {
          return duration_from_hazard(HazardFn(hazard)).mass();
        },
        py::arg("hazard"), "Duration pmf induced by a hazard function");

  py::class_<StepMarginals>(m, "StepMarginals")
      .def_property_readonly("run_length",
                             [](const StepMarginals& s) { return exp_mass(s.log_run_length); })
      .def_property_readonly("residual",
                             [](const StepMarginals& s) { return exp_mass(s.log_residual); })
      .def_property_readonly("state", [](const StepMarginals& s) { return exp_mass(s.log_state); })
      .def_readonly("log_evidence", &StepMarginals::log_evidence)
      .def_readonly("map_state", &StepMarginals::map_state);

  py::class_<BosdFilter>(m, "BosdFilter")
      .def(py::init<const HsmmParams&>(), py::arg("model"))
      .def("step", &BosdFilter::step, py::arg("y"))
      .def("log_predictive", &BosdFilter::log_predictive, py::arg("y"))
      .def_property_readonly("t", &BosdFilter::time)
      .def_property_readonly("cumulative_log_evidence", &BosdFilter::cumulative_log_evidence)
      .def("joint", [](const BosdFilter& f) { return joint_to_dense(f.joint()); },
           "Dense joint posterior, shape (k*d_max, d_max): row z*d_max+d-1, column r");

  py::class_<BocpdFilter>(m, "BocpdFilter")
      .def(py::init([](const Eigen::VectorXd& hazard, const HsmmParams& model) {
             return BocpdFilter(HazardFn(hazard), make_upm(model.upm));
           }),
           py::arg("hazard"), py::arg("model"))
      .def("step", &BocpdFilter::step, py::arg("y"))
      .def("log_predictive", &BocpdFilter::log_predictive, py::arg("y"))
      .def_property_readonly("posterior", &BocpdFilter::posterior)
      .def_property_readonly("t", &BocpdFilter::time)
      .def_property_readonly("cumulative_log_evidence", &BocpdFilter::cumulative_log_evidence);

  m.def("residual_kernel",
        [](const Eigen::VectorXd& hazard) { return residual_kernel(HazardFn(hazard)).g; },
        py::arg("hazard"), "p(l | r) table, rows l, columns r");
  m.def("residual_posterior",
        [](const Eigen::MatrixXd& kernel, const Eigen::VectorXd& run_length_posterior) {
          Eigen::VectorXd log_rl(run_length_posterior.size());
          for (Eigen::Index i = 0; i < log_rl.size(); ++i)
            log_rl[i] = log_or_neg_inf(run_length_posterior[i]);
          return exp_mass(residual_log_posterior(ResidualKernel{kernel}, log_rl));
        },
        py::arg("kernel"), py::arg("run_length_posterior"));

  m.def("sample",
        [](const HsmmParams& model, int t_len, std::uint64_t seed) {
          const SampledSequence draw = sample(model, t_len, seed);
          py::dict out;
          out["y"] = draw.y;
          out["segments"] = labels_to_tuples(draw.labels);
          out["final_truncated"] = draw.labels.final_truncated;
          out["run_length"] = draw.run_length;
          out["duration"] = draw.duration;
          out["state"] = draw.state;
          out["residual"] = draw.residual;
          return out;
        },
        py::arg("model"), py::arg("t"), py::arg("seed"));

  m.def("fit_supervised",
        [](const std::vector<std::pair<Eigen::MatrixXd,
                                       std::vector<std::tuple<int, int, int>>>>& sequences,
           const HsmmParams& prototype, double smoothing_alpha, bool fit_upm,
           bool final_truncated) {
          std::vector<TrainSequence> train;
          for (const auto& [y, segments] : sequences)
            train.push_back(TrainSequence{y, labels_from_tuples(segments, final_truncated)});
          LearnConfig config;
          config.smoothing_alpha = smoothing_alpha;
          config.fit_upm = fit_upm;
          const FitReport report =
              fit_supervised(train, prototype.upm, prototype.max_duration(), config);
          py::dict out;
          out["model"] = report.params;
          out["pi_counts"] = report.pi_counts;
          out["a_counts"] = report.a_counts;
          out["d_counts"] = report.d_counts;
          out["warnings"] = report.warnings;
          return out;
        },
        py::arg("sequences"), py::arg("prototype"), py::arg("smoothing_alpha") = 1e-3,
        py::arg("fit_upm") = true, py::arg("final_truncated") = false,
        "sequences: list of (y, [(state, start, duration), ...]) pairs");

  m.def("complete_data_loglik",
        [](const HsmmParams& model, const Eigen::MatrixXd& y,
           const std::vector<std::tuple<int, int, int>>& segments, bool final_truncated) {
          return complete_data_loglik(
              model, {TrainSequence{y, labels_from_tuples(segments, final_truncated)}});
        },
        py::arg("model"), py::arg("y"), py::arg("segments"), py::arg("final_truncated") = false);

  m.def("enumerate_posterior",
        [](const HsmmParams& model, const Eigen::MatrixXd& y) {
          const EnumerationResult result = enumerate_posterior(model, y);
          py::dict out;
          py::list steps;
          for (const auto& table : result.per_step) steps.append(joint_to_dense(table));
          out["per_step"] = std::move(steps);
          out["log_evidence"] = result.log_evidence;
          out["log_marginal_likelihood"] = result.log_marginal_likelihood;
          return out;
        },
        py::arg("model"), py::arg("y"));

  m.def("band_features", &band_features, py::arg("epoch"), py::arg("bands"),
        py::arg("sample_rate"), py::arg("log_amplitude") = false,
        "Per-channel per-band mean spectral amplitudes of one epoch");

  m.def("eval_metrics",
        [](const std::vector<int>& predicted, const std::vector<int>& truth, int num_states) {
          const MetricsReport report = eval_metrics(predicted, truth, num_states);
          py::dict out;
          out["precision"] = report.precision;
          out["recall"] = report.recall;
          out["f1"] = report.f1;
          out["support"] = report.support;
          out["confusion"] = report.confusion;
          out["macro_f1"] = report.macro_f1;
          out["weighted_f1"] = report.weighted_f1;
          return out;
        },
        py::arg("predicted"), py::arg("truth"), py::arg("num_states"));
}
