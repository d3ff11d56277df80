#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "augmentor/bound_check.hpp"
#include "augmentor/distances.hpp"
#include "augmentor/filters.hpp"
#include "augmentor/generators.hpp"
#include "augmentor/models.hpp"
#include "augmentor/pipeline.hpp"
#include "augmentor/serialization.hpp"
#include "augmentor/simulate.hpp"
#include "augmentor/tabular_codec.hpp"

namespace py = pybind11;
using namespace py::literals;
using namespace augmentor;

namespace {

// Round-trips through text; these objects are small.
py::object to_python(const Json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

Json from_python(const py::object& o) {
  return Json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

FilterPolicy policy_from(const std::string& kind, double value) {
  FilterPolicy p;
  p.kind = kind == "threshold" ? FilterPolicy::Kind::threshold : FilterPolicy::Kind::quantile;
  if (kind != "threshold" && kind != "quantile") throw std::invalid_argument("policy must be quantile or threshold");
  p.value = value;
  return p;
}

}  // namespace

PYBIND11_MODULE(_augmentor, m) {
  m.doc() = "Tabular augmentation with statistical filtering";
  m.attr("__version__") = library_version();

  py::register_exception<GeneratorError>(m, "GeneratorError", PyExc_RuntimeError);
  py::register_exception<SelectionFailed>(m, "SelectionFailed", PyExc_RuntimeError);

  m.def(
      "simulate_linear",
      [](Index n, const Vector& beta, double noise_sd, std::uint64_t seed) {
        return simulate_linear(n, beta, noise_sd, seed).values();
      },
      "n"_a, "beta"_a, "noise_sd"_a = 1.0, "seed"_a = 0,
      "Rows of [X, y] with X standard normal and y = X beta + noise.");
  m.def(
      "simulate_logistic",
      [](Index n, const Vector& beta, std::uint64_t seed) { return simulate_logistic(n, beta, seed).values(); },
      "n"_a, "beta"_a, "seed"_a = 0);

  m.def(
      "encode",
      [](const Matrix& table, const std::string& mapping, double exp_coefficient, int bits) {
        const Encoded enc = encode(DataMatrix(table), {mapping_kind_from_string(mapping), exp_coefficient, bits});
        return py::make_tuple(enc.image.pixels(), to_python(Json(enc.manifest)));
      },
      "table"_a, "mapping"_a = "exponential", "exp_coefficient"_a = 0.05, "quantization_bits"_a = 8,
      "Encode a table (response last) as a grayscale image; returns (pixels, manifest).");
  m.def(
      "decode",
      [](const Matrix& pixels, const py::object& manifest) {
        return decode(GrayImage(pixels), from_python(manifest).get<CodecManifest>()).values();
      },
      "pixels"_a, "manifest"_a);

  m.def(
      "generate_surrogate",
      [](const Matrix& pixels, double strength, std::uint64_t seed, double guidance_scale) {
        GenRequest req{GrayImage(pixels), "", strength, guidance_scale, seed};
        return generate_surrogate(req).image.pixels();
      },
      "pixels"_a, "strength"_a, "seed"_a = 0, "guidance_scale"_a = 7.5);
  m.def("strength_grid", &strength_grid, "start"_a, "stop"_a, "step"_a);

  m.def(
      "w1_1d", [](const std::vector<double>& a, const std::vector<double>& b) { return w1_1d(a, b); }, "a"_a, "b"_a);
  m.def(
      "sliced_w1",
      [](const Matrix& a, const Matrix& b, int n_projections, std::uint64_t seed) {
        return sliced_w1(SampleSet(a), SampleSet(b), n_projections, seed);
      },
      "a"_a, "b"_a, "n_projections"_a = 64, "seed"_a = 0);
  m.def(
      "mmd",
      [](const Matrix& a, const Matrix& b, double bandwidth, bool unbiased) {
        return mmd(SampleSet(a), SampleSet(b), bandwidth, unbiased ? MmdEstimator::unbiased : MmdEstimator::biased);
      },
      "a"_a, "b"_a, "bandwidth"_a = 0.0, "unbiased"_a = false);
  m.def(
      "tv_hist",
      [](const Matrix& a, const Matrix& b, int bins, int n_projections, std::uint64_t seed) {
        return tv_hist(SampleSet(a), SampleSet(b), bins, n_projections, seed);
      },
      "a"_a, "b"_a, "bins"_a = 32, "n_projections"_a = 64, "seed"_a = 0);

  m.def(
      "fit_ols", [](const Matrix& x, const Vector& y) { return to_python(Json(fit_ols(x, y))); }, "x"_a, "y"_a);
  m.def(
      "fit_lasso",
      [](const Matrix& x, const Vector& y, double lambda) { return to_python(Json(fit_lasso(x, y, lambda))); },
      "x"_a, "y"_a, "lam"_a);
  m.def(
      "fit_cv",
      [](const Matrix& x, const Vector& y, const std::string& family, std::uint64_t seed) {
        CvOptions cv;
        cv.seed = seed;
        return to_python(Json(fit_cv(x, y, family_from_string(family), cv).fit));
      },
      "x"_a, "y"_a, "family"_a = "linear", "seed"_a = 0);

  m.def(
      "filter_candidates",
      [](const Matrix& originals, const Matrix& candidates, const std::string& metric, const std::string& policy,
         double value, std::optional<std::vector<Index>> pairing) {
        const FilterReport r = filter_candidates(SampleSet(originals), SampleSet(candidates), metric_from_string(metric),
                                                 policy_from(policy, value), pairing ? &*pairing : nullptr);
        return to_python(Json(r));
      },
      "originals"_a, "candidates"_a, "metric"_a = "wasserstein", "policy"_a = "quantile", "value"_a = 0.8,
      "pairing"_a = py::none());

  m.def(
      "bound_check",
      [](const std::vector<double>& real, const std::vector<double>& synth, const py::object& loss, double delta,
         std::uint64_t seed, int n_sign_draws) {
        const LossSpec spec = from_python(loss).get<LossSpec>();
        const BoundReport r = theorem_bound_check(SampleSet::from_values(real), SampleSet::from_values(synth), spec,
                                                  {spec}, delta, seed, n_sign_draws);
        return to_python(Json(r));
      },
      "real"_a, "synth"_a, "loss"_a, "delta"_a = 0.05, "seed"_a = 0, "n_sign_draws"_a = 1000);

  m.def(
      "run_pipeline",
      [](const py::object& config) {
        const RunConfig c = parse_run_config(from_python(config));
        RunManifest manifest;
        {
          py::gil_scoped_release release;
          manifest = run_pipeline(c);
        }
        return to_python(Json(manifest));
      },
      "config"_a, "Run the end-to-end experiment from a config dict; returns the manifest as a dict.");
}
