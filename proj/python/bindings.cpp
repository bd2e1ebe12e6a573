#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "plpdp/harness.hpp"
#include "plpdp/trackers.hpp"

namespace py = pybind11;
using namespace plpdp;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::vector<double> to_vector(const Array& a) {
    if (a.ndim() != 1) {
        throw ConfigError("expected a one-dimensional array");
    }
    return {a.data(), a.data() + a.size()};
}

py::array_t<double> to_array(std::span<const double> v) {
    py::array_t<double> out(static_cast<py::ssize_t>(v.size()));
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
}

NoveltyCurve novelty(const Array& a, int fps) {
    return validate_novelty(to_vector(a), fps);
}

py::dict report_dict(const EvalReport& r) {
    py::dict d;
    d["f1"] = r.f1;
    d["precision"] = r.precision;
    d["recall"] = r.recall;
    d["n_matched"] = r.n_matched;
    d["n_est"] = r.n_est;
    d["n_ref"] = r.n_ref;
    return d;
}

PptOptions ppt_options(const std::vector<double>& kernels, int min_bpm, int max_bpm, double harmonic_tie,
                       double lambda0, std::optional<double> delta0, double lambda_trans, bool exact) {
    PptOptions o;
    o.kernel_sizes_sec = kernels;
    o.tempo_range = {min_bpm, max_bpm};
    o.harmonic_tie_tolerance = harmonic_tie;
    o.lambda0 = lambda0;
    o.dp_delta0_frames = delta0;
    o.hmm.lambda_trans = lambda_trans;
    o.hmm.tempo_range = {min_bpm, max_bpm};
    o.exact_dp = exact;
    return o;
}

}  // namespace

PYBIND11_MODULE(_plpdp, m) {
    m.doc() = "Beat tracking post-processing on activation functions";

    static py::exception<ParseError> parse_error(m, "ParseError", PyExc_ValueError);
    static py::exception<ConfigError> config_error(m, "ConfigError", PyExc_ValueError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) {
                std::rethrow_exception(p);
            }
        } catch (const ParseError& e) {
            PyErr_SetString(parse_error.ptr(), e.what());
        } catch (const ConfigError& e) {
            PyErr_SetString(config_error.ptr(), e.what());
        }
    });

    m.attr("DEFAULT_FPS") = kDefaultFps;

    m.def("penalty", &penalty, py::arg("delta"), py::arg("delta0"),
          "-(log2(delta / delta0))^2");
    m.def("tempo_transition", &tempo_transition, py::arg("psi_prev"), py::arg("psi_cur"), py::arg("lambda_trans"));

    m.def(
        "plp",
        [](const Array& act, double kernel_size, int fps, int min_bpm, int max_bpm, double harmonic_tie) {
            const auto curve = plp(novelty(act, fps), kernel_config(kernel_size, {min_bpm, max_bpm}, harmonic_tie));
            return to_array(curve.values());
        },
        py::arg("activation"), py::arg("kernel_size") = 3.0, py::arg("fps") = kDefaultFps,
        py::arg("min_bpm") = 30, py::arg("max_bpm") = 300,
        py::arg("harmonic_tie") = kDefaultHarmonicTieTolerance, "PLP curve for one kernel size (seconds).");

    m.def(
        "combined_plp",
        [](const Array& act, const std::vector<double>& kernels, int fps, int min_bpm, int max_bpm,
           double harmonic_tie) {
            return to_array(combined_plp(novelty(act, fps), kernels, {min_bpm, max_bpm}, harmonic_tie).values());
        },
        py::arg("activation"), py::arg("kernels") = std::vector<double>{1.0, 3.0, 5.0},
        py::arg("fps") = kDefaultFps, py::arg("min_bpm") = 30, py::arg("max_bpm") = 300,
        py::arg("harmonic_tie") = kDefaultHarmonicTieTolerance, "Product of the per-kernel PLP curves.");

    m.def(
        "pick_peaks",
        [](const Array& curve, double min_height, std::size_t min_distance, double min_prominence) {
            return pick_peaks(to_vector(curve), PeakPickConfig{min_height, min_distance, min_prominence});
        },
        py::arg("curve"), py::arg("min_height") = 0.1, py::arg("min_distance") = 7,
        py::arg("min_prominence") = 0.1, "Peak frames after height, distance and prominence filters.");

    m.def(
        "tempo_condition",
        [](const Array& act, const std::vector<double>& kernels, int fps, double harmonic_tie) {
            PlpdpConfig cfg;
            cfg.kernel_sizes_sec = kernels;
            cfg.harmonic_tie_tolerance = harmonic_tie;
            const auto cond = plp_condition(novelty(act, fps), cfg);
            return py::make_tuple(to_array(cond.confidence()), to_array(cond.est_ibi_frames()));
        },
        py::arg("activation"), py::arg("kernels") = std::vector<double>{1.0, 3.0, 5.0},
        py::arg("fps") = kDefaultFps, py::arg("harmonic_tie") = kDefaultHarmonicTieTolerance,
        "(confidence, estimated IBI in frames) per frame.");

    m.def(
        "plpdp_conditioned",
        [](const Array& act, const Array& confidence, const Array& est_ibi, int fps, bool exact) {
            const auto curve = novelty(act, fps);
            const TempoCondition cond(curve.grid(), to_vector(confidence), to_vector(est_ibi));
            return plpdp_track(curve, cond, exact ? DpMode::exact : DpMode::fast).seconds();
        },
        py::arg("activation"), py::arg("confidence"), py::arg("est_ibi"), py::arg("fps") = kDefaultFps,
        py::arg("exact") = true, "DP under explicit frame-wise conditions; beat times in seconds.");

    m.def(
        "track",
        [](const Array& act, const std::string& ppt, int fps, const std::vector<double>& kernels, int min_bpm,
           int max_bpm, double harmonic_tie, double lambda0, std::optional<double> delta0, double lambda_trans,
           bool exact) {
            const auto opts = ppt_options(kernels, min_bpm, max_bpm, harmonic_tie, lambda0, delta0, lambda_trans, exact);
            return run_ppt(parse_ppt(ppt), novelty(act, fps), opts).seconds();
        },
        py::arg("activation"), py::arg("ppt") = "plpdp", py::arg("fps") = kDefaultFps,
        py::arg("kernels") = std::vector<double>{1.0, 3.0, 5.0}, py::arg("min_bpm") = 30,
        py::arg("max_bpm") = 300, py::arg("harmonic_tie") = kDefaultHarmonicTieTolerance,
        py::arg("lambda0") = 100.0, py::arg("delta0_frames") = py::none(), py::arg("lambda_trans") = 100.0,
        py::arg("exact") = false,
        "Beat times (seconds) from one of sppk, dp, plpdp, plpdp-g3, hmm.");

    m.def(
        "fmeasure",
        [](const std::vector<double>& est, const std::vector<double>& ref, double tol) {
            return report_dict(fmeasure(est, ref, tol));
        },
        py::arg("estimate"), py::arg("reference"), py::arg("tolerance") = kDefaultToleranceSec);

    m.def(
        "synth_activation",
        [](const std::vector<double>& beats, int fps, double epsilon, double tail) {
            return to_array(synth_activation(beats, fps, epsilon, tail).values());
        },
        py::arg("beats"), py::arg("fps") = kDefaultFps, py::arg("epsilon") = kDefaultEpsilon,
        py::arg("tail") = 1.0, "Pulse train with 1 - epsilon at each beat frame.");

    m.def(
        "tempo_stability",
        [](const std::vector<double>& beats, double tol) -> std::optional<bool> {
            const auto r = tempo_stability(beats, tol);
            if (!r.defined) {
                return std::nullopt;
            }
            return r.stable;
        },
        py::arg("beats"), py::arg("tolerance") = 0.04, "None when fewer than two beats.");

    m.def(
        "synth_corpus",
        [](std::size_t n, double duration, std::uint64_t seed) {
            CorpusSpec spec;
            spec.n_tracks = n;
            spec.duration_sec = duration;
            spec.seed = seed;
            py::list out;
            for (const auto& t : synth_corpus(spec)) {
                py::dict d;
                d["id"] = t.id;
                d["kind"] = to_string(t.spec.kind);
                d["start_bpm"] = t.spec.start_bpm;
                d["end_bpm"] = t.spec.end_bpm;
                d["reference"] = t.reference_sec;
                d["activation"] = to_array(t.activation.values());
                out.append(d);
            }
            return out;
        },
        py::arg("n_tracks") = 50, py::arg("duration") = 60.0, py::arg("seed") = 0);
}
