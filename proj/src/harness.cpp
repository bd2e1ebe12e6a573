#include "plpdp/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <numbers>
#include <random>
#include <thread>

#include "plpdp/plp.hpp"

namespace plpdp {

NoveltyCurve synth_activation(std::span<const double> beats_sec, const FrameGrid& grid, double epsilon) {
    if (!(epsilon > 0.0 && epsilon < 0.5)) {
        throw ConfigError("epsilon must lie in (0, 0.5)");
    }
    if (beats_sec.empty()) {
        throw ConfigError("synthetic activation needs at least one reference beat");
    }
    std::vector<double> values(grid.size(), epsilon);
    for (double t : beats_sec) {
        const long long f = grid.nearest_frame(t);
        if (!std::isfinite(t) || f < 0 || static_cast<std::size_t>(f) >= grid.size()) {
            throw ConfigError("reference beat at " + std::to_string(t) + " s lies outside the grid");
        }
        values[static_cast<std::size_t>(f)] = 1.0 - epsilon;
    }
    return NoveltyCurve(grid, std::move(values));
}

NoveltyCurve synth_activation(std::span<const double> beats_sec, int fps, double epsilon, double tail_sec) {
    if (beats_sec.empty()) {
        throw ConfigError("synthetic activation needs at least one reference beat");
    }
    const double last = *std::max_element(beats_sec.begin(), beats_sec.end());
    const long long n = std::llround((last + std::max(0.0, tail_sec)) * fps) + 1;
    return synth_activation(beats_sec, FrameGrid(fps, static_cast<std::size_t>(std::max(1LL, n))), epsilon);
}

StabilityResult tempo_stability(std::span<const double> beats_sec, double tol) {
    StabilityResult res;
    if (beats_sec.size() < 2) {
        return res;
    }
    std::vector<double> tempi;
    tempi.reserve(beats_sec.size() - 1);
    for (std::size_t i = 1; i < beats_sec.size(); ++i) {
        const double ibi = beats_sec[i] - beats_sec[i - 1];
        if (!(ibi > 0.0)) {
            return res;
        }
        tempi.push_back(60.0 / ibi);
    }
    double mean = 0.0;
    for (double t : tempi) {
        mean += t;
    }
    mean /= static_cast<double>(tempi.size());
    res.defined = true;
    res.stable = std::all_of(tempi.begin(), tempi.end(), [&](double t) {
        const double norm = t / mean;
        return norm >= 1.0 - tol && norm <= 1.0 + tol;
    });
    return res;
}

StabilityReport stability_report(std::span<const std::pair<std::string, std::vector<double>>> tracks,
                                 double tol) {
    StabilityReport rep;
    std::size_t stable = 0;
    for (const auto& [id, beats] : tracks) {
        rep.track_ids.push_back(id);
        rep.results.push_back(tempo_stability(beats, tol));
        stable += rep.results.back().stable ? 1 : 0;
    }
    rep.rate = tracks.empty() ? 0.0 : static_cast<double>(stable) / static_cast<double>(tracks.size());
    return rep;
}

std::vector<std::pair<double, double>> ibi_progression(std::span<const double> beats_sec) {
    std::vector<std::pair<double, double>> out;
    for (std::size_t i = 0; i + 1 < beats_sec.size(); ++i) {
        out.emplace_back(beats_sec[i], beats_sec[i + 1] - beats_sec[i]);
    }
    return out;
}

// ---------------------------------------------------------------------------

std::string to_string(TrajectoryKind kind) {
    switch (kind) {
        case TrajectoryKind::constant: return "constant";
        case TrajectoryKind::ramp: return "ramp";
        case TrajectoryKind::step: return "step";
        case TrajectoryKind::rubato: return "rubato";
    }
    return "unknown";
}

double TrajectorySpec::bpm_at(double t) const {
    switch (kind) {
        case TrajectoryKind::constant:
            return start_bpm;
        case TrajectoryKind::ramp: {
            const double frac = std::clamp(t / duration_sec, 0.0, 1.0);
            return start_bpm + frac * (end_bpm - start_bpm);
        }
        case TrajectoryKind::step:
            return t < 0.5 * duration_sec ? start_bpm : end_bpm;
        case TrajectoryKind::rubato:
            return start_bpm *
                   (1.0 + rubato_depth * std::sin(2.0 * std::numbers::pi * t / rubato_period_sec + rubato_phase));
    }
    return start_bpm;
}

void TrajectorySpec::validate() const {
    const auto in_range = [](double bpm) { return bpm >= 30.0 && bpm <= 300.0; };
    if (!(duration_sec > 0.0) || !(start_sec >= 0.0)) {
        throw ConfigError("trajectory duration must be positive and start nonnegative");
    }
    if (!in_range(start_bpm)) {
        throw ConfigError("start tempo outside 30-300 BPM");
    }
    if ((kind == TrajectoryKind::ramp || kind == TrajectoryKind::step) && !in_range(end_bpm)) {
        throw ConfigError("end tempo outside 30-300 BPM");
    }
    if (kind == TrajectoryKind::rubato) {
        if (!(rubato_depth >= 0.0 && rubato_depth < 1.0) || !(rubato_period_sec > 0.0)) {
            throw ConfigError("invalid rubato parameters");
        }
        if (!in_range(start_bpm * (1.0 - rubato_depth)) || !in_range(start_bpm * (1.0 + rubato_depth))) {
            throw ConfigError("rubato tempo leaves 30-300 BPM");
        }
    }
}

std::vector<double> synth_beats(const TrajectorySpec& spec) {
    spec.validate();
    std::vector<double> beats;
    const double end = spec.start_sec + spec.duration_sec + 1e-9;
    // accumulate in offset time to avoid drifting against start_sec
    double t = 0.0;
    while (spec.start_sec + t <= end) {
        beats.push_back(spec.start_sec + t);
        t += 60.0 / spec.bpm_at(t);
    }
    return beats;
}

SynthTrack synth_track(std::string id, const TrajectorySpec& spec, int fps, double epsilon) {
    auto beats = synth_beats(spec);
    auto act = synth_activation(beats, fps, epsilon, 1.0);
    return SynthTrack{std::move(id), spec, std::move(beats), std::move(act)};
}

std::vector<SynthTrack> synth_corpus(const CorpusSpec& spec) {
    if (spec.kinds.empty()) {
        throw ConfigError("corpus needs at least one trajectory kind");
    }
    if (!(spec.min_start_bpm >= 30.0 && spec.min_start_bpm <= spec.max_start_bpm && spec.max_start_bpm <= 300.0)) {
        throw ConfigError("corpus start tempo band must lie inside 30-300 BPM");
    }
    std::mt19937_64 rng(spec.seed);
    const auto uniform = [&rng](double lo, double hi) {
        // explicit mapping keeps the corpus identical across standard libraries
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        return lo + u * (hi - lo);
    };
    std::vector<SynthTrack> out;
    out.reserve(spec.n_tracks);
    for (std::size_t i = 0; i < spec.n_tracks; ++i) {
        TrajectorySpec tr;
        tr.kind = spec.kinds[i % spec.kinds.size()];
        tr.duration_sec = spec.duration_sec;
        tr.start_sec = uniform(0.5, 2.0);
        tr.start_bpm = std::exp(uniform(std::log(spec.min_start_bpm), std::log(spec.max_start_bpm)));
        double direction = uniform(0.0, 1.0) < 0.5 ? -1.0 : 1.0;
        // tempo changes head back into the band instead of leaving it
        const auto changed = [&](double lo, double hi) {
            const double amount = uniform(lo, hi);
            if (tr.start_bpm * (1.0 + direction * amount) < spec.min_start_bpm ||
                tr.start_bpm * (1.0 + direction * amount) > 300.0) {
                direction = -direction;
            }
            return std::clamp(tr.start_bpm * (1.0 + direction * amount), 30.0, 300.0);
        };
        switch (tr.kind) {
            case TrajectoryKind::constant:
                tr.end_bpm = tr.start_bpm;
                break;
            case TrajectoryKind::ramp:
                tr.end_bpm = changed(0.15, 0.3);
                break;
            case TrajectoryKind::step:
                tr.end_bpm = changed(0.1, 0.25);
                break;
            case TrajectoryKind::rubato:
                tr.end_bpm = tr.start_bpm;
                // keep the swing inside 30-300 BPM
                tr.rubato_depth = std::max(0.0, std::min({uniform(0.1, 0.3), 300.0 / tr.start_bpm - 1.0 - 1e-9,
                                                          1.0 - 30.0 / tr.start_bpm - 1e-9}));
                tr.rubato_period_sec = uniform(2.0, 8.0);
                tr.rubato_phase = uniform(0.0, 2.0 * std::numbers::pi);
                break;
        }
        char id[64];
        std::snprintf(id, sizeof id, "synth_%03zu_%s", i, to_string(tr.kind).c_str());
        out.push_back(synth_track(id, tr, spec.fps, spec.epsilon));
    }
    return out;
}

// ---------------------------------------------------------------------------

std::string to_string(Ppt ppt) {
    switch (ppt) {
        case Ppt::sppk: return "sppk";
        case Ppt::dp: return "dp";
        case Ppt::plpdp: return "plpdp";
        case Ppt::plpdp_g3: return "plpdp-g3";
        case Ppt::hmm: return "hmm";
    }
    return "unknown";
}

Ppt parse_ppt(const std::string& name) {
    for (Ppt p : {Ppt::sppk, Ppt::dp, Ppt::plpdp, Ppt::plpdp_g3, Ppt::hmm}) {
        if (to_string(p) == name) {
            return p;
        }
    }
    throw ConfigError("unknown post-processing tracker '" + name + "'");
}

double estimate_global_ibi(const NoveltyCurve& activation, const PptOptions& opts) {
    PlpdpConfig cfg;
    cfg.kernel_sizes_sec = {3.0};
    cfg.tempo_range = opts.tempo_range;
    cfg.harmonic_tie_tolerance = opts.harmonic_tie_tolerance;
    cfg.peaks = opts.peaks;
    const auto cond = plp_condition(activation, cfg);
    std::vector<double> ibi(cond.est_ibi_frames().begin(), cond.est_ibi_frames().end());
    auto mid = ibi.begin() + static_cast<std::ptrdiff_t>(ibi.size() / 2);
    std::nth_element(ibi.begin(), mid, ibi.end());
    return *mid;
}

double mean_ibi_frames(std::span<const double> beats_sec, int fps) {
    if (beats_sec.size() < 2) {
        throw ConfigError("mean IBI needs at least two reference beats");
    }
    return (beats_sec.back() - beats_sec.front()) / static_cast<double>(beats_sec.size() - 1) * fps;
}

BeatSequence run_ppt(Ppt ppt, const NoveltyCurve& activation, const PptOptions& opts) {
    const DpMode mode = opts.exact_dp ? DpMode::exact : DpMode::fast;
    switch (ppt) {
        case Ppt::sppk:
            return sppk_track(activation, opts.peaks);
        case Ppt::dp: {
            DpConfig cfg;
            cfg.delta0_frames = opts.dp_delta0_frames ? *opts.dp_delta0_frames : estimate_global_ibi(activation, opts);
            cfg.lambda0 = opts.lambda0;
            cfg.mode = mode;
            cfg.search_window_factor = opts.search_window_factor;
            return dp_track(activation, cfg);
        }
        case Ppt::plpdp:
        case Ppt::plpdp_g3: {
            PlpdpConfig cfg;
            cfg.kernel_sizes_sec = ppt == Ppt::plpdp ? opts.kernel_sizes_sec : std::vector<double>{3.0};
            cfg.tempo_range = opts.tempo_range;
            cfg.harmonic_tie_tolerance = opts.harmonic_tie_tolerance;
            cfg.peaks = opts.peaks;
            cfg.mode = mode;
            cfg.search_window_factor = opts.search_window_factor;
            return plpdp_pipeline(activation, cfg);
        }
        case Ppt::hmm:
            return hmm_track(activation, opts.hmm);
    }
    throw ConfigError("unknown post-processing tracker");
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn, unsigned threads) {
    if (threads == 0) {
        threads = std::max(1u, std::thread::hardware_concurrency());
    }
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            fn(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < n; i = next++) {
                    try {
                        fn(i);
                    } catch (...) {
                        std::lock_guard lock(error_mutex);
                        if (!error) {
                            error = std::current_exception();
                        }
                    }
                }
            });
        }
    }
    if (error) {
        std::rethrow_exception(error);
    }
}

BenchmarkResult synthetic_benchmark(std::span<const std::pair<std::string, std::vector<double>>> references,
                                    std::span<const Ppt> ppts, const PptOptions& opts,
                                    double tolerance_sec, unsigned threads) {
    const std::size_t n_ppt = ppts.size();
    std::vector<EvalReport> reports(references.size() * n_ppt);
    parallel_for(references.size(), [&](std::size_t i) {
        const auto& ref = references[i].second;
        const auto act = synth_activation(ref, kDefaultFps, kDefaultEpsilon, 1.0);
        for (std::size_t k = 0; k < n_ppt; ++k) {
            PptOptions local = opts;
            if (ppts[k] == Ppt::dp && ref.size() >= 2) {
                local.dp_delta0_frames = mean_ibi_frames(ref, act.grid().fps());
            }
            const auto est = run_ppt(ppts[k], act, local).seconds();
            reports[i * n_ppt + k] = fmeasure(est, ref, tolerance_sec);
        }
    }, threads);

    BenchmarkResult res;
    for (std::size_t i = 0; i < references.size(); ++i) {
        for (std::size_t k = 0; k < n_ppt; ++k) {
            res.rows.push_back({references[i].first, ppts[k], reports[i * n_ppt + k]});
        }
    }
    for (std::size_t k = 0; k < n_ppt; ++k) {
        std::vector<EvalReport> per;
        for (std::size_t i = 0; i < references.size(); ++i) {
            per.push_back(reports[i * n_ppt + k]);
        }
        res.means.emplace_back(ppts[k], mean_report(per));
    }
    return res;
}

}  // namespace plpdp
