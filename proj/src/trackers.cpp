#include "plpdp/trackers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

#include "plpdp/plp.hpp"

namespace plpdp {

// ---------------------------------------------------------------------------
// DP
// ---------------------------------------------------------------------------

double penalty(double delta, double delta0) {
    if (!(delta > 0.0) || !(delta0 > 0.0)) {
        throw std::domain_error("penalty: intervals must be positive");
    }
    const double r = std::log2(delta / delta0);
    return -(r * r);
}

DpState dp_forward(std::span<const double> novelty, std::span<const double> confidence,
                   std::span<const double> est_ibi, DpMode mode, double search_window_factor) {
    const std::size_t n_frames = novelty.size();
    if (confidence.size() != n_frames || est_ibi.size() != n_frames) {
        throw ConfigError("dp_forward: novelty and conditions differ in length");
    }
    if (mode == DpMode::fast && !(search_window_factor >= 1.0)) {
        throw ConfigError("search window factor must be at least 1");
    }
    std::vector<double> log2_lag(n_frames + 1, 0.0);
    for (std::size_t d = 1; d <= n_frames; ++d) {
        log2_lag[d] = std::log2(static_cast<double>(d));
    }

    DpState st;
    st.score.assign(n_frames, 0.0);
    st.predecessor.assign(n_frames, DpState::kNoPredecessor);
    for (std::size_t n = 0; n < n_frames; ++n) {
        const double lambda = confidence[n];
        const double log2_target = std::log2(est_ibi[n]);
        std::size_t lo = 0;
        std::size_t hi = n;  // exclusive
        if (mode == DpMode::fast) {
            const auto far = static_cast<long long>(std::ceil(search_window_factor * est_ibi[n]));
            const auto near = std::max(1LL, static_cast<long long>(std::floor(est_ibi[n] / search_window_factor)));
            const auto sn = static_cast<long long>(n);
            lo = static_cast<std::size_t>(std::max(0LL, sn - far));
            hi = static_cast<std::size_t>(std::max(0LL, sn - near + 1));
        }
        double best = -std::numeric_limits<double>::infinity();
        std::int64_t arg = DpState::kNoPredecessor;
        for (std::size_t m = lo; m < hi; ++m) {
            const double r = log2_lag[n - m] - log2_target;
            const double v = st.score[m] - lambda * r * r;
            if (v > best) {
                best = v;
                arg = static_cast<std::int64_t>(m);
            }
        }
        st.score[n] = novelty[n] + std::max(0.0, best);
        st.predecessor[n] = st.score[n] == novelty[n] ? DpState::kNoPredecessor : arg;
    }
    return st;
}

std::vector<Frame> dp_backward(const DpState& state) {
    // virtual frame "before the track" scores 0 and wins ties
    double best = 0.0;
    std::int64_t cur = DpState::kNoPredecessor;
    for (std::size_t n = 0; n < state.score.size(); ++n) {
        if (state.score[n] > best) {
            best = state.score[n];
            cur = static_cast<std::int64_t>(n);
        }
    }
    std::vector<Frame> beats;
    while (cur != DpState::kNoPredecessor) {
        beats.push_back(static_cast<Frame>(cur));
        cur = state.predecessor[static_cast<std::size_t>(cur)];
    }
    std::reverse(beats.begin(), beats.end());
    return beats;
}

double sequence_score(std::span<const double> novelty, std::span<const double> confidence,
                      std::span<const double> est_ibi, std::span<const Frame> beats) {
    double score = 0.0;
    for (std::size_t k = 0; k < beats.size(); ++k) {
        score += novelty[beats[k]];
        if (k > 0) {
            const Frame b = beats[k];
            score += confidence[b] * penalty(static_cast<double>(b - beats[k - 1]), est_ibi[b]);
        }
    }
    return score;
}

BeatSequence dp_track(const NoveltyCurve& activation, const DpConfig& cfg) {
    if (!(cfg.delta0_frames >= 1.0) || !std::isfinite(cfg.delta0_frames)) {
        throw ConfigError("DP: preassigned IBI must be at least one frame");
    }
    if (!(cfg.lambda0 >= 0.0) || !std::isfinite(cfg.lambda0)) {
        throw ConfigError("DP: lambda0 must be nonnegative");
    }
    const auto& grid = activation.grid();
    const std::vector<double> lambda(grid.size(), cfg.lambda0);
    const std::vector<double> ibi(grid.size(), cfg.delta0_frames);
    const auto st = dp_forward(activation.values(), lambda, ibi, cfg.mode, cfg.search_window_factor);
    return BeatSequence(grid, dp_backward(st));
}

BeatSequence plpdp_track(const NoveltyCurve& activation, const TempoCondition& condition,
                         DpMode mode, double search_window_factor) {
    if (!(activation.grid() == condition.grid())) {
        throw ConfigError("PLPDP: activation and condition live on different grids");
    }
    const auto st = dp_forward(activation.values(), condition.confidence(),
                               condition.est_ibi_frames(), mode, search_window_factor);
    return BeatSequence(activation.grid(), dp_backward(st));
}

TempoCondition plp_condition(const NoveltyCurve& activation, const PlpdpConfig& cfg) {
    const auto curve = combined_plp(activation, cfg.kernel_sizes_sec, cfg.tempo_range, cfg.harmonic_tie_tolerance);
    const auto peaks = pick_peaks(curve.values(), cfg.peaks);
    return to_condition(curve, peaks, cfg.condition);
}

BeatSequence plpdp_pipeline(const NoveltyCurve& activation, const PlpdpConfig& cfg) {
    return plpdp_track(activation, plp_condition(activation, cfg), cfg.mode, cfg.search_window_factor);
}

// ---------------------------------------------------------------------------
// SPPK
// ---------------------------------------------------------------------------

BeatSequence sppk_track(const NoveltyCurve& activation, const PeakPickConfig& cfg) {
    return BeatSequence(activation.grid(), pick_peaks(activation.values(), cfg));
}

// ---------------------------------------------------------------------------
// HMM
// ---------------------------------------------------------------------------

double tempo_transition(double psi_prev, double psi_cur, double lambda_trans) {
    if (!(psi_prev > 0.0)) {
        throw std::domain_error("tempo_transition: previous tempo must be positive");
    }
    return std::exp(-lambda_trans * std::abs(psi_cur / psi_prev - 1.0));
}

std::vector<int> hmm_tempo_states(const HmmConfig& cfg, int fps) {
    cfg.tempo_range.validate();
    const int shortest = static_cast<int>(std::lround(60.0 * fps / cfg.tempo_range.max_bpm));
    const int longest = static_cast<int>(std::lround(60.0 * fps / cfg.tempo_range.min_bpm));
    const int lo = std::max(1, shortest);
    if (longest < lo) {
        throw ConfigError("HMM tempo range is empty after discretization");
    }
    const auto n_all = static_cast<std::size_t>(longest - lo + 1);
    if (cfg.n_tempo_states == 0 || cfg.n_tempo_states >= n_all) {
        std::vector<int> out;
        for (int t = lo; t <= longest; ++t) {
            out.push_back(t);
        }
        return out;
    }
    // log-spaced intervals; rounding merges neighbours, so sample more densely
    // until enough distinct values exist
    std::set<int> picked;
    for (std::size_t num = cfg.n_tempo_states; picked.size() < cfg.n_tempo_states; ++num) {
        picked.clear();
        const double a = std::log(static_cast<double>(lo));
        const double b = std::log(static_cast<double>(longest));
        for (std::size_t i = 0; i < num; ++i) {
            const double frac = num == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(num - 1);
            picked.insert(static_cast<int>(std::lround(std::exp(a + frac * (b - a)))));
        }
    }
    return {picked.begin(), picked.end()};
}

namespace {

double safe_log(double p) {
    return std::log(std::max(p, std::numeric_limits<double>::min()));
}

std::size_t beat_states(int interval, double fraction) {
    const auto n = static_cast<std::size_t>(std::ceil(interval * fraction - 1e-12));
    return std::clamp<std::size_t>(n, 1, static_cast<std::size_t>(interval));
}

}  // namespace

HmmPath hmm_decode(const NoveltyCurve& activation, const HmmConfig& cfg) {
    if (!(cfg.lambda_trans >= 0.0)) {
        throw ConfigError("lambda_trans must be nonnegative");
    }
    if (!(cfg.observation_lambda > 0.0) || !(cfg.observation_beat_fraction > 0.0) ||
        cfg.observation_beat_fraction > 1.0) {
        throw ConfigError("invalid HMM observation parameters");
    }
    const auto& grid = activation.grid();
    const auto intervals = hmm_tempo_states(cfg, grid.fps());
    const std::size_t n_tempi = intervals.size();
    if (n_tempi > std::numeric_limits<std::uint16_t>::max()) {
        throw ConfigError("too many HMM tempo states");
    }
    const std::size_t n_frames = grid.size();

    // log transition weights at a phase wrap, renormalized per source tempo
    std::vector<double> log_trans(n_tempi * n_tempi);
    for (std::size_t i = 0; i < n_tempi; ++i) {
        const double from_bpm = 60.0 * grid.fps() / intervals[i];
        double total = 0.0;
        for (std::size_t j = 0; j < n_tempi; ++j) {
            const double to_bpm = 60.0 * grid.fps() / intervals[j];
            total += tempo_transition(from_bpm, to_bpm, cfg.lambda_trans);
        }
        for (std::size_t j = 0; j < n_tempi; ++j) {
            const double to_bpm = 60.0 * grid.fps() / intervals[j];
            log_trans[i * n_tempi + j] =
                safe_log(tempo_transition(from_bpm, to_bpm, cfg.lambda_trans) / total);
        }
    }

    std::vector<std::size_t> n_beat(n_tempi);
    std::size_t n_states = 0;
    for (std::size_t i = 0; i < n_tempi; ++i) {
        n_beat[i] = beat_states(intervals[i], cfg.observation_beat_fraction);
        n_states += static_cast<std::size_t>(intervals[i]);
    }

    // Each tempo keeps its phase scores in a ring buffer: logical phase p lives
    // at slot (p + offset) % interval, plus a shared additive base.
    std::vector<std::vector<double>> ring(n_tempi);
    std::vector<std::size_t> offset(n_tempi, 0);
    std::vector<double> base(n_tempi, 0.0);
    std::vector<std::uint16_t> back(n_frames * n_tempi, 0);

    const auto obs_beat = [&](Frame n) { return safe_log(activation[n]); };
    const auto obs_other = [&](Frame n) {
        return safe_log((1.0 - activation[n]) / cfg.observation_lambda);
    };

    const double log_init = -std::log(static_cast<double>(n_states));
    for (std::size_t i = 0; i < n_tempi; ++i) {
        const auto len = static_cast<std::size_t>(intervals[i]);
        ring[i].assign(len, log_init + obs_other(0));
        for (std::size_t p = 0; p < n_beat[i]; ++p) {
            ring[i][p] = log_init + obs_beat(0);
        }
    }

    std::vector<double> wrap_from(n_tempi);
    std::vector<double> wrap_to(n_tempi);
    for (Frame n = 1; n < n_frames; ++n) {
        const double ob = obs_beat(n);
        const double oo = obs_other(n);
        for (std::size_t i = 0; i < n_tempi; ++i) {
            const auto len = static_cast<std::size_t>(intervals[i]);
            wrap_from[i] = ring[i][(len - 1 + offset[i]) % len] + base[i];
        }
        for (std::size_t j = 0; j < n_tempi; ++j) {
            double best = -std::numeric_limits<double>::infinity();
            std::size_t arg = 0;
            for (std::size_t i = 0; i < n_tempi; ++i) {
                const double v = wrap_from[i] + log_trans[i * n_tempi + j];
                if (v > best) {
                    best = v;
                    arg = i;
                }
            }
            wrap_to[j] = best;
            back[n * n_tempi + j] = static_cast<std::uint16_t>(arg);
        }
        for (std::size_t i = 0; i < n_tempi; ++i) {
            const auto len = static_cast<std::size_t>(intervals[i]);
            auto& buf = ring[i];
            // advance phase: every logical index moves up by one
            offset[i] = (offset[i] + len - 1) % len;
            base[i] += oo;
            buf[offset[i]] = wrap_to[i] + oo - base[i];
            const double correction = ob - oo;
            for (std::size_t p = 0; p < n_beat[i]; ++p) {
                buf[(p + offset[i]) % len] += correction;
            }
        }
        // keep magnitudes bounded
        if (n % 1024 == 0) {
            double top = -std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < n_tempi; ++i) {
                top = std::max(top, base[i] + *std::max_element(ring[i].begin(), ring[i].end()));
            }
            if (std::isfinite(top)) {
                for (std::size_t i = 0; i < n_tempi; ++i) {
                    base[i] -= top;
                }
            }
        }
    }

    // best final state; ties go to the lower tempo index, then lower phase
    double best = -std::numeric_limits<double>::infinity();
    std::size_t cur_i = 0;
    std::size_t cur_p = 0;
    for (std::size_t i = 0; i < n_tempi; ++i) {
        const auto len = static_cast<std::size_t>(intervals[i]);
        for (std::size_t p = 0; p < len; ++p) {
            const double v = ring[i][(p + offset[i]) % len] + base[i];
            if (v > best) {
                best = v;
                cur_i = i;
                cur_p = p;
            }
        }
    }

    HmmPath path{std::vector<int>(n_frames), std::vector<int>(n_frames), 0.0, BeatSequence(grid)};
    for (Frame n = n_frames; n-- > 0;) {
        path.interval[n] = intervals[cur_i];
        path.phase[n] = static_cast<int>(cur_p);
        if (n == 0) {
            break;
        }
        if (cur_p > 0) {
            --cur_p;
        } else {
            cur_i = back[n * n_tempi + cur_i];
            cur_p = static_cast<std::size_t>(intervals[cur_i]) - 1;
        }
    }

    // exact log probability of the decoded path
    double lp = log_init;
    for (Frame n = 0; n < n_frames; ++n) {
        const auto beat_count = beat_states(path.interval[n], cfg.observation_beat_fraction);
        lp += static_cast<std::size_t>(path.phase[n]) < beat_count ? obs_beat(n) : obs_other(n);
        if (n > 0 && path.phase[n] == 0) {
            const auto from = std::lower_bound(intervals.begin(), intervals.end(), path.interval[n - 1]) -
                              intervals.begin();
            const auto to = std::lower_bound(intervals.begin(), intervals.end(), path.interval[n]) -
                            intervals.begin();
            lp += log_trans[static_cast<std::size_t>(from) * n_tempi + static_cast<std::size_t>(to)];
        }
    }
    path.log_probability = lp;

    std::vector<Frame> beats;
    for (Frame n = 0; n < n_frames; ++n) {
        if (path.phase[n] != 0) {
            continue;
        }
        Frame beat = n;
        if (cfg.correct_beats) {
            const auto run = beat_states(path.interval[n], cfg.observation_beat_fraction);
            for (Frame f = n + 1; f < std::min(n_frames, n + run); ++f) {
                if (activation[f] > activation[beat]) {
                    beat = f;
                }
            }
        }
        beats.push_back(beat);
    }
    path.beats = BeatSequence(grid, std::move(beats));
    return path;
}

BeatSequence hmm_track(const NoveltyCurve& activation, const HmmConfig& cfg) {
    return hmm_decode(activation, cfg).beats;
}

std::vector<GridSearchRow> grid_search_lambda_trans(std::span<const CorpusTrack> corpus,
                                                    std::span<const double> lambdas,
                                                    const HmmConfig& base, double tolerance_sec) {
    if (corpus.empty()) {
        throw ConfigError("grid search needs a non-empty corpus");
    }
    if (lambdas.empty()) {
        throw ConfigError("grid search needs at least one lambda_trans value");
    }
    std::vector<double> sorted(lambdas.begin(), lambdas.end());
    std::sort(sorted.begin(), sorted.end());
    std::vector<GridSearchRow> rows;
    rows.reserve(sorted.size());
    for (double lambda : sorted) {
        HmmConfig cfg = base;
        cfg.lambda_trans = lambda;
        std::vector<EvalReport> reports;
        reports.reserve(corpus.size());
        for (const auto& track : corpus) {
            const auto est = hmm_track(track.activation, cfg).seconds();
            reports.push_back(fmeasure(est, track.reference_sec, tolerance_sec));
        }
        rows.push_back({lambda, mean_report(reports)});
    }
    return rows;
}

std::vector<double> default_lambda_grid() {
    std::vector<double> out;
    for (int v = 0; v <= 20; ++v) {
        out.push_back(v);
    }
    for (int v = 25; v <= 100; v += 5) {
        out.push_back(v);
    }
    return out;
}

}  // namespace plpdp
