#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "plpdp/conditions.hpp"
#include "plpdp/core.hpp"
#include "plpdp/evaluation.hpp"
#include "plpdp/plp.hpp"

namespace plpdp {

// ---------------------------------------------------------------------------
// Dynamic programming (global tempo and PLP-conditioned)
// ---------------------------------------------------------------------------

enum class DpMode {
    exact,  ///< predecessors m ∈ [0, n-1]
    fast,   ///< predecessors m ∈ [n - ceil(w·δ̂(n)), n - floor(δ̂(n)/w)]
};

struct DpConfig {
    double delta0_frames = 50.0;  ///< preassigned IBI δ̂₀
    double lambda0 = 100.0;
    double search_window_factor = 4.0;
    DpMode mode = DpMode::exact;
};

/// Forward pass bookkeeping. predecessor[n] == kNoPredecessor marks a beat
/// sequence that starts at n.
struct DpState {
    static constexpr std::int64_t kNoPredecessor = -1;
    std::vector<double> score;
    std::vector<std::int64_t> predecessor;
};

/// Tempo-consistency penalty -(log2(delta / delta0))^2.
double penalty(double delta, double delta0);

/// Forward recursion
///   D(n) = Δ(n) + max{0, max_m D(m) + λ(n)·penalty(n - m, δ̂(n))}
/// with the condition read at the later frame n.
DpState dp_forward(std::span<const double> novelty, std::span<const double> confidence,
                   std::span<const double> est_ibi, DpMode mode = DpMode::exact,
                   double search_window_factor = 4.0);

/// Backtracking from the best-scoring frame. Returns an empty list when no
/// frame scores above zero. Ties prefer the earlier frame.
std::vector<Frame> dp_backward(const DpState& state);

/// C(B) = Σ Δ(b_k) + Σ_{k≥2} λ(b_k)·penalty(b_k - b_{k-1}, δ̂(b_k)).
double sequence_score(std::span<const double> novelty, std::span<const double> confidence,
                      std::span<const double> est_ibi, std::span<const Frame> beats);

/// Global-tempo DP: constant δ̂₀ and λ₀.
BeatSequence dp_track(const NoveltyCurve& activation, const DpConfig& cfg);

/// DP driven by frame-wise tempo conditions.
BeatSequence plpdp_track(const NoveltyCurve& activation, const TempoCondition& condition,
                         DpMode mode = DpMode::exact, double search_window_factor = 4.0);

struct PlpdpConfig {
    std::vector<double> kernel_sizes_sec{1.0, 3.0, 5.0};
    TempoRange tempo_range{};
    double harmonic_tie_tolerance = kDefaultHarmonicTieTolerance;
    PeakPickConfig peaks{};
    ConditionConfig condition{};
    DpMode mode = DpMode::fast;
    double search_window_factor = 4.0;
};

/// Condition derived from the (combined) PLP of the activation.
TempoCondition plp_condition(const NoveltyCurve& activation, const PlpdpConfig& cfg = {});

/// Full pipeline: PLP per kernel, product, peaks, conditions, DP.
/// Kernel sizes {3} give the single-kernel ablation.
BeatSequence plpdp_pipeline(const NoveltyCurve& activation, const PlpdpConfig& cfg = {});

// ---------------------------------------------------------------------------
// Peak picking and HMM baselines
// ---------------------------------------------------------------------------

/// Every activation peak (default SPPK thresholds) is a beat.
BeatSequence sppk_track(const NoveltyCurve& activation, const PeakPickConfig& cfg = {});

/// exp(-lambda_trans * |psi_cur / psi_prev - 1|), tempi in BPM.
double tempo_transition(double psi_prev, double psi_cur, double lambda_trans);

struct HmmConfig {
    double lambda_trans = 100.0;
    TempoRange tempo_range{};
    /// 0 keeps every integer beat interval in range; otherwise that many
    /// log-spaced intervals.
    std::size_t n_tempo_states = 0;
    double observation_beat_fraction = 1.0 / 16.0;
    double observation_lambda = 16.0;
    /// Place each beat at the activation maximum of its beat-state run
    /// instead of the raw phase wrap frame.
    bool correct_beats = true;
};

/// Beat intervals (frames per beat) of the tempo states, ascending.
std::vector<int> hmm_tempo_states(const HmmConfig& cfg, int fps);

struct HmmPath {
    std::vector<int> interval;  ///< tempo state (frames per beat) per frame
    std::vector<int> phase;     ///< 0 at a beat, counts up to interval - 1
    double log_probability = 0.0;
    BeatSequence beats;
};

/// Viterbi decoding over (tempo, phase). Phase advances one frame per step;
/// the tempo may only change when the phase wraps.
HmmPath hmm_decode(const NoveltyCurve& activation, const HmmConfig& cfg = {});

BeatSequence hmm_track(const NoveltyCurve& activation, const HmmConfig& cfg = {});

/// One track of an evaluation corpus.
struct CorpusTrack {
    std::string id;
    NoveltyCurve activation;
    std::vector<double> reference_sec;
};

struct GridSearchRow {
    double lambda_trans = 0.0;
    EvalReport report;  ///< dataset mean over tracks
};

/// hmm_track over the corpus for each λ_trans; rows sorted by λ_trans.
std::vector<GridSearchRow> grid_search_lambda_trans(std::span<const CorpusTrack> corpus,
                                                    std::span<const double> lambdas,
                                                    const HmmConfig& base = {},
                                                    double tolerance_sec = 0.070);

/// λ_trans values 0..20 in steps of 1, then 25..100 in steps of 5.
std::vector<double> default_lambda_grid();

}  // namespace plpdp
