#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "plpdp/core.hpp"
#include "plpdp/evaluation.hpp"
#include "plpdp/trackers.hpp"

namespace plpdp {

inline constexpr double kDefaultEpsilon = 1e-6;

/// Pulse train: 1 - epsilon at each reference beat frame, epsilon elsewhere.
NoveltyCurve synth_activation(std::span<const double> beats_sec, const FrameGrid& grid,
                              double epsilon = kDefaultEpsilon);

/// Same, with a grid running `tail_sec` past the last beat.
NoveltyCurve synth_activation(std::span<const double> beats_sec, int fps = kDefaultFps,
                              double epsilon = kDefaultEpsilon, double tail_sec = 1.0);

struct StabilityResult {
    bool stable = false;
    bool defined = false;  ///< false when fewer than two beats
};

/// A track is stable when every per-IBI tempo divided by the track's mean
/// tempo lies in [1 - tol, 1 + tol].
StabilityResult tempo_stability(std::span<const double> beats_sec, double tol = 0.04);

struct StabilityReport {
    std::vector<std::string> track_ids;
    std::vector<StabilityResult> results;
    double rate = 0.0;  ///< stable tracks / all tracks
};

StabilityReport stability_report(std::span<const std::pair<std::string, std::vector<double>>> tracks,
                                 double tol = 0.04);

/// (b_i, b_{i+1} - b_i) pairs in seconds.
std::vector<std::pair<double, double>> ibi_progression(std::span<const double> beats_sec);

// ---------------------------------------------------------------------------
// Synthetic tempo trajectories
// ---------------------------------------------------------------------------

enum class TrajectoryKind { constant, ramp, step, rubato };

std::string to_string(TrajectoryKind kind);

struct TrajectorySpec {
    TrajectoryKind kind = TrajectoryKind::constant;
    double start_bpm = 120.0;
    double end_bpm = 120.0;  ///< ramp target or tempo after the step
    double duration_sec = 60.0;
    double start_sec = 1.0;  ///< time of the first beat
    double rubato_depth = 0.1;
    double rubato_period_sec = 8.0;
    double rubato_phase = 0.0;

    /// Tempo at `t` seconds after the first beat.
    double bpm_at(double t) const;
    void validate() const;
};

/// Beats from start_sec up to start_sec + duration_sec, each spaced by the
/// tempo at the preceding beat.
std::vector<double> synth_beats(const TrajectorySpec& spec);

struct SynthTrack {
    std::string id;
    TrajectorySpec spec;
    std::vector<double> reference_sec;
    NoveltyCurve activation;
};

SynthTrack synth_track(std::string id, const TrajectorySpec& spec, int fps = kDefaultFps,
                       double epsilon = kDefaultEpsilon);

struct CorpusSpec {
    std::size_t n_tracks = 50;
    double duration_sec = 60.0;
    std::uint64_t seed = 0;
    int fps = kDefaultFps;
    double epsilon = kDefaultEpsilon;
    /// Start tempi are log-uniform in this band. Below 60 BPM the 1 s PLP
    /// kernel cannot hold a full period.
    double min_start_bpm = 60.0;
    double max_start_bpm = 200.0;
    /// Track i uses kinds[i % kinds.size()].
    std::vector<TrajectoryKind> kinds{TrajectoryKind::constant, TrajectoryKind::ramp,
                                      TrajectoryKind::step, TrajectoryKind::rubato};
};

/// Random trajectories inside 30-300 BPM; identical for identical specs.
std::vector<SynthTrack> synth_corpus(const CorpusSpec& spec);

// ---------------------------------------------------------------------------
// Running trackers by name
// ---------------------------------------------------------------------------

enum class Ppt { sppk, dp, plpdp, plpdp_g3, hmm };

std::string to_string(Ppt ppt);
/// Accepts sppk, dp, plpdp, plpdp-g3, hmm. Throws ConfigError otherwise.
Ppt parse_ppt(const std::string& name);

struct PptOptions {
    std::optional<double> dp_delta0_frames;  ///< unset: estimated from the Γ³ condition
    double lambda0 = 100.0;
    bool exact_dp = false;
    double search_window_factor = 4.0;
    std::vector<double> kernel_sizes_sec{1.0, 3.0, 5.0};
    TempoRange tempo_range{};  ///< PLP tempo grid bounds
    double harmonic_tie_tolerance = kDefaultHarmonicTieTolerance;
    HmmConfig hmm{};
    PeakPickConfig peaks{};
};

/// Median estimated IBI of the single-kernel (3 s) PLP condition.
double estimate_global_ibi(const NoveltyCurve& activation, const PptOptions& opts = {});

/// Mean inter-beat interval of a reference in frames (DP+GT).
double mean_ibi_frames(std::span<const double> beats_sec, int fps);

BeatSequence run_ppt(Ppt ppt, const NoveltyCurve& activation, const PptOptions& opts = {});

/// Runs `fn(i)` for i in [0, n) on up to `threads` workers (0 = hardware
/// concurrency). Results must be written by index.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn, unsigned threads = 0);

struct BenchmarkRow {
    std::string track_id;
    Ppt ppt;
    EvalReport report;
};

struct BenchmarkResult {
    std::vector<BenchmarkRow> rows;  ///< track-major, in input order
    std::vector<std::pair<Ppt, EvalReport>> means;
};

/// Synthetic scenario: each reference becomes a pulse-train activation, every
/// tracker runs on it and is scored against the reference. DP runs with the
/// reference mean IBI (DP+GT).
BenchmarkResult synthetic_benchmark(std::span<const std::pair<std::string, std::vector<double>>> references,
                                    std::span<const Ppt> ppts, const PptOptions& opts = {},
                                    double tolerance_sec = kDefaultToleranceSec, unsigned threads = 0);

}  // namespace plpdp
