#pragma once

#include <span>
#include <vector>

#include "plpdp/core.hpp"
#include "plpdp/plp.hpp"

namespace plpdp {

/// Thresholds of the simple peak picker. The 7-frame distance equals the
/// ±70 ms evaluation tolerance at 100 FPS.
struct PeakPickConfig {
    double min_height = 0.1;
    std::size_t min_distance_frames = 7;
    double min_prominence = 0.1;
};

/// Topographic prominence of the local maximum at `peak`: its height minus the
/// higher of the two minima found walking outwards to the nearest strictly
/// higher sample (or the array edge).
double peak_prominence(std::span<const double> curve, Frame peak);

/// Simple peak picking (SPPK).
///
/// Candidates are local maxima (flat tops resolve to their middle sample,
/// rounding down; the first and last sample never qualify). Filters run in
/// this order: height, distance, prominence. The distance filter visits peaks
/// by decreasing height, earlier frame first on ties, and drops every
/// remaining peak closer than `min_distance_frames` to a kept one.
std::vector<Frame> pick_peaks(std::span<const double> curve, const PeakPickConfig& cfg = {});

/// Piecewise-constant confidence λ(n) and estimated IBI δ̂(n) derived from PLP peaks.
class TempoCondition {
public:
    TempoCondition(FrameGrid grid, std::vector<double> confidence, std::vector<double> est_ibi_frames);

    /// Same λ and δ̂ at every frame.
    static TempoCondition constant(FrameGrid grid, double confidence, double est_ibi_frames);

    const FrameGrid& grid() const noexcept { return grid_; }
    std::span<const double> confidence() const noexcept { return confidence_; }
    std::span<const double> est_ibi_frames() const noexcept { return est_ibi_; }

private:
    FrameGrid grid_;
    std::vector<double> confidence_;
    std::vector<double> est_ibi_;
};

struct ConditionConfig {
    double anchor_epsilon = 0.01;
    double fallback_bpm = 120.0;
    double fallback_confidence = 0.1;
};

/// Right-side anchor of each peak: first frame after it where the curve drops
/// below `epsilon` or stops decreasing, whichever comes first.
std::vector<Frame> right_anchors(std::span<const double> curve, std::span<const Frame> peaks,
                                 double epsilon = 0.01);

/// Converts PLP peaks into tempo conditions. Segment k spans (a_k, a_{k+1}] and
/// carries the inter-peak interval b_{k+1} - b_k and the mean of the two peak
/// heights. Frames before the first segment and after the last copy the
/// nearest segment. With fewer than two peaks the condition is constant:
/// 120 BPM, and confidence equal to the single peak's height (0.1 with none).
TempoCondition to_condition(const PlpCurve& plp, std::span<const Frame> peaks,
                            const ConditionConfig& cfg = {});

/// Explicit-anchor form of to_condition().
TempoCondition segment_condition(const PlpCurve& plp, std::span<const Frame> peaks,
                                 std::span<const Frame> anchors, const ConditionConfig& cfg = {});

}  // namespace plpdp
