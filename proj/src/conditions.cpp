#include "plpdp/conditions.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace plpdp {

namespace {

std::vector<Frame> local_maxima(std::span<const double> x) {
    std::vector<Frame> peaks;
    if (x.size() < 3) {
        return peaks;
    }
    const std::size_t last = x.size() - 1;
    std::size_t i = 1;
    while (i < last) {
        if (x[i - 1] < x[i]) {
            std::size_t ahead = i + 1;
            while (ahead < last && x[ahead] == x[i]) {
                ++ahead;
            }
            if (x[ahead] < x[i]) {
                peaks.push_back((i + ahead - 1) / 2);
                i = ahead;
            }
        }
        ++i;
    }
    return peaks;
}

std::vector<Frame> select_by_distance(std::span<const double> x, std::span<const Frame> peaks,
                                      std::size_t distance) {
    std::vector<std::size_t> order(peaks.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return x[peaks[a]] > x[peaks[b]]; });
    std::vector<bool> keep(peaks.size(), true);
    for (std::size_t idx : order) {
        if (!keep[idx]) {
            continue;
        }
        for (std::size_t j = idx; j-- > 0;) {
            if (peaks[idx] - peaks[j] >= distance) {
                break;
            }
            keep[j] = false;
        }
        for (std::size_t j = idx + 1; j < peaks.size(); ++j) {
            if (peaks[j] - peaks[idx] >= distance) {
                break;
            }
            keep[j] = false;
        }
    }
    std::vector<Frame> out;
    for (std::size_t i = 0; i < peaks.size(); ++i) {
        if (keep[i]) {
            out.push_back(peaks[i]);
        }
    }
    return out;
}

void check_grid(const FrameGrid& grid, std::size_t confidence_size, std::size_t ibi_size) {
    if (confidence_size != grid.size() || ibi_size != grid.size()) {
        throw ConfigError("tempo condition arrays must match the frame grid");
    }
}

}  // namespace

double peak_prominence(std::span<const double> x, Frame peak) {
    const double h = x[peak];
    double left_min = h;
    for (std::size_t i = peak + 1; i-- > 0;) {
        if (x[i] > h) {
            break;
        }
        left_min = std::min(left_min, x[i]);
    }
    double right_min = h;
    for (std::size_t i = peak; i < x.size(); ++i) {
        if (x[i] > h) {
            break;
        }
        right_min = std::min(right_min, x[i]);
    }
    return h - std::max(left_min, right_min);
}

std::vector<Frame> pick_peaks(std::span<const double> curve, const PeakPickConfig& cfg) {
    std::vector<Frame> peaks;
    for (Frame p : local_maxima(curve)) {
        if (curve[p] >= cfg.min_height) {
            peaks.push_back(p);
        }
    }
    if (cfg.min_distance_frames > 1) {
        peaks = select_by_distance(curve, peaks, cfg.min_distance_frames);
    }
    std::erase_if(peaks, [&](Frame p) { return peak_prominence(curve, p) < cfg.min_prominence; });
    return peaks;
}

TempoCondition::TempoCondition(FrameGrid grid, std::vector<double> confidence,
                               std::vector<double> est_ibi_frames)
    : grid_(grid), confidence_(std::move(confidence)), est_ibi_(std::move(est_ibi_frames)) {
    check_grid(grid_, confidence_.size(), est_ibi_.size());
    for (std::size_t n = 0; n < est_ibi_.size(); ++n) {
        if (!(est_ibi_[n] > 0.0) || !std::isfinite(est_ibi_[n])) {
            throw ConfigError("estimated IBI must be positive and finite");
        }
        if (!(confidence_[n] >= 0.0) || !std::isfinite(confidence_[n])) {
            throw ConfigError("confidence must be nonnegative and finite");
        }
    }
}

TempoCondition TempoCondition::constant(FrameGrid grid, double confidence, double est_ibi_frames) {
    return TempoCondition(grid, std::vector<double>(grid.size(), confidence),
                          std::vector<double>(grid.size(), est_ibi_frames));
}

std::vector<Frame> right_anchors(std::span<const double> curve, std::span<const Frame> peaks,
                                 double epsilon) {
    std::vector<Frame> anchors;
    anchors.reserve(peaks.size());
    const std::size_t last = curve.empty() ? 0 : curve.size() - 1;
    for (Frame b : peaks) {
        Frame j = std::min(b + 1, last);
        while (j < last && curve[j] >= epsilon && curve[j + 1] <= curve[j]) {
            ++j;
        }
        anchors.push_back(j);
    }
    return anchors;
}

TempoCondition segment_condition(const PlpCurve& plp, std::span<const Frame> peaks,
                                 std::span<const Frame> anchors, const ConditionConfig& cfg) {
    const auto& grid = plp.grid();
    if (peaks.size() < 2) {
        const double confidence = peaks.empty() ? cfg.fallback_confidence : plp[peaks.front()];
        return TempoCondition::constant(grid, confidence, bpm_to_frames(cfg.fallback_bpm, grid.fps()));
    }
    if (anchors.size() != peaks.size()) {
        throw ConfigError("one anchor per peak required");
    }
    const std::size_t n = grid.size();
    std::vector<double> confidence(n), ibi(n);
    const std::size_t n_segments = peaks.size() - 1;
    // segment k covers frames (anchors[k], anchors[k+1]]; the first also takes
    // [0, anchors[0]] and the last takes everything after anchors[K-1]
    for (std::size_t k = 0; k < n_segments; ++k) {
        const double interval = static_cast<double>(peaks[k + 1] - peaks[k]);
        const double height = 0.5 * (plp[peaks[k]] + plp[peaks[k + 1]]);
        const std::size_t begin = k == 0 ? 0 : anchors[k] + 1;
        const std::size_t end = k + 1 == n_segments ? n : std::min(n, anchors[k + 1] + 1);
        for (std::size_t f = begin; f < end; ++f) {
            confidence[f] = height;
            ibi[f] = interval;
        }
    }
    return TempoCondition(grid, std::move(confidence), std::move(ibi));
}

TempoCondition to_condition(const PlpCurve& plp, std::span<const Frame> peaks,
                            const ConditionConfig& cfg) {
    const auto anchors = right_anchors(plp.values(), peaks, cfg.anchor_epsilon);
    return segment_condition(plp, peaks, anchors, cfg);
}

}  // namespace plpdp
