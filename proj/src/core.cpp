#include "plpdp/core.hpp"

#include <algorithm>
#include <cmath>

namespace plpdp {

FrameGrid::FrameGrid(int fps, std::size_t n_frames) : fps_(fps), n_frames_(n_frames) {
    if (fps <= 0) {
        throw ConfigError("fps must be positive, got " + std::to_string(fps));
    }
    if (n_frames == 0) {
        throw ConfigError("frame grid must hold at least one frame");
    }
}

long long FrameGrid::nearest_frame(double sec) const noexcept {
    return std::llround(sec * fps_);
}

void TempoRange::validate() const {
    if (min_bpm <= 0 || min_bpm >= max_bpm) {
        throw ConfigError("invalid tempo range [" + std::to_string(min_bpm) + ", " +
                          std::to_string(max_bpm) + "] BPM");
    }
}

NoveltyCurve::NoveltyCurve(FrameGrid grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size()) {
        throw ConfigError("novelty length does not match frame grid");
    }
    for (double v : values_) {
        if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
            throw ParseError("novelty values must be finite and in [0, 1]");
        }
    }
}

BeatSequence::BeatSequence(FrameGrid grid, std::vector<Frame> frames)
    : grid_(grid), frames_(std::move(frames)) {
    for (std::size_t i = 0; i < frames_.size(); ++i) {
        if (!grid_.contains(frames_[i])) {
            throw ConfigError("beat frame " + std::to_string(frames_[i]) + " outside grid");
        }
        if (i > 0 && frames_[i] <= frames_[i - 1]) {
            throw ConfigError("beat frames must be strictly increasing");
        }
    }
}

std::vector<double> BeatSequence::seconds() const {
    std::vector<double> out;
    out.reserve(frames_.size());
    for (Frame f : frames_) {
        out.push_back(grid_.seconds(f));
    }
    return out;
}

double bpm_to_frames(double bpm, double fps) {
    if (!(bpm > 0.0) || !(fps > 0.0)) {
        throw std::domain_error("bpm_to_frames: bpm and fps must be positive");
    }
    return 60.0 * fps / bpm;
}

NoveltyCurve validate_novelty(std::span<const double> values, int fps) {
    if (values.empty()) {
        throw ParseError("novelty curve is empty");
    }
    std::vector<double> out(values.begin(), values.end());
    for (std::size_t i = 0; i < out.size(); ++i) {
        double& v = out[i];
        if (!std::isfinite(v)) {
            throw ParseError("non-finite novelty value at frame " + std::to_string(i));
        }
        if (v < -kClampTolerance || v > 1.0 + kClampTolerance) {
            throw ParseError("novelty value out of range at frame " + std::to_string(i));
        }
        v = std::clamp(v, 0.0, 1.0);
    }
    const FrameGrid grid(fps, out.size());
    return NoveltyCurve(grid, std::move(out));
}

}  // namespace plpdp
