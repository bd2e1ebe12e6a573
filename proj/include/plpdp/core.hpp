#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace plpdp {

/// Malformed input data (unparsable file, non-finite or out-of-range values).
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid parameters or configuration.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Index into a frame grid. Frames are stored 0-based: frame i sits at i / fps seconds.
using Frame = std::size_t;

inline constexpr int kDefaultFps = 100;

/// Sampled time axis shared by every frame-rate curve.
class FrameGrid {
public:
    FrameGrid(int fps, std::size_t n_frames);

    int fps() const noexcept { return fps_; }
    std::size_t size() const noexcept { return n_frames_; }

    double seconds(Frame n) const noexcept { return static_cast<double>(n) / fps_; }
    /// Nearest frame to a time in seconds; may lie outside the grid.
    long long nearest_frame(double sec) const noexcept;
    bool contains(Frame n) const noexcept { return n < n_frames_; }

    friend bool operator==(const FrameGrid&, const FrameGrid&) = default;

private:
    int fps_;
    std::size_t n_frames_;
};

struct TempoRange {
    int min_bpm = 30;
    int max_bpm = 300;

    void validate() const;
    friend bool operator==(const TempoRange&, const TempoRange&) = default;
};

/// Activation (novelty) function with values in [0, 1].
class NoveltyCurve {
public:
    NoveltyCurve(FrameGrid grid, std::vector<double> values);

    const FrameGrid& grid() const noexcept { return grid_; }
    std::span<const double> values() const noexcept { return values_; }
    double operator[](Frame n) const { return values_[n]; }
    std::size_t size() const noexcept { return values_.size(); }

private:
    FrameGrid grid_;
    std::vector<double> values_;
};

/// Strictly increasing beat frames on a grid.
class BeatSequence {
public:
    explicit BeatSequence(FrameGrid grid, std::vector<Frame> frames = {});

    const FrameGrid& grid() const noexcept { return grid_; }
    std::span<const Frame> frames() const noexcept { return frames_; }
    std::size_t size() const noexcept { return frames_.size(); }
    bool empty() const noexcept { return frames_.empty(); }

    std::vector<double> seconds() const;

private:
    FrameGrid grid_;
    std::vector<Frame> frames_;
};

/// Frames per beat at the given tempo: 60 * fps / bpm.
double bpm_to_frames(double bpm, double fps);

/// Values further than this outside [0, 1] are rejected instead of clamped.
inline constexpr double kClampTolerance = 1e-9;

NoveltyCurve validate_novelty(std::span<const double> values, int fps = kDefaultFps);

}  // namespace plpdp
