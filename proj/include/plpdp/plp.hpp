#pragma once

#include <complex>
#include <span>
#include <string>
#include <vector>

#include "plpdp/core.hpp"

namespace plpdp {

inline constexpr double kDefaultHarmonicTieTolerance = 0.01;

struct TempogramConfig {
    double kernel_size_sec = 3.0;  ///< analysis window length in seconds
    int hop_frames = 1;
    TempoRange tempo_range{};
    double tempo_step_bpm = 1.0;
    /// Tempo peaks whose magnitude is within this fraction of the strongest
    /// one count as tied and the slowest wins. The harmonics of a pulse train
    /// have equal magnitude; 0 gives the plain argmax.
    double harmonic_tie_tolerance = kDefaultHarmonicTieTolerance;

    /// Window length in frames, round(kernel_size_sec * fps).
    std::size_t window_length(int fps) const;
    /// Tempo grid min_bpm, min_bpm + step, ... <= max_bpm.
    std::vector<double> tempi() const;
    void validate(int fps) const;
};

/// Config for one PLP kernel size. The lower tempo bound is raised so that the
/// window holds at least one full period: [60, 300] for 1 s, [30, 300] for 3 s and 5 s.
TempogramConfig kernel_config(double kernel_size_sec, TempoRange range = {},
                              double harmonic_tie_tolerance = kDefaultHarmonicTieTolerance);

/// Complex Fourier tempogram sampled at analysis frames (every hop_frames).
class Tempogram {
public:
    Tempogram(FrameGrid grid, TempogramConfig cfg, std::vector<double> tempi,
              std::vector<Frame> centers, std::vector<std::complex<double>> coeffs);

    const FrameGrid& grid() const noexcept { return grid_; }
    const TempogramConfig& config() const noexcept { return cfg_; }
    std::span<const double> tempi() const noexcept { return tempi_; }
    std::span<const Frame> centers() const noexcept { return centers_; }

    std::size_t n_frames() const noexcept { return centers_.size(); }
    std::size_t n_tempi() const noexcept { return tempi_.size(); }

    /// Coefficient at analysis frame j, tempo bin k.
    std::complex<double> at(std::size_t j, std::size_t k) const { return coeffs_[j * tempi_.size() + k]; }
    std::span<const std::complex<double>> row(std::size_t j) const {
        return std::span(coeffs_).subspan(j * tempi_.size(), tempi_.size());
    }

private:
    FrameGrid grid_;
    TempogramConfig cfg_;
    std::vector<double> tempi_;
    std::vector<Frame> centers_;
    std::vector<std::complex<double>> coeffs_;
};

/// Locally best-fitting sinusoid: cos(2*pi*(tempo_bpm/60)*t - phase), t in seconds.
struct OptimalKernel {
    Frame center_frame = 0;
    double tempo_bpm = 0.0;
    double phase = 0.0;  ///< radians in [0, 2*pi)
    double magnitude = 0.0;
};

class PlpCurve {
public:
    PlpCurve(FrameGrid grid, std::vector<double> values, std::string kernel_tag);

    const FrameGrid& grid() const noexcept { return grid_; }
    std::span<const double> values() const noexcept { return values_; }
    double operator[](Frame n) const { return values_[n]; }
    std::size_t size() const noexcept { return values_.size(); }
    const std::string& kernel_tag() const noexcept { return tag_; }

private:
    FrameGrid grid_;
    std::vector<double> values_;
    std::string tag_;
};

/// Hann window of length L (symmetric, zero end points).
std::vector<double> hann_window(std::size_t length);

/// Windowed Fourier coefficients of the novelty curve for every analysis frame
/// and grid tempo. Windows are centered on the analysis frame and zero-padded
/// outside the grid.
Tempogram fourier_tempogram(const NoveltyCurve& novelty, const TempogramConfig& cfg);

/// Predominant tempo and matching phase per analysis frame: the lowest-tempo
/// local maximum of |c| tied (within harmonic_tie_tolerance) with the global
/// maximum. All-zero windows resolve to the lowest bin with phase 0.
std::vector<OptimalKernel> optimal_kernels(const Tempogram& tempogram);

/// Predominant local pulse: overlap-add of the optimal windowed unit cosines,
/// half-wave rectified and normalized by the accumulated window weight.
PlpCurve plp(const NoveltyCurve& novelty, const TempogramConfig& cfg);

/// Same as plp() for an already computed tempogram.
PlpCurve plp_from_tempogram(const Tempogram& tempogram);

/// Element-wise product of PLP curves sharing one grid.
PlpCurve combine_plp(std::span<const PlpCurve> curves);

/// Γ^com for the given kernel sizes (seconds), each with its kernel_config().
PlpCurve combined_plp(const NoveltyCurve& novelty, std::span<const double> kernel_sizes_sec,
                      TempoRange range = {}, double harmonic_tie_tolerance = kDefaultHarmonicTieTolerance);

}  // namespace plpdp
