#include "plpdp/plp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace plpdp {

namespace {

using cplx = std::complex<double>;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// e^{i * 2*pi * cycles}, reducing the argument to one period first.
cplx unit_phasor(double cycles) {
    const double frac = cycles - std::floor(cycles);
    return std::polar(1.0, kTwoPi * frac);
}

/// Plain complex product (std::complex's operator* also handles inf/nan cases
/// we never produce, at a large cost).
inline cplx mul(cplx a, cplx b) {
    return {a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real()};
}

/// Frames between exact re-evaluations of a rotating phasor.
constexpr std::size_t kReanchorEvery = 64;

long long window_start(Frame center, std::size_t length) {
    return static_cast<long long>(center) - static_cast<long long>(length / 2);
}

std::vector<Frame> analysis_centers(std::size_t n_frames, int hop) {
    std::vector<Frame> centers;
    for (Frame c = 0; c < n_frames; c += static_cast<Frame>(hop)) {
        centers.push_back(c);
    }
    return centers;
}

/// Computes Hann-windowed Fourier sums for all analysis frames at one tempo in
/// O(N) via prefix sums. The Hann window splits into three complex exponentials,
/// so each window sum is a combination of three rectangular-window sums.
class ColumnEvaluator {
public:
    ColumnEvaluator(std::span<const double> x, std::size_t length)
        : x_(x), length_(length), shifts_(length - 1), mod_(x.size()), nonzero_(x.size() + 1, 0),
          p0_(x.size() + 1), pp_(x.size() + 1), pm_(x.size() + 1) {
        const double period = static_cast<double>(length - 1);
        for (std::size_t r = 0; r + 1 < length; ++r) {
            shifts_[r] = unit_phasor(static_cast<double>(r) / period);
        }
        for (std::size_t t = 0; t < x.size(); ++t) {
            mod_[t] = shifts_[t % (length - 1)];
            nonzero_[t + 1] = nonzero_[t] + (x[t] != 0.0 ? 1 : 0);
        }
    }

    /// omega in cycles per frame.
    void evaluate(double omega, std::span<const Frame> centers, std::span<cplx> out) {
        const std::size_t n = x_.size();
        p0_[0] = pp_[0] = pm_[0] = cplx{};
        const cplx step = unit_phasor(-omega);
        cplx z;
        for (std::size_t t = 0; t < n; ++t) {
            z = t % kReanchorEvery == 0 ? unit_phasor(-omega * static_cast<double>(t)) : mul(z, step);
            const cplx a = x_[t] * z;
            p0_[t + 1] = p0_[t] + a;
            pp_[t + 1] = pp_[t] + mul(a, mod_[t]);
            pm_[t + 1] = pm_[t] + mul(a, std::conj(mod_[t]));
        }
        for (std::size_t j = 0; j < centers.size(); ++j) {
            const long long s = window_start(centers[j], length_);
            const long long lo = std::max<long long>(0, s);
            const long long hi = std::min<long long>(static_cast<long long>(n) - 1,
                                                     s + static_cast<long long>(length_) - 1);
            if (hi < lo || nonzero_[hi + 1] == nonzero_[lo]) {
                out[j] = cplx{};
                continue;
            }
            const cplx s0 = p0_[hi + 1] - p0_[lo];
            const cplx sp = pp_[hi + 1] - pp_[lo];
            const cplx sm = pm_[hi + 1] - pm_[lo];
            const long long r = ((s % static_cast<long long>(length_ - 1)) +
                                 static_cast<long long>(length_ - 1)) %
                                static_cast<long long>(length_ - 1);
            const cplx shift = shifts_[static_cast<std::size_t>(r)];
            out[j] = 0.5 * s0 - 0.25 * mul(std::conj(shift), sp) - 0.25 * mul(shift, sm);
        }
    }

private:
    std::span<const double> x_;
    std::size_t length_;
    std::vector<cplx> shifts_;  ///< e^{i*2*pi*r/(L-1)}, r in [0, L-1)
    std::vector<cplx> mod_;
    std::vector<std::size_t> nonzero_;
    std::vector<cplx> p0_, pp_, pm_;
};

OptimalKernel make_kernel(Frame center, double tempo, cplx c) {
    OptimalKernel k;
    k.center_frame = center;
    k.tempo_bpm = tempo;
    k.magnitude = std::abs(c);
    if (k.magnitude > 0.0) {
        double phase = -std::arg(c);
        if (phase < 0.0) {
            phase += kTwoPi;
        }
        k.phase = phase >= kTwoPi ? 0.0 : phase;
    }
    return k;
}

PlpCurve overlap_add(const FrameGrid& grid, std::size_t length,
                     std::span<const OptimalKernel> kernels, std::string tag) {
    const std::size_t n = grid.size();
    const auto window = hann_window(length);
    std::vector<double> acc(n, 0.0);
    std::vector<double> weight(n, 0.0);
    const double fps = grid.fps();
    for (const auto& k : kernels) {
        const long long s = window_start(k.center_frame, length);
        const long long lo = std::max<long long>(0, s);
        const long long hi = std::min<long long>(static_cast<long long>(n) - 1,
                                                 s + static_cast<long long>(length) - 1);
        const double omega = k.tempo_bpm / 60.0 / fps;
        // cos(2*pi*omega*t - phase) via a rotating phasor, re-anchored per kernel
        cplx z = unit_phasor(omega * static_cast<double>(lo) - k.phase / kTwoPi);
        const cplx step = unit_phasor(omega);
        for (long long t = lo; t <= hi; ++t) {
            const double w = window[static_cast<std::size_t>(t - s)];
            acc[static_cast<std::size_t>(t)] += w * z.real();
            weight[static_cast<std::size_t>(t)] += w;
            z = mul(z, step);
        }
    }
    for (std::size_t t = 0; t < n; ++t) {
        acc[t] = weight[t] > 0.0 ? std::clamp(acc[t] / weight[t], 0.0, 1.0) : 0.0;
    }
    return PlpCurve(grid, std::move(acc), std::move(tag));
}

std::string tag_for(double kernel_size_sec) {
    std::string s = std::to_string(kernel_size_sec);
    s.erase(s.find_last_not_of('0') + 1);
    if (!s.empty() && s.back() == '.') {
        s.pop_back();
    }
    return s;
}

// Floor for the tie tolerance: absorbs rounding noise where exact magnitudes
// coincide (e.g. a window holding a single pulse).
constexpr double kRoundingTolerance = 1e-9;

/// Streaming tempo selection for one analysis frame. Bins arrive in ascending
/// order; the result is the lowest-tempo local maximum of |c| whose magnitude
/// is within `tol` (relative) of the global maximum.
class PeakSelector {
public:
    explicit PeakSelector(double tol = 0.0) : tol_(std::max(tol, kRoundingTolerance)) {}

    void push(std::size_t bin, cplx coeff, double mag) {
        if (has_prev_ && left_ok_ && prev_.mag >= mag) {
            offer(prev_);
        }
        left_ok_ = !has_prev_ || mag >= prev_.mag;
        prev_ = {bin, coeff, mag};
        has_prev_ = true;
    }

    /// Bin and coefficient of the selected tempo. Call once after all bins.
    std::pair<std::size_t, cplx> finish() {
        if (has_prev_ && left_ok_) {
            offer(prev_);
        }
        prune();
        return {kept_.front().bin, kept_.front().coeff};
    }

private:
    struct Candidate {
        std::size_t bin;
        cplx coeff;
        double mag;
    };

    void offer(const Candidate& c) {
        // a lower bin at least as strong always wins over c
        if (!kept_.empty() && kept_.back().mag >= c.mag) {
            return;
        }
        kept_.push_back(c);
        prune();
    }

    void prune() {
        const double threshold = kept_.back().mag * (1.0 - tol_);
        auto first = kept_.begin();
        while (first + 1 != kept_.end() && first->mag < threshold) {
            ++first;
        }
        kept_.erase(kept_.begin(), first);
    }

    double tol_;
    Candidate prev_{};
    bool has_prev_ = false;
    bool left_ok_ = true;
    std::vector<Candidate> kept_;  ///< magnitudes strictly increasing
};

}  // namespace

std::size_t TempogramConfig::window_length(int fps) const {
    const double len = std::round(kernel_size_sec * fps);
    return len > 0.0 ? static_cast<std::size_t>(len) : 0;
}

std::vector<double> TempogramConfig::tempi() const {
    std::vector<double> out;
    const auto lo = static_cast<double>(tempo_range.min_bpm);
    const auto hi = static_cast<double>(tempo_range.max_bpm);
    if (!(tempo_step_bpm > 0.0) || hi < lo) {
        return out;
    }
    const auto count = static_cast<std::size_t>(std::floor((hi - lo) / tempo_step_bpm + 1e-9)) + 1;
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        out.push_back(lo + static_cast<double>(k) * tempo_step_bpm);
    }
    return out;
}

void TempogramConfig::validate(int fps) const {
    if (!(kernel_size_sec > 0.0) || !std::isfinite(kernel_size_sec)) {
        throw ConfigError("kernel size must be positive");
    }
    if (window_length(fps) < 2) {
        throw ConfigError("kernel size too small: window must span at least 2 frames");
    }
    if (hop_frames < 1) {
        throw ConfigError("hop size must be at least one frame");
    }
    tempo_range.validate();
    if (!(harmonic_tie_tolerance >= 0.0 && harmonic_tie_tolerance < 1.0)) {
        throw ConfigError("harmonic tie tolerance must lie in [0, 1)");
    }
    if (!(tempo_step_bpm > 0.0)) {
        throw ConfigError("tempo step must be positive");
    }
}

TempogramConfig kernel_config(double kernel_size_sec, TempoRange range, double harmonic_tie_tolerance) {
    TempogramConfig cfg;
    cfg.harmonic_tie_tolerance = harmonic_tie_tolerance;
    cfg.kernel_size_sec = kernel_size_sec;
    cfg.tempo_range = range;
    if (kernel_size_sec > 0.0) {
        const int lowest = static_cast<int>(std::ceil(60.0 / kernel_size_sec - 1e-9));
        cfg.tempo_range.min_bpm = std::max(cfg.tempo_range.min_bpm, lowest);
    }
    return cfg;
}

Tempogram::Tempogram(FrameGrid grid, TempogramConfig cfg, std::vector<double> tempi,
                     std::vector<Frame> centers, std::vector<std::complex<double>> coeffs)
    : grid_(grid), cfg_(cfg), tempi_(std::move(tempi)), centers_(std::move(centers)),
      coeffs_(std::move(coeffs)) {
    if (coeffs_.size() != tempi_.size() * centers_.size()) {
        throw ConfigError("tempogram shape mismatch");
    }
}

PlpCurve::PlpCurve(FrameGrid grid, std::vector<double> values, std::string kernel_tag)
    : grid_(grid), values_(std::move(values)), tag_(std::move(kernel_tag)) {
    if (values_.size() != grid_.size()) {
        throw ConfigError("PLP length does not match frame grid");
    }
}

std::vector<double> hann_window(std::size_t length) {
    std::vector<double> w(length, 0.0);
    if (length < 2) {
        return w;
    }
    for (std::size_t k = 0; k < length; ++k) {
        w[k] = 0.5 - 0.5 * std::cos(kTwoPi * static_cast<double>(k) / static_cast<double>(length - 1));
    }
    return w;
}

Tempogram fourier_tempogram(const NoveltyCurve& novelty, const TempogramConfig& cfg) {
    const auto& grid = novelty.grid();
    cfg.validate(grid.fps());
    const std::size_t length = cfg.window_length(grid.fps());
    auto tempi = cfg.tempi();
    auto centers = analysis_centers(grid.size(), cfg.hop_frames);

    std::vector<cplx> coeffs(centers.size() * tempi.size());
    std::vector<cplx> column(centers.size());
    ColumnEvaluator eval(novelty.values(), length);
    for (std::size_t k = 0; k < tempi.size(); ++k) {
        eval.evaluate(tempi[k] / 60.0 / grid.fps(), centers, column);
        for (std::size_t j = 0; j < centers.size(); ++j) {
            coeffs[j * tempi.size() + k] = column[j];
        }
    }
    return Tempogram(grid, cfg, std::move(tempi), std::move(centers), std::move(coeffs));
}

std::vector<OptimalKernel> optimal_kernels(const Tempogram& tempogram) {
    std::vector<OptimalKernel> out;
    out.reserve(tempogram.n_frames());
    const auto tempi = tempogram.tempi();
    for (std::size_t j = 0; j < tempogram.n_frames(); ++j) {
        const auto row = tempogram.row(j);
        PeakSelector selector(tempogram.config().harmonic_tie_tolerance);
        for (std::size_t k = 0; k < row.size(); ++k) {
            selector.push(k, row[k], std::abs(row[k]));
        }
        const auto [best, coeff] = selector.finish();
        out.push_back(make_kernel(tempogram.centers()[j], tempi[best], coeff));
    }
    return out;
}

PlpCurve plp_from_tempogram(const Tempogram& tempogram) {
    const auto kernels = optimal_kernels(tempogram);
    return overlap_add(tempogram.grid(), tempogram.config().window_length(tempogram.grid().fps()),
                       kernels, tag_for(tempogram.config().kernel_size_sec));
}

PlpCurve plp(const NoveltyCurve& novelty, const TempogramConfig& cfg) {
    // Streams over tempo bins keeping only the selection state per analysis
    // frame, so the full tempogram is never materialized.
    const auto& grid = novelty.grid();
    cfg.validate(grid.fps());
    const std::size_t length = cfg.window_length(grid.fps());
    const auto tempi = cfg.tempi();
    const auto centers = analysis_centers(grid.size(), cfg.hop_frames);

    std::vector<PeakSelector> selectors(centers.size(), PeakSelector(cfg.harmonic_tie_tolerance));
    std::vector<cplx> column(centers.size());
    ColumnEvaluator eval(novelty.values(), length);
    for (std::size_t k = 0; k < tempi.size(); ++k) {
        eval.evaluate(tempi[k] / 60.0 / grid.fps(), centers, column);
        for (std::size_t j = 0; j < centers.size(); ++j) {
            selectors[j].push(k, column[j], std::abs(column[j]));
        }
    }
    std::vector<OptimalKernel> kernels;
    kernels.reserve(centers.size());
    for (std::size_t j = 0; j < centers.size(); ++j) {
        const auto [best, coeff] = selectors[j].finish();
        kernels.push_back(make_kernel(centers[j], tempi[best], coeff));
    }
    return overlap_add(grid, length, kernels, tag_for(cfg.kernel_size_sec));
}

PlpCurve combine_plp(std::span<const PlpCurve> curves) {
    if (curves.empty()) {
        throw ConfigError("combine_plp needs at least one curve");
    }
    const auto& grid = curves.front().grid();
    std::vector<double> out(grid.size(), 1.0);
    for (const auto& c : curves) {
        if (!(c.grid() == grid)) {
            throw ConfigError("combine_plp: curves live on different frame grids");
        }
        for (std::size_t n = 0; n < out.size(); ++n) {
            out[n] *= c[n];
        }
    }
    return PlpCurve(grid, std::move(out), "combined");
}

PlpCurve combined_plp(const NoveltyCurve& novelty, std::span<const double> kernel_sizes_sec,
                      TempoRange range, double harmonic_tie_tolerance) {
    std::vector<PlpCurve> curves;
    curves.reserve(kernel_sizes_sec.size());
    for (double kappa : kernel_sizes_sec) {
        curves.push_back(plp(novelty, kernel_config(kappa, range, harmonic_tie_tolerance)));
    }
    return combine_plp(curves);
}

}  // namespace plpdp
