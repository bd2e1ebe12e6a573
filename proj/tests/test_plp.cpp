#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "plpdp/conditions.hpp"
#include "plpdp/plp.hpp"
#include "support/oracles.hpp"

using namespace plpdp;

namespace {

constexpr double kPi = std::numbers::pi;

NoveltyCurve pulse_train(std::size_t n, std::size_t period, std::size_t offset, double low = 0.0) {
    std::vector<double> v(n, low);
    for (std::size_t t = offset; t < n; t += period) {
        v[t] = 1.0;
    }
    return NoveltyCurve(FrameGrid(100, n), std::move(v));
}

std::vector<double> random_values(std::mt19937_64& rng, std::size_t n, double sparsity) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> v(n, 0.0);
    for (auto& x : v) {
        if (unit(rng) < sparsity) {
            x = unit(rng);
        }
    }
    return v;
}

/// Interior peaks of a curve, plain local maxima above 0.5.
std::vector<Frame> interior_peaks(std::span<const double> v, Frame margin) {
    std::vector<Frame> out;
    for (Frame n = std::max<Frame>(1, margin); n + 1 < v.size() - margin; ++n) {
        if (v[n] > 0.5 && v[n] >= v[n - 1] && v[n] > v[n + 1]) {
            out.push_back(n);
        }
    }
    return out;
}

}  // namespace

TEST(TempogramConfig, WindowAndGrid) {
    TempogramConfig cfg;
    EXPECT_EQ(cfg.window_length(100), 300U);
    const auto tempi = cfg.tempi();
    ASSERT_EQ(tempi.size(), 271U);
    EXPECT_EQ(tempi.front(), 30.0);
    EXPECT_EQ(tempi.back(), 300.0);
    cfg.kernel_size_sec = 0.01;
    EXPECT_THROW(cfg.validate(100), ConfigError);
    cfg.kernel_size_sec = 3.0;
    cfg.hop_frames = 0;
    EXPECT_THROW(cfg.validate(100), ConfigError);
}

TEST(TempogramConfig, PerKernelRanges) {
    EXPECT_EQ(kernel_config(1.0).tempo_range, (TempoRange{60, 300}));
    EXPECT_EQ(kernel_config(3.0).tempo_range, (TempoRange{30, 300}));
    EXPECT_EQ(kernel_config(5.0).tempo_range, (TempoRange{30, 300}));
    EXPECT_EQ(kernel_config(1.0, {100, 200}).tempo_range, (TempoRange{100, 200}));
}

TEST(HannWindow, SymmetricWithZeroEnds) {
    const auto w = hann_window(5);
    ASSERT_EQ(w.size(), 5U);
    EXPECT_NEAR(w[0], 0.0, 1e-15);
    EXPECT_NEAR(w[2], 1.0, 1e-15);
    EXPECT_NEAR(w[1], w[3], 1e-15);
    const auto ref = oracle::hann(301);
    const auto got = hann_window(301);
    for (std::size_t k = 0; k < ref.size(); ++k) {
        EXPECT_NEAR(got[k], ref[k], 1e-14);
    }
}

TEST(FourierTempogram, MatchesDirectWindowedSum) {
    std::mt19937_64 rng(10);
    std::uniform_int_distribution<std::size_t> len(5, 400);
    std::uniform_real_distribution<double> kappa(0.05, 2.0);
    std::uniform_int_distribution<int> hop(1, 7);
    for (int trial = 0; trial < 120; ++trial) {
        const std::size_t n = len(rng);
        const auto x = random_values(rng, n, trial % 3 == 0 ? 0.1 : 1.0);
        TempogramConfig cfg;
        cfg.kernel_size_sec = kappa(rng);
        cfg.hop_frames = hop(rng);
        cfg.tempo_range = {40, 260};
        cfg.tempo_step_bpm = 7.0;
        const auto tg = fourier_tempogram(NoveltyCurve(FrameGrid(100, n), x), cfg);
        const std::size_t L = cfg.window_length(100);
        ASSERT_EQ(tg.n_frames(), (n + cfg.hop_frames - 1) / cfg.hop_frames);
        for (std::size_t j = 0; j < tg.n_frames(); ++j) {
            EXPECT_EQ(tg.centers()[j], j * cfg.hop_frames);
            for (std::size_t k = 0; k < tg.n_tempi(); ++k) {
                const auto expect = oracle::tempogram_coeff(x, tg.centers()[j], tg.tempi()[k], 100, L);
                ASSERT_NEAR(std::abs(tg.at(j, k) - expect), 0.0, 1e-9 * (1.0 + std::abs(expect)));
            }
        }
    }
}

TEST(FourierTempogram, AllZeroGivesZeroCoefficients) {
    const NoveltyCurve zero(FrameGrid(100, 400), std::vector<double>(400, 0.0));
    const auto tg = fourier_tempogram(zero, kernel_config(3.0));
    for (std::size_t j = 0; j < tg.n_frames(); ++j) {
        for (const auto& c : tg.row(j)) {
            ASSERT_EQ(c, std::complex<double>{});
        }
    }
}

TEST(FourierTempogram, PulseTrainPeaksAtItsTempo) {
    const auto act = pulse_train(3000, 50, 10);
    const auto tg = fourier_tempogram(act, kernel_config(3.0));
    for (std::size_t j = 300; j < 2700; j += 37) {
        const auto row = tg.row(j);
        double top = 0.0;
        for (const auto& c : row) {
            top = std::max(top, std::abs(c));
        }
        const double at120 = std::abs(tg.at(j, 120 - 30));
        EXPECT_NEAR(at120, top, 1e-9 * top) << "frame " << j;
    }
}

TEST(FourierTempogram, SinglePulseAtCenterIsFlat) {
    std::vector<double> v(301, 0.0);
    v[150] = 1.0;
    const auto tg = fourier_tempogram(NoveltyCurve(FrameGrid(100, 301), v), kernel_config(3.0));
    // even window length: the center sample sits just off the window apex
    const double weight = oracle::hann(300)[150];
    for (const auto& c : tg.row(150)) {
        EXPECT_NEAR(std::abs(c), weight, 1e-12);
    }
}

TEST(OptimalKernels, PulseTrainTempoAndPhase) {
    const auto act = pulse_train(3000, 50, 0);
    const auto shifted = pulse_train(3000, 50, 25);
    const auto cfg = kernel_config(3.0);
    const auto k0 = optimal_kernels(fourier_tempogram(act, cfg));
    const auto k1 = optimal_kernels(fourier_tempogram(shifted, cfg));
    for (std::size_t j = 400; j < 2600; j += 53) {
        EXPECT_NEAR(k0[j].tempo_bpm, 120.0, 1.0);
        ASSERT_EQ(k1[j].tempo_bpm, 120.0);
        ASSERT_EQ(k0[j].tempo_bpm, 120.0);
        double diff = std::fmod(k1[j].phase - k0[j].phase + 4 * kPi, 2 * kPi);
        EXPECT_NEAR(diff, kPi, 1e-9);
        EXPECT_GE(k0[j].phase, 0.0);
        EXPECT_LT(k0[j].phase, 2 * kPi);
    }
}

TEST(OptimalKernels, PhaseMaximizesCorrelation) {
    // cos(2*pi*(theta/60*t) - phase) must correlate best with the window content
    std::mt19937_64 rng(11);
    const std::size_t n = 600;
    const auto x = random_values(rng, n, 0.2);
    const auto cfg = kernel_config(1.0);
    const auto kernels = optimal_kernels(fourier_tempogram(NoveltyCurve(FrameGrid(100, n), x), cfg));
    const auto w = oracle::hann(100);
    for (std::size_t j = 60; j < 540; j += 41) {
        const auto& k = kernels[j];
        const auto corr = [&](double phase) {
            double s = 0.0;
            for (std::size_t i = 0; i < 100; ++i) {
                const long long t = static_cast<long long>(j) - 50 + static_cast<long long>(i);
                if (t >= 0 && t < static_cast<long long>(n)) {
                    s += w[i] * x[t] * std::cos(2 * kPi * k.tempo_bpm / 60.0 * t / 100.0 - phase);
                }
            }
            return s;
        };
        const double best = corr(k.phase);
        for (int step = 1; step < 64; ++step) {
            EXPECT_LE(corr(k.phase + step * 2 * kPi / 64), best + 1e-12);
        }
        EXPECT_NEAR(best, k.magnitude, 1e-9);
    }
}

TEST(OptimalKernels, AllZeroWindowUsesLowestTempoAndZeroPhase) {
    const NoveltyCurve zero(FrameGrid(100, 200), std::vector<double>(200, 0.0));
    const auto kernels = optimal_kernels(fourier_tempogram(zero, kernel_config(3.0)));
    for (const auto& k : kernels) {
        EXPECT_EQ(k.tempo_bpm, 30.0);
        EXPECT_EQ(k.phase, 0.0);
        EXPECT_EQ(k.magnitude, 0.0);
    }
}

TEST(OptimalKernels, PlainArgmaxWithZeroTolerance) {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 150;
        const auto x = random_values(rng, n, 0.5);
        auto cfg = kernel_config(1.0);
        cfg.harmonic_tie_tolerance = 0.0;
        const auto tg = fourier_tempogram(NoveltyCurve(FrameGrid(100, n), x), cfg);
        const auto kernels = optimal_kernels(tg);
        for (std::size_t j = 0; j < n; j += 7) {
            std::vector<double> mags;
            for (const auto& c : tg.row(j)) {
                mags.push_back(std::abs(c));
            }
            ASSERT_EQ(kernels[j].tempo_bpm, tg.tempi()[oracle::plain_argmax(mags)]);
        }
    }
}

TEST(OptimalKernels, LowestTiedPeakWithTolerance) {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 200;
        const auto x = random_values(rng, n, 0.1);
        auto cfg = kernel_config(3.0);
        cfg.harmonic_tie_tolerance = 0.05;
        const auto tg = fourier_tempogram(NoveltyCurve(FrameGrid(100, n), x), cfg);
        const auto kernels = optimal_kernels(tg);
        for (std::size_t j = 0; j < n; j += 11) {
            std::vector<double> mags;
            for (const auto& c : tg.row(j)) {
                mags.push_back(std::abs(c));
            }
            ASSERT_EQ(kernels[j].tempo_bpm, tg.tempi()[oracle::lowest_tied_peak(mags, 0.05)]);
        }
    }
}

TEST(OptimalKernels, HarmonicTiePicksFundamental) {
    // 117.4 BPM pulse train: the 2nd harmonic bin sits closer to the grid, so
    // the plain argmax locks onto it
    std::vector<double> v(3000, 1e-6);
    for (double t = 0.3; t < 29.9; t += 60.0 / 117.4) {
        v[static_cast<std::size_t>(std::lround(t * 100))] = 1.0 - 1e-6;
    }
    const NoveltyCurve act(FrameGrid(100, v.size()), v);
    auto cfg = kernel_config(5.0);
    const auto with_tie = optimal_kernels(fourier_tempogram(act, cfg));
    cfg.harmonic_tie_tolerance = 0.0;
    const auto plain = optimal_kernels(fourier_tempogram(act, cfg));
    std::size_t plain_harmonic = 0;
    for (std::size_t j = 500; j < 2500; ++j) {
        EXPECT_NEAR(with_tie[j].tempo_bpm, 117.4, 1.5);
        plain_harmonic += plain[j].tempo_bpm > 200 ? 1 : 0;
    }
    EXPECT_GT(plain_harmonic, 0U);
}

TEST(Plp, StreamingMatchesMaterializedTempogram) {
    std::mt19937_64 rng(14);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 100 + trial * 3;
        const NoveltyCurve act(FrameGrid(100, n), random_values(rng, n, 0.3));
        auto cfg = kernel_config(trial % 2 ? 1.0 : 3.0);
        cfg.hop_frames = 1 + trial % 4;
        cfg.harmonic_tie_tolerance = trial % 3 == 0 ? 0.0 : 0.01;
        const auto a = plp(act, cfg);
        const auto b = plp_from_tempogram(fourier_tempogram(act, cfg));
        for (Frame t = 0; t < n; ++t) {
            ASSERT_EQ(a[t], b[t]);
        }
    }
}

TEST(Plp, PeaksOnPulsesAndExpectationAtMissingPulse) {
    auto v = pulse_train(3000, 50, 20).values();
    std::vector<double> x(v.begin(), v.end());
    x[1520] = 0.0;  // remove one pulse
    const NoveltyCurve act(FrameGrid(100, x.size()), x);
    const auto full = plp(pulse_train(3000, 50, 20), kernel_config(3.0));
    for (Frame p : interior_peaks(full.values(), 300)) {
        const long long off = static_cast<long long>(p) - 20;
        const long long r = ((off % 50) + 50) % 50;
        EXPECT_TRUE(r <= 1 || r >= 49) << "peak at " << p;
    }
    const auto gap = plp(act, kernel_config(3.0));
    const auto peaks = interior_peaks(gap.values(), 300);
    EXPECT_TRUE(std::any_of(peaks.begin(), peaks.end(), [](Frame p) { return p >= 1518 && p <= 1522; }));
}

TEST(Plp, AllZeroNoveltyIsPeriodicAtLowestTempo) {
    const NoveltyCurve zero(FrameGrid(100, 2000), std::vector<double>(2000, 0.0));
    const auto curve = plp(zero, kernel_config(3.0));
    // 30 BPM, phase 0: cos(pi*t) peaks at every even second
    for (Frame t = 0; t < 2000; ++t) {
        const double expect = std::max(0.0, std::cos(2 * kPi * 0.5 * t / 100.0));
        ASSERT_NEAR(curve[t], expect, 1e-9);
    }
}

TEST(Plp, RangeAndNonnegativity) {
    std::mt19937_64 rng(15);
    for (int trial = 0; trial < 150; ++trial) {
        const std::size_t n = 50 + trial * 7;
        const NoveltyCurve act(FrameGrid(100, n), random_values(rng, n, 0.05 + 0.006 * trial));
        for (double kappa : {1.0, 3.0, 5.0}) {
            auto cfg = kernel_config(kappa);
            cfg.hop_frames = 1 + trial % 3;
            const auto curve = plp(act, cfg);
            for (double v : curve.values()) {
                ASSERT_GE(v, 0.0);
                ASSERT_LE(v, 1.0);
            }
        }
    }
}

TEST(Plp, ShiftCovariance) {
    std::mt19937_64 rng(16);
    std::uniform_int_distribution<std::size_t> period(30, 120);
    std::uniform_int_distribution<std::size_t> shift(1, 60);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 2400;
        const std::size_t p = period(rng);
        const std::size_t s = shift(rng);
        const auto base = plp(pulse_train(n, p, 5), kernel_config(3.0));
        const auto moved = plp(pulse_train(n, p, 5 + s), kernel_config(3.0));
        const auto pa = interior_peaks(base.values(), 300 + s);
        const auto pb = interior_peaks(moved.values(), 300);
        for (Frame a : pa) {
            const Frame target = a + s;
            const bool found = std::any_of(pb.begin(), pb.end(), [&](Frame b) {
                return (b > target ? b - target : target - b) <= 1;
            });
            ASSERT_TRUE(found) << "period " << p << " shift " << s << " peak " << a;
        }
    }
}

TEST(Plp, TempoRangeRespect) {
    // integer periods 20..199 frames, i.e. 30..300 BPM
    std::mt19937_64 rng(17);
    std::uniform_int_distribution<std::size_t> period(21, 199);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t p = period(rng);
        const std::size_t n = std::max<std::size_t>(3000, 12 * p);
        const auto curve = plp(pulse_train(n, p, 7), kernel_config(3.0));
        const auto peaks = interior_peaks(curve.values(), 300);
        ASSERT_GE(peaks.size(), 2U) << "period " << p;
        for (std::size_t i = 1; i < peaks.size(); ++i) {
            const long long d = static_cast<long long>(peaks[i] - peaks[i - 1]);
            ASSERT_LE(std::abs(d - static_cast<long long>(p)), 1) << "period " << p;
        }
    }
}

TEST(CombinePlp, Examples) {
    const FrameGrid g(100, 4);
    const std::vector<PlpCurve> ones(3, PlpCurve(g, {1, 1, 1, 1}, "x"));
    const auto c = combine_plp(ones);
    for (double v : c.values()) {
        EXPECT_EQ(v, 1.0);
    }
    EXPECT_EQ(c.kernel_tag(), "combined");
    const std::vector<PlpCurve> mixed{PlpCurve(g, {0.5, 1, 1, 1}, "1"), PlpCurve(g, {0.5, 0, 1, 1}, "3"),
                                      PlpCurve(g, {0.5, 1, 1, 0.2}, "5")};
    const auto m = combine_plp(mixed);
    EXPECT_DOUBLE_EQ(m[0], 0.125);
    EXPECT_EQ(m[1], 0.0);
    EXPECT_DOUBLE_EQ(m[3], 0.2);
    EXPECT_THROW(combine_plp(std::vector<PlpCurve>{}), ConfigError);
    const std::vector<PlpCurve> mismatch{PlpCurve(g, {1, 1, 1, 1}, "1"),
                                         PlpCurve(FrameGrid(100, 3), {1, 1, 1}, "3")};
    EXPECT_THROW(combine_plp(mismatch), ConfigError);
}

TEST(CombinePlp, Suppression) {
    std::mt19937_64 rng(18);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 400;
        const NoveltyCurve act(FrameGrid(100, n), random_values(rng, n, 0.1));
        std::vector<PlpCurve> curves;
        for (double k : {1.0, 3.0, 5.0}) {
            curves.push_back(plp(act, kernel_config(k)));
        }
        const auto com = combine_plp(curves);
        const std::vector<double> sizes{1.0, 3.0, 5.0};
        const auto direct = combined_plp(act, sizes);
        for (Frame t = 0; t < n; ++t) {
            const double lo = std::min({curves[0][t], curves[1][t], curves[2][t]});
            ASSERT_GE(com[t], 0.0);
            ASSERT_LE(com[t], lo);
            ASSERT_EQ(com[t], direct[t]);
        }
    }
}

TEST(PlpCurve, Tags) {
    EXPECT_EQ(plp(pulse_train(400, 50, 0), kernel_config(3.0)).kernel_tag(), "3");
    EXPECT_EQ(plp(pulse_train(400, 50, 0), kernel_config(1.5)).kernel_tag(), "1.5");
}
