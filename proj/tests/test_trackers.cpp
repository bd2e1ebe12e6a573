#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "plpdp/harness.hpp"
#include "plpdp/trackers.hpp"
#include "support/oracles.hpp"

using namespace plpdp;

namespace {

std::vector<std::size_t> as_indices(std::span<const Frame> beats) {
    return {beats.begin(), beats.end()};
}

double exact_optimum(const oracle::DpInstance& in) {
    const auto st = dp_forward(in.novelty, in.confidence, in.ibi);
    return *std::max_element(st.score.begin(), st.score.end());
}

/// Best score over sequences ending at `last`, by enumeration.
double best_ending_at(const oracle::DpInstance& in, std::size_t last) {
    double best = -std::numeric_limits<double>::infinity();
    std::vector<std::size_t> beats;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << last); ++mask) {
        beats.clear();
        for (std::size_t i = 0; i < last; ++i) {
            if (mask >> i & 1U) {
                beats.push_back(i);
            }
        }
        beats.push_back(last);
        best = std::max(best, oracle::score(in, beats));
    }
    return best;
}

/// Drops estimates in the silent margins, where an integer IBI lets
/// zero-penalty epsilon beats continue the chain.
std::vector<double> within_reference(std::span<const double> est, std::span<const double> ref) {
    std::vector<double> out;
    for (double t : est) {
        if (t > ref.front() - kDefaultToleranceSec && t < ref.back() + kDefaultToleranceSec) {
            out.push_back(t);
        }
    }
    return out;
}

}  // namespace

TEST(Penalty, Examples) {
    EXPECT_EQ(penalty(50, 50), 0.0);
    EXPECT_DOUBLE_EQ(penalty(100, 50), -1.0);
    EXPECT_DOUBLE_EQ(penalty(25, 50), -1.0);
    EXPECT_DOUBLE_EQ(penalty(200, 50), -4.0);
    EXPECT_THROW(penalty(0, 50), std::domain_error);
    EXPECT_THROW(penalty(50, -1), std::domain_error);
}

TEST(Penalty, LogSymmetricAndNonpositive) {
    std::mt19937_64 rng(30);
    std::uniform_real_distribution<double> d(0.5, 500.0);
    std::uniform_real_distribution<double> c(1.0, 8.0);
    for (int i = 0; i < 2000; ++i) {
        const double base = d(rng);
        const double f = c(rng);
        ASSERT_LE(penalty(d(rng), base), 0.0);
        ASSERT_NEAR(penalty(base * f, base), penalty(base / f, base), 1e-12);
        ASSERT_NEAR(penalty(base * f, base), -std::pow(std::log2(f), 2), 1e-12);
    }
}

TEST(TempoTransition, Examples) {
    EXPECT_EQ(tempo_transition(120, 120, 100), 1.0);
    EXPECT_NEAR(tempo_transition(120, 132, 100), std::exp(-10.0), 1e-15);
    EXPECT_NEAR(tempo_transition(120, 60, 1), std::exp(-0.5), 1e-15);
    EXPECT_EQ(tempo_transition(90, 200, 0), 1.0);
    EXPECT_THROW(tempo_transition(0, 120, 1), std::domain_error);
}

TEST(TempoTransition, RangeAndMonotonicity) {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> bpm(30, 300);
    std::uniform_real_distribution<double> lam(0, 40);
    for (int i = 0; i < 2000; ++i) {
        const double a = bpm(rng);
        const double b = bpm(rng);
        const double l1 = lam(rng);
        const double l2 = l1 + lam(rng);
        const double p1 = tempo_transition(a, b, l1);
        ASSERT_GT(p1, 0.0);
        ASSERT_LE(p1, 1.0);
        ASSERT_LE(tempo_transition(a, b, l2), p1);
    }
}

TEST(DpOptimality, MatchesEnumerationOnSmallInputs) {
    std::mt19937_64 rng(32);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 1 + trial % 16;
        const auto in = oracle::random_instance(rng, n, trial % 2 == 0);
        const auto st = dp_forward(in.novelty, in.confidence, in.ibi);
        const auto beats = dp_backward(st);
        const double want = oracle::enumerate_max(in);
        ASSERT_NEAR(exact_optimum(in), want, 1e-9);
        ASSERT_NEAR(oracle::score(in, as_indices(beats)), want, 1e-9);
        ASSERT_NEAR(sequence_score(in.novelty, in.confidence, in.ibi, beats), want, 1e-9);
    }
}

TEST(DpOptimality, MatchesSuffixRecursion) {
    std::mt19937_64 rng(33);
    std::uniform_int_distribution<std::size_t> len(17, 120);
    for (int trial = 0; trial < 500; ++trial) {
        const auto in = oracle::random_instance(rng, len(rng), trial % 3 == 0);
        const auto st = dp_forward(in.novelty, in.confidence, in.ibi);
        const auto beats = dp_backward(st);
        const double want = oracle::suffix_max(in);
        ASSERT_NEAR(oracle::score(in, as_indices(beats)), want, 1e-9 * (1 + want));
    }
}

TEST(DpOptimality, ForwardScoreIsBestSequenceEndingThere) {
    std::mt19937_64 rng(34);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 2 + trial % 11;
        const auto in = oracle::random_instance(rng, n, false);
        const auto st = dp_forward(in.novelty, in.confidence, in.ibi);
        for (std::size_t t = 0; t < n; ++t) {
            ASSERT_NEAR(st.score[t], best_ending_at(in, t), 1e-9);
            if (st.predecessor[t] != DpState::kNoPredecessor) {
                ASSERT_LT(st.predecessor[t], static_cast<std::int64_t>(t));
            }
        }
    }
}

TEST(DpOptimality, FastModeNeverBeatsExact) {
    std::mt19937_64 rng(35);
    for (int trial = 0; trial < 300; ++trial) {
        auto in = oracle::random_instance(rng, 150, trial % 2 == 0);
        const auto fast = dp_forward(in.novelty, in.confidence, in.ibi, DpMode::fast, 4.0);
        const auto beats = dp_backward(fast);
        const double fast_best = beats.empty() ? 0.0 : fast.score[beats.back()];
        ASSERT_LE(fast_best, exact_optimum(in) + 1e-9);
        ASSERT_NEAR(oracle::score(in, as_indices(beats)), fast_best, 1e-9 * (1 + fast_best));
        for (std::size_t k = 1; k < beats.size(); ++k) {
            const double ibi = in.ibi[beats[k]];
            const double lag = static_cast<double>(beats[k] - beats[k - 1]);
            ASSERT_LE(lag, std::ceil(4.0 * ibi));
            ASSERT_GE(lag, std::max(1.0, std::floor(ibi / 4.0)));
        }
    }
}

TEST(DpOptimality, ScaleHomogeneity) {
    std::mt19937_64 rng(36);
    std::uniform_real_distribution<double> scale(0.1, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        auto in = oracle::random_instance(rng, 80, trial % 2 == 0);
        const double c = scale(rng);
        auto scaled = in;
        for (std::size_t t = 0; t < in.novelty.size(); ++t) {
            scaled.novelty[t] *= c;
            scaled.confidence[t] *= c;
        }
        const auto a = dp_forward(in.novelty, in.confidence, in.ibi);
        const auto b = dp_forward(scaled.novelty, scaled.confidence, scaled.ibi);
        for (std::size_t t = 0; t < a.score.size(); ++t) {
            ASSERT_NEAR(b.score[t], c * a.score[t], 1e-9);
        }
        ASSERT_EQ(dp_backward(a), dp_backward(b));
    }
}

TEST(DpBackward, EmptyAndTies) {
    DpState st;
    st.score = {0.0, 0.0};
    st.predecessor = {-1, -1};
    EXPECT_TRUE(dp_backward(st).empty());
    st.score = {0.5, 0.2, 0.5};
    st.predecessor = {-1, -1, 1};
    EXPECT_EQ(dp_backward(st), (std::vector<Frame>{0}));
}

TEST(DpForward, RejectsMismatchedLengths) {
    const std::vector<double> a(5, 0.5), b(4, 1.0);
    EXPECT_THROW(dp_forward(a, b, a), ConfigError);
    EXPECT_THROW(dp_forward(a, a, a, DpMode::fast, 0.5), ConfigError);
}

TEST(DpTrack, ConstantTempoWithTrueIbi) {
    TrajectorySpec spec;
    spec.start_bpm = spec.end_bpm = 120;
    spec.duration_sec = 30;
    const auto track = synth_track("c", spec);
    for (DpMode mode : {DpMode::exact, DpMode::fast}) {
        const auto beats = dp_track(track.activation, {50.0, 100.0, 4.0, mode});
        EXPECT_EQ(fmeasure(beats.seconds(), track.reference_sec).recall, 1.0);
        EXPECT_EQ(fmeasure(within_reference(beats.seconds(), track.reference_sec), track.reference_sec).f1, 1.0);
    }
}

TEST(DpTrack, RampLosesBeatsAtFixedTempo) {
    TrajectorySpec spec;
    spec.kind = TrajectoryKind::ramp;
    spec.start_bpm = 100;
    spec.end_bpm = 130;
    spec.duration_sec = 60;
    const auto track = synth_track("r", spec);
    const double ibi = mean_ibi_frames(track.reference_sec, 100);
    const auto beats = dp_track(track.activation, {ibi, 100.0});
    EXPECT_LT(fmeasure(beats.seconds(), track.reference_sec).recall, 1.0);
}

TEST(DpTrack, FlatActivation) {
    const NoveltyCurve flat(FrameGrid(100, 1000), std::vector<double>(1000, 1e-6));
    // non-integer IBI: every transition costs more than a beat earns
    EXPECT_EQ(dp_track(flat, {50.5, 100.0}).size(), 1U);
    // integer IBI: zero-penalty chains gain epsilon per beat
    const auto chain = dp_track(flat, {50.0, 100.0});
    ASSERT_GT(chain.size(), 1U);
    for (std::size_t k = 1; k < chain.size(); ++k) {
        EXPECT_EQ(chain.frames()[k] - chain.frames()[k - 1], 50U);
    }
}

TEST(DpTrack, ConfigErrors) {
    const NoveltyCurve act(FrameGrid(100, 10), std::vector<double>(10, 0.5));
    EXPECT_THROW(dp_track(act, {0.5, 100.0}), ConfigError);
    EXPECT_THROW(dp_track(act, {50.0, -1.0}), ConfigError);
}

TEST(PlpdpTrack, FollowsConditionChanges) {
    // beats at 50-frame spacing, then 70
    std::vector<double> beats;
    for (double t = 1.0; t < 15.0; t += 0.5) {
        beats.push_back(t);
    }
    for (double t = 15.0; t < 30.0; t += 0.7) {
        beats.push_back(t);
    }
    const auto act = synth_activation(beats, 100);
    std::vector<double> lam(act.size(), 1.0), ibi(act.size(), 50.0);
    for (std::size_t t = 1500; t < act.size(); ++t) {
        ibi[t] = 70.0;
    }
    const TempoCondition cond(act.grid(), lam, ibi);
    for (DpMode mode : {DpMode::exact, DpMode::fast}) {
        const auto est = plpdp_track(act, cond, mode).seconds();
        EXPECT_EQ(fmeasure(est, beats).recall, 1.0);
        EXPECT_EQ(fmeasure(within_reference(est, beats), beats).f1, 1.0);
    }
    const TempoCondition other(FrameGrid(100, act.size() + 1), std::vector<double>(act.size() + 1, 1.0),
                               std::vector<double>(act.size() + 1, 50.0));
    EXPECT_THROW(plpdp_track(act, other), ConfigError);
}

TEST(PlpdpPipeline, SyntheticKinds) {
    CorpusSpec cs;
    cs.n_tracks = 8;
    cs.seed = 7;
    for (const auto& track : synth_corpus(cs)) {
        const auto report = fmeasure(plpdp_pipeline(track.activation).seconds(), track.reference_sec);
        EXPECT_GE(report.f1, 0.95) << track.id;
    }
}

TEST(PlpdpPipeline, FastMatchesExactOnCorpus) {
    CorpusSpec cs;
    cs.n_tracks = 8;
    cs.seed = 3;
    cs.duration_sec = 30;
    for (const auto& track : synth_corpus(cs)) {
        PlpdpConfig cfg;
        const auto cond = plp_condition(track.activation, cfg);
        const auto fast = plpdp_track(track.activation, cond, DpMode::fast);
        const auto exact = plpdp_track(track.activation, cond, DpMode::exact);
        EXPECT_TRUE(std::ranges::equal(fast.frames(), exact.frames())) << track.id;
    }
}

TEST(Sppk, RecoversPulseTrain) {
    const std::vector<double> beats{0.5, 1.0, 1.25, 2.0, 2.9};
    const auto act = synth_activation(beats, 100);
    EXPECT_EQ(fmeasure(sppk_track(act).seconds(), beats).f1, 1.0);
    const NoveltyCurve flat(FrameGrid(100, 100), std::vector<double>(100, 0.3));
    EXPECT_TRUE(sppk_track(flat).empty());
}
