#pragma once

#include <span>
#include <vector>

namespace plpdp {

inline constexpr double kDefaultToleranceSec = 0.070;

struct EvalReport {
    double f1 = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    std::size_t n_matched = 0;
    std::size_t n_est = 0;
    std::size_t n_ref = 0;
    double tolerance_sec = kDefaultToleranceSec;
};

/// One-to-one matching within ±tolerance: reference beats are visited in
/// order, each taking the nearest still-unmatched estimate (earlier one on
/// ties). Empty estimates score zero against a non-empty reference; two empty
/// sequences agree perfectly.
EvalReport fmeasure(std::span<const double> est_sec, std::span<const double> ref_sec,
                    double tolerance_sec = kDefaultToleranceSec);

/// Matched (est index, ref index) pairs of the same matching.
std::vector<std::pair<std::size_t, std::size_t>> match_beats(std::span<const double> est_sec,
                                                             std::span<const double> ref_sec,
                                                             double tolerance_sec);

/// Dataset mean of per-track F1, precision and recall; counts are summed.
EvalReport mean_report(std::span<const EvalReport> reports);

}  // namespace plpdp
