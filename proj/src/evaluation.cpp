#include "plpdp/evaluation.hpp"

#include <algorithm>
#include <cmath>

namespace plpdp {

std::vector<std::pair<std::size_t, std::size_t>> match_beats(std::span<const double> est_sec,
                                                             std::span<const double> ref_sec,
                                                             double tolerance_sec) {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    // estimates sorted by time (stable, so equal times keep input order)
    std::vector<std::size_t> order(est_sec.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        order[i] = i;
    }
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return est_sec[a] < est_sec[b]; });
    std::vector<double> sorted(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        sorted[i] = est_sec[order[i]];
    }
    std::vector<bool> used(order.size(), false);
    for (std::size_t r = 0; r < ref_sec.size(); ++r) {
        const double t = ref_sec[r];
        auto first = static_cast<std::size_t>(
            std::lower_bound(sorted.begin(), sorted.end(), t - tolerance_sec) - sorted.begin());
        // lower_bound on t - tol may skip a value within tol due to rounding
        while (first > 0 && std::abs(sorted[first - 1] - t) <= tolerance_sec) {
            --first;
        }
        std::size_t best = sorted.size();
        double best_dist = 0.0;
        for (std::size_t e = first; e < sorted.size() && sorted[e] <= t + tolerance_sec + 1e-12; ++e) {
            if (used[e]) {
                continue;
            }
            const double dist = std::abs(sorted[e] - t);
            if (dist <= tolerance_sec && (best == sorted.size() || dist < best_dist)) {
                best = e;
                best_dist = dist;
            }
        }
        if (best != sorted.size()) {
            used[best] = true;
            pairs.emplace_back(order[best], r);
        }
    }
    return pairs;
}

EvalReport fmeasure(std::span<const double> est_sec, std::span<const double> ref_sec,
                    double tolerance_sec) {
    EvalReport rep;
    rep.tolerance_sec = tolerance_sec;
    rep.n_est = est_sec.size();
    rep.n_ref = ref_sec.size();
    if (est_sec.empty() && ref_sec.empty()) {
        rep.f1 = rep.precision = rep.recall = 1.0;
        return rep;
    }
    rep.n_matched = match_beats(est_sec, ref_sec, tolerance_sec).size();
    const auto matched = static_cast<double>(rep.n_matched);
    rep.precision = rep.n_est > 0 ? matched / static_cast<double>(rep.n_est) : 0.0;
    rep.recall = rep.n_ref > 0 ? matched / static_cast<double>(rep.n_ref) : 0.0;
    const double sum = rep.precision + rep.recall;
    rep.f1 = sum > 0.0 ? 2.0 * rep.precision * rep.recall / sum : 0.0;
    return rep;
}

EvalReport mean_report(std::span<const EvalReport> reports) {
    EvalReport out;
    if (reports.empty()) {
        return out;
    }
    out.tolerance_sec = reports.front().tolerance_sec;
    for (const auto& r : reports) {
        out.f1 += r.f1;
        out.precision += r.precision;
        out.recall += r.recall;
        out.n_matched += r.n_matched;
        out.n_est += r.n_est;
        out.n_ref += r.n_ref;
    }
    const auto n = static_cast<double>(reports.size());
    out.f1 /= n;
    out.precision /= n;
    out.recall /= n;
    return out;
}

}  // namespace plpdp
