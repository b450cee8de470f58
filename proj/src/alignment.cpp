#include "ratioreg/alignment.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <tuple>

#include "ratioreg/errors.hpp"

namespace ratioreg {

void SampleSeries::validate() const {
    if (times.size() != values.size()) {
        throw InputError("series: times and values must have equal length");
    }
    if (times.size() < 1) {
        throw InputError("series: must be nonempty");
    }
    for (Eigen::Index i = 1; i < times.size(); ++i) {
        if (!(times[i] > times[i - 1])) {
            throw InputError("series: times must be strictly increasing at index " +
                             std::to_string(i));
        }
    }
}

AlignedPair pair_same_grid(const SampleSeries& a, const SampleSeries& b,
                           double tol) {
    a.validate();
    b.validate();
    if (tol < 0.0) {
        throw InputError("pair_same_grid: tol must be nonnegative");
    }
    if (a.size() != b.size()) {
        throw InputError("pair_same_grid: length mismatch, " +
                         std::to_string(a.size()) + " vs " +
                         std::to_string(b.size()));
    }
    double max_gap = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        max_gap = std::max(max_gap, std::abs(a.times[i] - b.times[i]));
    }
    // Earliest index whose gap attains the maximum up to rounding noise, so
    // ties report deterministically regardless of accumulated ulps.
    Eigen::Index worst = 0;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        if (std::abs(a.times[i] - b.times[i]) >= max_gap * (1.0 - 1e-9)) {
            worst = i;
            break;
        }
    }
    if (max_gap > tol) {
        throw AlignmentError("pair_same_grid: time gap " + std::to_string(max_gap) +
                                 " at index " + std::to_string(worst) +
                                 " exceeds tol " + std::to_string(tol),
                             worst);
    }
    AlignedPair out;
    out.obs.x = a.values;
    out.obs.y = b.values;
    out.report.method = AlignMethod::same_grid;
    out.report.max_time_gap = max_gap;
    out.report.pairs.reserve(static_cast<std::size_t>(a.size()));
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        out.report.pairs.emplace_back(i, i);
    }
    return out;
}

AlignedPair pair_nearest_unique(const SampleSeries& a, const SampleSeries& b) {
    a.validate();
    b.validate();

    // All candidate pairs sorted by gap; ties broken by indices so the
    // matching is deterministic.
    std::vector<std::tuple<double, Eigen::Index, Eigen::Index>> candidates;
    candidates.reserve(static_cast<std::size_t>(a.size() * b.size()));
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        for (Eigen::Index j = 0; j < b.size(); ++j) {
            candidates.emplace_back(std::abs(a.times[i] - b.times[j]), i, j);
        }
    }
    std::sort(candidates.begin(), candidates.end());

    std::vector<bool> used_a(static_cast<std::size_t>(a.size()), false);
    std::vector<bool> used_b(static_cast<std::size_t>(b.size()), false);
    std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs;
    double max_gap = 0.0;
    for (const auto& [gap, i, j] : candidates) {
        if (used_a[static_cast<std::size_t>(i)] ||
            used_b[static_cast<std::size_t>(j)]) {
            continue;
        }
        used_a[static_cast<std::size_t>(i)] = true;
        used_b[static_cast<std::size_t>(j)] = true;
        pairs.emplace_back(i, j);
        max_gap = std::max(max_gap, gap);
    }
    std::sort(pairs.begin(), pairs.end());

    AlignedPair out;
    const Eigen::Index n = static_cast<Eigen::Index>(pairs.size());
    out.obs.x.resize(n);
    out.obs.y.resize(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        out.obs.x[k] = a.values[pairs[static_cast<std::size_t>(k)].first];
        out.obs.y[k] = b.values[pairs[static_cast<std::size_t>(k)].second];
    }
    out.report.method = AlignMethod::nearest_unique;
    out.report.pairs = std::move(pairs);
    out.report.max_time_gap = max_gap;
    out.report.dropped_a = a.size() - n;
    out.report.dropped_b = b.size() - n;
    return out;
}

InterpolationResult interpolate_disjoint(const SampleSeries& series,
                                         const Eigen::VectorXd& targets) {
    series.validate();
    const Eigen::Index n_obs = series.size();
    const Eigen::Index n_tgt = targets.size();
    for (Eigen::Index i = 1; i < n_tgt; ++i) {
        if (!(targets[i] > targets[i - 1])) {
            throw InputError("interpolate_disjoint: targets must be strictly "
                             "increasing");
        }
    }
    if (n_obs < 2 * n_tgt) {
        throw CapacityError(
            "interpolate_disjoint: need at least 2 observed points per target "
            "(have " +
            std::to_string(n_obs) + " points for " + std::to_string(n_tgt) +
            " targets)");
    }
    for (Eigen::Index i = 0; i < n_tgt; ++i) {
        if (targets[i] < series.times[0] || targets[i] > series.times[n_obs - 1]) {
            throw ExtrapolationError("interpolate_disjoint: target " +
                                     std::to_string(targets[i]) +
                                     " outside observed time span");
        }
    }

    InterpolationResult out;
    out.series.times = targets;
    out.series.values.resize(n_tgt);
    out.variance_scale.resize(n_tgt);
    out.pairs_used.reserve(static_cast<std::size_t>(n_tgt));

    // Targets are processed left to right; each consumes the leftmost
    // unconsumed consecutive pair bracketing (or nearest to) the target.
    Eigen::Index cursor = 0;
    for (Eigen::Index i = 0; i < n_tgt; ++i) {
        const double t = targets[i];
        const double* begin = series.times.data();
        const double* lower = std::lower_bound(begin, begin + n_obs, t);
        // Leftmost pair bracketing t: times[k] <= t <= times[k+1]. A target
        // equal to an observed time takes the pair ending at that point.
        Eigen::Index k = static_cast<Eigen::Index>(lower - begin) - 1;
        k = std::max<Eigen::Index>(k, 0);
        k = std::min(k, n_obs - 2);
        k = std::max(k, cursor);
        if (k + 1 >= n_obs) {
            throw CapacityError(
                "interpolate_disjoint: ran out of disjoint pairs at target " +
                std::to_string(t));
        }
        const double t0 = series.times[k];
        const double t1 = series.times[k + 1];
        double lambda = (t - t0) / (t1 - t0);
        lambda = std::clamp(lambda, 0.0, 1.0);
        out.series.values[i] =
            (1.0 - lambda) * series.values[k] + lambda * series.values[k + 1];
        out.variance_scale[i] =
            (1.0 - lambda) * (1.0 - lambda) + lambda * lambda;
        out.pairs_used.emplace_back(k, k + 1);
        cursor = k + 2;
    }
    return out;
}

}  // namespace ratioreg
