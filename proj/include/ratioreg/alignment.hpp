#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "ratioreg/estimators.hpp"

namespace ratioreg {

// One channel of timestamped observations.
struct SampleSeries {
    Eigen::VectorXd times;   // strictly increasing
    Eigen::VectorXd values;  // same length

    [[nodiscard]] Eigen::Index size() const { return times.size(); }
    void validate() const;  // throws InputError
};

enum class AlignMethod { same_grid, nearest_unique, interpolate_disjoint };

struct AlignmentReport {
    std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs;
    double max_time_gap = 0.0;
    Eigen::Index points_reused = 0;  // always 0 by construction
    Eigen::Index dropped_a = 0;
    Eigen::Index dropped_b = 0;
    AlignMethod method = AlignMethod::same_grid;
};

struct AlignedPair {
    PairedObservations obs;
    AlignmentReport report;
};

// Index-wise pairing; every |a.times_i - b.times_i| must be <= tol.
AlignedPair pair_same_grid(const SampleSeries& a, const SampleSeries& b,
                           double tol);

// Greedy globally-closest one-to-one matching on time gaps. Surplus points
// on either side are dropped and counted.
AlignedPair pair_nearest_unique(const SampleSeries& a, const SampleSeries& b);

struct InterpolationResult {
    SampleSeries series;
    // Per-point noise-variance scale ((1-lambda)^2 + lambda^2); multiply by
    // the channel's sigma^2 to get the interpolated point's variance.
    Eigen::VectorXd variance_scale;
    // Consecutive observed-index pair consumed by each target.
    std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs_used;
};

// Linear interpolation onto targets where each target consumes a dedicated
// pair of consecutive observed points; no observed point is used twice, so
// the outputs stay independent under the model.
InterpolationResult interpolate_disjoint(const SampleSeries& series,
                                         const Eigen::VectorXd& targets);

}  // namespace ratioreg
