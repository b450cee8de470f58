#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "ratioreg/alignment.hpp"
#include "ratioreg/errors.hpp"
#include "ratioreg/rng.hpp"

using namespace ratioreg;

namespace {

SampleSeries make_series(std::initializer_list<double> times,
                         std::initializer_list<double> values) {
    SampleSeries s;
    s.times = Eigen::Map<const Eigen::VectorXd>(
        times.begin(), static_cast<Eigen::Index>(times.size()));
    s.values = Eigen::Map<const Eigen::VectorXd>(
        values.begin(), static_cast<Eigen::Index>(values.size()));
    return s;
}

void check_no_reuse(const std::vector<std::pair<Eigen::Index, Eigen::Index>>& pairs) {
    std::set<Eigen::Index> lhs, rhs;
    for (const auto& [i, j] : pairs) {
        CHECK(lhs.insert(i).second);
        CHECK(rhs.insert(j).second);
    }
}

}  // namespace

TEST_CASE("series validation") {
    SampleSeries bad = make_series({0, 1, 1}, {1, 2, 3});
    CHECK_THROWS_AS(bad.validate(), InputError);
}

TEST_CASE("pair_same_grid") {
    const auto a = make_series({0, 1, 2}, {10, 11, 12});

    SUBCASE("identical grids, zero tolerance") {
        auto out = pair_same_grid(a, a, 0.0);
        CHECK(out.report.max_time_gap == 0.0);
        CHECK(out.obs.x.isApprox(a.values));
        CHECK(out.report.points_reused == 0);
    }

    SUBCASE("small gaps within tolerance") {
        const auto b = make_series({0.1, 1.1, 2.1}, {20, 21, 22});
        auto out = pair_same_grid(a, b, 0.2);
        CHECK(out.report.max_time_gap == doctest::Approx(0.1));
        CHECK(out.obs.y[2] == doctest::Approx(22));
    }

    SUBCASE("gap above tolerance names the worst index") {
        const auto b = make_series({0.1, 1.1, 2.1}, {20, 21, 22});
        try {
            pair_same_grid(a, b, 0.05);
            FAIL("expected AlignmentError");
        } catch (const AlignmentError& e) {
            CHECK(e.worst_index == 0);
        }
    }

    SUBCASE("length mismatch") {
        const auto b = make_series({0, 1}, {20, 21});
        CHECK_THROWS_AS(pair_same_grid(a, b, 1.0), InputError);
    }

    SUBCASE("infinite tolerance is index-wise pairing") {
        const auto b = make_series({100, 200, 300}, {20, 21, 22});
        auto out = pair_same_grid(a, b,
                                  std::numeric_limits<double>::infinity());
        CHECK(out.obs.x.isApprox(a.values));
        CHECK(out.obs.y.isApprox(b.values));
    }
}

TEST_CASE("pair_nearest_unique") {
    SUBCASE("equal grids pair identically") {
        const auto a = make_series({0, 1, 2}, {1, 2, 3});
        auto out = pair_nearest_unique(a, a);
        CHECK(out.report.max_time_gap == 0.0);
        CHECK(out.report.pairs.size() == 3);
        for (const auto& [i, j] : out.report.pairs) {
            CHECK(i == j);
        }
    }

    SUBCASE("surplus points dropped, minimal max gap") {
        const auto a = make_series({0, 10}, {1, 2});
        const auto b = make_series({0.4, 9.0, 9.6}, {5, 6, 7});
        auto out = pair_nearest_unique(a, b);
        REQUIRE(out.report.pairs.size() == 2);
        CHECK(out.report.pairs[0] == std::pair<Eigen::Index, Eigen::Index>{0, 0});
        CHECK(out.report.pairs[1] == std::pair<Eigen::Index, Eigen::Index>{1, 2});
        CHECK(out.report.dropped_b == 1);
        CHECK(out.report.max_time_gap == doctest::Approx(0.4));
        check_no_reuse(out.report.pairs);
    }

    SUBCASE("cardinality bound") {
        const auto a = make_series({5.0}, {1});
        const auto b = make_series({0, 2, 4, 6, 8}, {1, 2, 3, 4, 5});
        auto out = pair_nearest_unique(a, b);
        CHECK(out.report.pairs.size() == 1);
        CHECK(out.report.dropped_b == 4);
    }
}

TEST_CASE("interpolate_disjoint") {
    const auto series = make_series({0, 1, 2, 3}, {0, 2, 4, 6});

    SUBCASE("linear interpolation on disjoint pairs") {
        Eigen::VectorXd targets(2);
        targets << 0.5, 2.5;
        auto out = interpolate_disjoint(series, targets);
        CHECK(out.series.values[0] == doctest::Approx(1.0));
        CHECK(out.series.values[1] == doctest::Approx(5.0));
        CHECK(out.pairs_used[0] == std::pair<Eigen::Index, Eigen::Index>{0, 1});
        CHECK(out.pairs_used[1] == std::pair<Eigen::Index, Eigen::Index>{2, 3});
        CHECK(out.variance_scale[0] == doctest::Approx(0.5));
    }

    SUBCASE("targets at observed times reproduce the observations") {
        Eigen::VectorXd targets(2);
        targets << 1.0, 3.0;
        auto out = interpolate_disjoint(series, targets);
        CHECK(out.series.values[0] == doctest::Approx(2.0));
        CHECK(out.series.values[1] == doctest::Approx(6.0));
        CHECK(out.variance_scale[0] == doctest::Approx(1.0));
    }

    SUBCASE("capacity error") {
        const auto three = make_series({0, 1, 2}, {0, 1, 2});
        Eigen::VectorXd targets(2);
        targets << 0.5, 1.5;
        CHECK_THROWS_AS(interpolate_disjoint(three, targets), CapacityError);
    }

    SUBCASE("extrapolation error") {
        Eigen::VectorXd targets(1);
        targets << 5.0;
        CHECK_THROWS_AS(interpolate_disjoint(series, targets),
                        ExtrapolationError);
    }

    SUBCASE("no observed index reused") {
        const auto big = make_series({0, 1, 2, 3, 4, 5, 6, 7},
                                     {0, 1, 2, 3, 4, 5, 6, 7});
        Eigen::VectorXd targets(4);
        targets << 0.2, 0.9, 1.1, 6.5;
        auto out = interpolate_disjoint(big, targets);
        std::set<Eigen::Index> used;
        for (const auto& [lo, hi] : out.pairs_used) {
            CHECK(used.insert(lo).second);
            CHECK(used.insert(hi).second);
        }
    }
}

TEST_CASE("interpolated outputs stay independent" * doctest::timeout(60)) {
    // Fixed mean function, repeated noise draws; the covariance matrix of
    // the interpolated values must be diagonal within sampling error.
    const Eigen::Index n_obs = 40;
    const Eigen::Index n_tgt = 10;
    const double sigma = 1.0;
    Eigen::VectorXd times(n_obs), mean(n_obs);
    for (Eigen::Index i = 0; i < n_obs; ++i) {
        times[i] = static_cast<double>(i);
        mean[i] = 0.3 * static_cast<double>(i) + 1.0;
    }
    Eigen::VectorXd targets(n_tgt);
    for (Eigen::Index i = 0; i < n_tgt; ++i) {
        targets[i] = 0.7 + 3.9 * static_cast<double>(i);
    }

    const int trials = 10000;
    Eigen::MatrixXd samples(trials, n_tgt);
    SampleSeries series;
    series.times = times;
    for (int trial = 0; trial < trials; ++trial) {
        TrialRng rng(99, static_cast<std::uint64_t>(trial),
                     TrialRng::Channel::y_noise);
        series.values = mean + rng.normal_vector(n_obs, sigma);
        auto out = interpolate_disjoint(series, targets);
        samples.row(trial) = out.series.values.transpose();
    }
    const Eigen::RowVectorXd col_mean = samples.colwise().mean();
    Eigen::MatrixXd centered = samples.rowwise() - col_mean;
    Eigen::MatrixXd cov =
        centered.transpose() * centered / static_cast<double>(trials - 1);

    for (Eigen::Index i = 0; i < n_tgt; ++i) {
        for (Eigen::Index j = 0; j < n_tgt; ++j) {
            if (i == j) continue;
            const double se = std::sqrt(cov(i, i) * cov(j, j) /
                                        static_cast<double>(trials));
            CHECK(std::abs(cov(i, j)) <= 4.0 * se);
        }
    }
}
