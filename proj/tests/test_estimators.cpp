#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "ratioreg/errors.hpp"
#include "ratioreg/estimators.hpp"
#include "ratioreg/numeric.hpp"
#include "ratioreg/rng.hpp"

using namespace ratioreg;

namespace {

PairedObservations make_obs(std::initializer_list<double> x,
                            std::initializer_list<double> y,
                            std::optional<double> sigma2 = std::nullopt) {
    PairedObservations obs;
    obs.x = Eigen::Map<const Eigen::VectorXd>(x.begin(),
                                              static_cast<Eigen::Index>(x.size()));
    obs.y = Eigen::Map<const Eigen::VectorXd>(y.begin(),
                                              static_cast<Eigen::Index>(y.size()));
    obs.sigma2_sq = sigma2;
    return obs;
}

struct Welford {
    double mean = 0.0;
    double m2 = 0.0;
    long long count = 0;
    void add(double v) {
        ++count;
        const double delta = v - mean;
        mean += delta / static_cast<double>(count);
        m2 += delta * (v - mean);
    }
    [[nodiscard]] double variance() const {
        return m2 / static_cast<double>(count - 1);
    }
    [[nodiscard]] double se_of_mean() const {
        return std::sqrt(variance() / static_cast<double>(count));
    }
};

}  // namespace

TEST_CASE("denominator formula") {
    Eigen::VectorXd y(2);
    y << 1, 2;
    CHECK(denominator(y, 0.5) == doctest::Approx(4.0));

    Eigen::VectorXd zeros = Eigen::VectorXd::Zero(3);
    CHECK(denominator(zeros, 1.0) == doctest::Approx(-3.0));

    Eigen::VectorXd arbitrary(4);
    arbitrary << 0.3, -1.2, 5.0, 2.2;
    CHECK(denominator(arbitrary, 0.0) ==
          doctest::Approx(arbitrary.squaredNorm()));

    Eigen::VectorXd empty;
    CHECK_THROWS_AS(denominator(empty, 1.0), InputError);
    CHECK_THROWS_AS(denominator(y, -1.0), InputError);
}

TEST_CASE("naive estimator") {
    auto est = estimate_ratio_naive(make_obs({2, 4}, {1, 2}));
    CHECK(est.value == doctest::Approx(2.0));
    CHECK(est.kind == EstimatorKind::naive);
    CHECK(est.denominator == doctest::Approx(5.0));
    CHECK(est.condition_beta == BetaVerdict::not_checked);

    auto self = estimate_ratio_naive(make_obs({1.5, -0.3}, {1.5, -0.3}));
    CHECK(self.value == doctest::Approx(1.0));

    CHECK_THROWS_AS(estimate_ratio_naive(make_obs({1, 2}, {0, 0})),
                    DegenerateDenominatorError);
}

TEST_CASE("naive estimator shrinks below the true ratio" *
          doctest::timeout(120)) {
    const Eigen::Index n = 10000;
    const double r = 10.0;
    Eigen::VectorXd mu2(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        mu2[i] = std::sin(static_cast<double>(i + 1)) + 2.0;
    }
    Welford naive;
    Eigen::VectorXd x(n), y(n);
    for (int trial = 0; trial < 1000; ++trial) {
        TrialRng rng_x(7, static_cast<std::uint64_t>(trial),
                       TrialRng::Channel::x_noise);
        TrialRng rng_y(7, static_cast<std::uint64_t>(trial),
                       TrialRng::Channel::y_noise);
        for (Eigen::Index i = 0; i < n; ++i) x[i] = r * mu2[i] + rng_x.normal();
        for (Eigen::Index i = 0; i < n; ++i) y[i] = mu2[i] + rng_y.normal();
        naive.add(compensated_dot(x, y) / compensated_sum_sq(y));
    }
    CHECK(naive.mean < r - 3.0 * naive.se_of_mean());
}

TEST_CASE("corrected estimator") {
    auto est = estimate_ratio(make_obs({2, 4}, {1, 2}, 0.5), 1.0);
    CHECK(est.value == doctest::Approx(2.5));
    CHECK(est.denominator == doctest::Approx(4.0));
    CHECK(est.kind == EstimatorKind::corrected);
    CHECK(est.condition_beta == BetaVerdict::passed);

    SUBCASE("noiseless identity") {
        Eigen::VectorXd mu2(3);
        mu2 << 1.0, 2.0, -0.5;
        PairedObservations obs;
        obs.x = 3.25 * mu2;
        obs.y = mu2;
        obs.sigma2_sq = 0.0;
        CHECK(estimate_ratio(obs).value == doctest::Approx(3.25));
    }

    SUBCASE("missing sigma2 is an input error") {
        CHECK_THROWS_AS(estimate_ratio(make_obs({2, 4}, {1, 2})), InputError);
    }

    SUBCASE("failed beta condition still returns the estimate") {
        auto failing = estimate_ratio(make_obs({2, 4}, {1, 2}, 0.5), 100.0);
        CHECK(failing.condition_beta == BetaVerdict::failed);
        CHECK(failing.value == doctest::Approx(2.5));
    }

    SUBCASE("exactly zero denominator") {
        CHECK_THROWS_AS(estimate_ratio(make_obs({1, 1}, {1, 1}, 1.0)),
                        DegenerateDenominatorError);
    }
}

TEST_CASE("corrected estimator hits the truth in the simulated model" *
          doctest::timeout(120)) {
    const Eigen::Index n = 10000;
    const double r = 10.0;
    Eigen::VectorXd x(n), y(n);
    TrialRng rng_x(11, 0, TrialRng::Channel::x_noise);
    TrialRng rng_y(11, 0, TrialRng::Channel::y_noise);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double f = std::sin(static_cast<double>(i + 1)) + 2.0;
        x[i] = r * f + rng_x.normal();
        y[i] = f + rng_y.normal();
    }
    PairedObservations obs;
    obs.x = x;
    obs.y = y;
    obs.sigma2_sq = 1.0;
    CHECK(std::abs(estimate_ratio(obs).value - r) < 0.1);
}

TEST_CASE("variance estimator") {
    Eigen::VectorXd y(4);
    y << 1, 3, 2, 2;
    auto est = estimate_variance(y);
    CHECK(est.value == doctest::Approx(1.0));
    CHECK(est.m == 2);
    CHECK(est.differences_used == 2);

    CHECK(estimate_variance(Eigen::VectorXd::Constant(9, 3.7)).value ==
          doctest::Approx(0.0));

    SUBCASE("odd length discards the trailing sample") {
        Eigen::VectorXd odd(5);
        odd << 1, 3, 2, 2, 100.0;
        auto e = estimate_variance(odd);
        CHECK(e.m == 2);
        CHECK(e.value == doctest::Approx(1.0));
    }

    SUBCASE("too short") {
        Eigen::VectorXd one(1);
        one << 1.0;
        CHECK_THROWS_AS(estimate_variance(one), InputError);
    }
}

TEST_CASE("variance estimator is accurate at constant f" *
          doctest::timeout(60)) {
    const Eigen::Index n = 100000;
    const double sigma_sq = 2.25;
    TrialRng rng(3, 0, TrialRng::Channel::y_noise);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        y[i] = 5.0 + std::sqrt(sigma_sq) * rng.normal();
    }
    CHECK(std::abs(estimate_variance(y).value - sigma_sq) < 0.05);
}

TEST_CASE("norm_sq_moments") {
    auto central = norm_sq_moments(0.0, 1.0, 5);
    CHECK(central.mean == doctest::Approx(5.0));
    CHECK(central.variance == doctest::Approx(10.0));

    auto noncentral = norm_sq_moments(4.0, 1.0, 3);
    CHECK(noncentral.mean == doctest::Approx(7.0));
    CHECK(noncentral.variance == doctest::Approx(22.0));

    auto deterministic = norm_sq_moments(4.0, 0.0, 3);
    CHECK(deterministic.mean == doctest::Approx(4.0));
    CHECK(deterministic.variance == doctest::Approx(0.0));

    CHECK_THROWS_AS(norm_sq_moments(-1.0, 1.0, 3), InputError);
}

TEST_CASE("numerator_mse_exact") {
    CHECK(numerator_mse_exact(1.0, 1.0, 1.0, 4.0, 4) == doctest::Approx(20.0));
    CHECK(numerator_mse_exact(0.0, 0.0, 3.0, 4.0, 4) == doctest::Approx(0.0));
    // sigma1^2=sigma2^2=1, r=2, mu2=(1,1,1,1): 4 + 4 + 32 + 16
    CHECK(numerator_mse_exact(1.0, 1.0, 2.0, 4.0, 4) == doctest::Approx(56.0));
}

TEST_CASE("numerator MSE matches Monte Carlo" * doctest::timeout(60)) {
    const Eigen::Index n = 4;
    const double r = 2.0;
    const Eigen::VectorXd mu2 = Eigen::VectorXd::Ones(n);
    const Eigen::VectorXd mu1 = r * mu2;
    Welford sq;
    for (int trial = 0; trial < 100000; ++trial) {
        TrialRng rng_x(13, static_cast<std::uint64_t>(trial),
                       TrialRng::Channel::x_noise);
        TrialRng rng_y(13, static_cast<std::uint64_t>(trial),
                       TrialRng::Channel::y_noise);
        Eigen::VectorXd x(n), y(n);
        for (Eigen::Index i = 0; i < n; ++i) x[i] = mu1[i] + rng_x.normal();
        for (Eigen::Index i = 0; i < n; ++i) y[i] = mu2[i] + rng_y.normal();
        const double d = y.squaredNorm() - static_cast<double>(n);
        const double num = x.dot(y) - r * d;
        sq.add(num * num);
    }
    const double expected = numerator_mse_exact(1.0, 1.0, r, 4.0, n);
    CHECK(std::abs(sq.mean - expected) < 3.0 * sq.se_of_mean());
}

TEST_CASE("chebyshev_conditioning_bound") {
    CHECK(chebyshev_conditioning_bound(0.5, 1.0, 100.0, 100) ==
          doctest::Approx(0.24));
    CHECK(chebyshev_conditioning_bound(0.5, 0.0, 100.0, 100) ==
          doctest::Approx(0.0));
    // Raw formula above 1 gets clamped.
    CHECK(chebyshev_conditioning_bound(0.9, 1.0, 0.5, 100) ==
          doctest::Approx(1.0));
    CHECK_THROWS_AS(chebyshev_conditioning_bound(1.5, 1.0, 1.0, 10), InputError);
    CHECK_THROWS_AS(chebyshev_conditioning_bound(0.5, 1.0, 0.0, 10), InputError);
}

TEST_CASE("chebyshev bound dominates the empirical event" *
          doctest::timeout(60)) {
    const Eigen::Index n = 100;
    const double mu2_sq = 100.0;
    long long small = 0;
    const int trials = 100000;
    for (int trial = 0; trial < trials; ++trial) {
        TrialRng rng(17, static_cast<std::uint64_t>(trial),
                     TrialRng::Channel::y_noise);
        double ysq = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double v = 1.0 + rng.normal();
            ysq += v * v;
        }
        const double d = ysq - static_cast<double>(n);
        if (std::abs(d) <= 0.5 * mu2_sq) ++small;
    }
    const double freq = static_cast<double>(small) / trials;
    CHECK(freq <= chebyshev_conditioning_bound(0.5, 1.0, mu2_sq, n));
}

TEST_CASE("variance_estimator_mse_exact") {
    CHECK(variance_estimator_mse_exact(0.0, 1.0, 2) == doctest::Approx(1.0));
    CHECK(variance_estimator_mse_exact(0.0, 0.0, 2) == doctest::Approx(0.0));
    CHECK(variance_estimator_mse_exact(0.0, 1.0, 50) == doctest::Approx(0.04));
}

TEST_CASE("plug-in variance path records provenance") {
    Eigen::VectorXd y(4);
    y << 1, 3, 2, 2;  // sigma-hat^2 = 1
    PairedObservations obs;
    obs.x = 2.0 * y;
    obs.y = y;
    auto est = estimate_ratio_plugin_variance(obs);
    CHECK(est.sigma2_provenance == Sigma2Provenance::estimated);
    CHECK(est.sigma2_sq_used == doctest::Approx(1.0));
    CHECK(est.denominator == doctest::Approx(y.squaredNorm() - 4.0));
}

TEST_CASE("estimator properties on random inputs") {
    std::mt19937_64 gen(42);
    std::normal_distribution<double> dist(0.5, 2.0);
    for (int rep = 0; rep < 50; ++rep) {
        const Eigen::Index n = 2 + static_cast<Eigen::Index>(gen() % 200);
        PairedObservations obs;
        obs.x.resize(n);
        obs.y.resize(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            obs.x[i] = dist(gen);
            obs.y[i] = dist(gen);
        }
        obs.sigma2_sq = 0.3;
        const auto est = estimate_ratio(obs);
        const double xy = compensated_dot(obs.x, obs.y);

        // Reconstruction identity.
        CHECK(est.value * est.denominator ==
              doctest::Approx(xy).epsilon(1e-12));

        // Scale equivariance (exact for a power-of-two factor).
        PairedObservations scaled = obs;
        scaled.x *= 4.0;
        CHECK(estimate_ratio(scaled).value == 4.0 * est.value);

        // Naive vs corrected relationship.
        const auto naive = estimate_ratio_naive(obs);
        CHECK(est.value ==
              doctest::Approx(naive.value * naive.denominator / est.denominator)
                  .epsilon(1e-12));

        // Permutation invariance under simultaneous shuffles.
        std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
        std::iota(perm.begin(), perm.end(), Eigen::Index{0});
        std::shuffle(perm.begin(), perm.end(), gen);
        PairedObservations shuffled = obs;
        for (Eigen::Index i = 0; i < n; ++i) {
            shuffled.x[i] = obs.x[perm[static_cast<std::size_t>(i)]];
            shuffled.y[i] = obs.y[perm[static_cast<std::size_t>(i)]];
        }
        CHECK(estimate_ratio(shuffled).value ==
              doctest::Approx(est.value).epsilon(1e-12));
    }
}
