#include "ratioreg/estimators.hpp"

#include <cmath>
#include <string>

#include "ratioreg/errors.hpp"
#include "ratioreg/numeric.hpp"

namespace ratioreg {

void PairedObservations::validate() const {
    if (x.size() != y.size()) {
        throw InputError("x and y must have equal length, got " +
                         std::to_string(x.size()) + " vs " +
                         std::to_string(y.size()));
    }
    if (y.size() < 2) {
        throw InputError("need at least 2 paired observations");
    }
    if (sigma1_sq && *sigma1_sq < 0.0) {
        throw InputError("sigma1_sq must be nonnegative");
    }
    if (sigma2_sq && *sigma2_sq < 0.0) {
        throw InputError("sigma2_sq must be nonnegative");
    }
}

double denominator(const Eigen::Ref<const Eigen::VectorXd>& y, double sigma2_sq) {
    if (y.size() == 0) {
        throw InputError("denominator: empty vector");
    }
    if (sigma2_sq < 0.0) {
        throw InputError("denominator: sigma2_sq must be nonnegative");
    }
    return compensated_sum_sq(y) - static_cast<double>(y.size()) * sigma2_sq;
}

RatioEstimate estimate_ratio_naive(const PairedObservations& obs) {
    obs.validate();
    const double y_norm_sq = compensated_sum_sq(obs.y);
    if (y_norm_sq == 0.0) {
        throw DegenerateDenominatorError("naive estimator: ||y||^2 is zero");
    }
    RatioEstimate est;
    est.value = compensated_dot(obs.x, obs.y) / y_norm_sq;
    est.denominator = y_norm_sq;
    est.kind = EstimatorKind::naive;
    est.condition_beta = BetaVerdict::not_checked;
    est.n = obs.n();
    est.sigma2_sq_used = 0.0;
    return est;
}

namespace {

RatioEstimate corrected_estimate(const PairedObservations& obs, double sigma2_sq,
                                 Sigma2Provenance provenance,
                                 std::optional<double> beta) {
    obs.validate();
    const double d = denominator(obs.y, sigma2_sq);
    if (d == 0.0) {
        throw DegenerateDenominatorError(
            "corrected estimator: denominator ||y||^2 - n*sigma2^2 is exactly zero");
    }
    RatioEstimate est;
    est.value = compensated_dot(obs.x, obs.y) / d;
    est.denominator = d;
    est.kind = EstimatorKind::corrected;
    est.n = obs.n();
    est.sigma2_sq_used = sigma2_sq;
    est.sigma2_provenance = provenance;
    if (beta) {
        if (*beta <= 0.0) {
            throw InputError("beta must be positive");
        }
        est.beta = *beta;
        est.condition_beta =
            std::abs(d) > *beta * static_cast<double>(obs.n())
                ? BetaVerdict::passed
                : BetaVerdict::failed;
    }
    return est;
}

}  // namespace

RatioEstimate estimate_ratio(const PairedObservations& obs,
                             std::optional<double> beta) {
    if (!obs.sigma2_sq) {
        throw InputError(
            "estimate_ratio: sigma2_sq must be supplied (or use the "
            "plug-in variance path)");
    }
    return corrected_estimate(obs, *obs.sigma2_sq, Sigma2Provenance::supplied,
                              beta);
}

RatioEstimate estimate_ratio_plugin_variance(const PairedObservations& obs,
                                             std::optional<double> beta) {
    obs.validate();
    const double sigma2_sq = estimate_variance(obs.y).value;
    return corrected_estimate(obs, sigma2_sq, Sigma2Provenance::estimated, beta);
}

VarianceEstimate estimate_variance(const Eigen::Ref<const Eigen::VectorXd>& y) {
    if (y.size() < 2) {
        throw InputError("estimate_variance: need at least 2 samples");
    }
    const Eigen::Index m = y.size() / 2;
    CompensatedSum acc;
    for (Eigen::Index i = 0; i < m; ++i) {
        const double d = y[2 * i] - y[2 * i + 1];
        acc.add(d * d);
    }
    VarianceEstimate est;
    est.value = acc.value() / (2.0 * static_cast<double>(m));
    est.m = m;
    est.differences_used = m;
    return est;
}

NormSqMoments norm_sq_moments(double mu_norm_sq, double sigma_sq,
                              Eigen::Index n) {
    if (mu_norm_sq < 0.0 || sigma_sq < 0.0 || n < 1) {
        throw InputError("norm_sq_moments: invalid inputs");
    }
    const double dn = static_cast<double>(n);
    return {mu_norm_sq + dn * sigma_sq,
            2.0 * dn * sigma_sq * sigma_sq + 4.0 * sigma_sq * mu_norm_sq};
}

double numerator_mse_exact(double sigma1_sq, double sigma2_sq, double r,
                           double mu2_norm_sq, Eigen::Index n) {
    if (sigma1_sq < 0.0 || sigma2_sq < 0.0 || mu2_norm_sq < 0.0 || n < 1) {
        throw InputError("numerator_mse_exact: invalid inputs");
    }
    const double dn = static_cast<double>(n);
    return sigma1_sq * mu2_norm_sq + dn * sigma1_sq * sigma2_sq +
           2.0 * dn * r * r * sigma2_sq * sigma2_sq +
           r * r * sigma2_sq * mu2_norm_sq;
}

double chebyshev_conditioning_bound(double alpha, double sigma2_sq,
                                    double mu2_norm_sq, Eigen::Index n) {
    if (alpha <= 0.0 || alpha >= 1.0) {
        throw InputError("chebyshev_conditioning_bound: alpha must be in (0,1)");
    }
    if (sigma2_sq < 0.0 || mu2_norm_sq <= 0.0 || n < 1) {
        throw InputError("chebyshev_conditioning_bound: invalid inputs");
    }
    const double var_d = norm_sq_moments(mu2_norm_sq, sigma2_sq, n).variance;
    const double one_minus_alpha = 1.0 - alpha;
    const double raw =
        var_d / (one_minus_alpha * one_minus_alpha * mu2_norm_sq * mu2_norm_sq);
    return std::min(1.0, raw);
}

double variance_estimator_mse_exact(double nu_sq_sum, double sigma_sq,
                                    Eigen::Index m) {
    if (nu_sq_sum < 0.0 || sigma_sq < 0.0 || m < 1) {
        throw InputError("variance_estimator_mse_exact: invalid inputs");
    }
    const double dm = static_cast<double>(m);
    return (nu_sq_sum * nu_sq_sum + 8.0 * sigma_sq * nu_sq_sum +
            8.0 * dm * sigma_sq * sigma_sq) /
           (4.0 * dm * dm);
}

}  // namespace ratioreg
