#pragma once

#include <Eigen/Dense>
#include <optional>

namespace ratioreg {

enum class EstimatorKind { naive, corrected, mismatched_time };
enum class BetaVerdict { passed, failed, not_checked };
enum class Sigma2Provenance { supplied, estimated };

// Two channels observed on a common grid: x_i = r*f(t_i) + z_i and
// y_i = f(t_i) + w_i, with optional known noise variances.
struct PairedObservations {
    Eigen::VectorXd x;
    Eigen::VectorXd y;
    std::optional<double> sigma1_sq;
    std::optional<double> sigma2_sq;

    [[nodiscard]] Eigen::Index n() const { return y.size(); }
    void validate() const;  // throws InputError on any broken invariant
};

struct RatioEstimate {
    double value = 0.0;
    double denominator = 0.0;  // ||y||^2 - n*sigma2^2 (||y||^2 for naive)
    EstimatorKind kind = EstimatorKind::corrected;
    BetaVerdict condition_beta = BetaVerdict::not_checked;
    double beta = 0.0;  // threshold used; meaningful only when checked
    Eigen::Index n = 0;
    double sigma2_sq_used = 0.0;
    Sigma2Provenance sigma2_provenance = Sigma2Provenance::supplied;
};

struct VarianceEstimate {
    double value = 0.0;        // sigma-hat^2
    Eigen::Index m = 0;        // floor(n/2) difference pairs
    Eigen::Index differences_used = 0;
};

struct NormSqMoments {
    double mean = 0.0;
    double variance = 0.0;
};

// D(y) = ||y||^2 - n*sigma2_sq. May be negative or zero; never clamped.
double denominator(const Eigen::Ref<const Eigen::VectorXd>& y, double sigma2_sq);

// r-tilde = <x,y> / ||y||^2. Biased toward zero when sigma2 > 0.
RatioEstimate estimate_ratio_naive(const PairedObservations& obs);

// r-hat = <x,y> / (||y||^2 - n*sigma2^2). Requires sigma2_sq on obs. When
// beta is given, the checkable condition |D| > beta*n is recorded in the
// verdict; a failing condition still returns the estimate.
RatioEstimate estimate_ratio(const PairedObservations& obs,
                             std::optional<double> beta = std::nullopt);

// Convenience path: plugs estimate_variance(obs.y) into sigma2_sq and marks
// the provenance as estimated.
RatioEstimate estimate_ratio_plugin_variance(
    const PairedObservations& obs, std::optional<double> beta = std::nullopt);

// sigma-hat^2 = (1/2m) * sum d_i^2 with d_i = y_{2i-1} - y_{2i} (1-based).
// A trailing unpaired sample is discarded.
VarianceEstimate estimate_variance(const Eigen::Ref<const Eigen::VectorXd>& y);

// Mean and variance of ||Z||^2 for Z ~ N(mu, sigma^2 I_n):
// mean = ||mu||^2 + n*sigma^2, variance = 2n*sigma^4 + 4*sigma^2*||mu||^2.
NormSqMoments norm_sq_moments(double mu_norm_sq, double sigma_sq, Eigen::Index n);

// Exact E[(<X,Y> - rD)^2] =
// sigma1^2*||mu2||^2 + n*sigma1^2*sigma2^2 + 2n*r^2*sigma2^4
// + r^2*sigma2^2*||mu2||^2.
double numerator_mse_exact(double sigma1_sq, double sigma2_sq, double r,
                           double mu2_norm_sq, Eigen::Index n);

// Chebyshev upper bound on P(|D(Y)| <= alpha*E[D(Y)]), clamped to [0,1]:
// min(1, (2n*sigma2^4 + 4*sigma2^2*||mu2||^2) / ((1-alpha)^2*||mu2||^4)).
double chebyshev_conditioning_bound(double alpha, double sigma2_sq,
                                    double mu2_norm_sq, Eigen::Index n);

// Exact E[(sigma-hat^2 - sigma^2)^2] =
// (1/4m^2) * ((sum nu^2)^2 + 8*sigma^2*sum nu^2 + 8m*sigma^4),
// where nu_i = f(t_{2i-1}) - f(t_{2i}).
double variance_estimator_mse_exact(double nu_sq_sum, double sigma_sq,
                                    Eigen::Index m);

}  // namespace ratioreg
