#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <json.hpp>

#include "ratioreg/model.hpp"

namespace ratioreg {

// Per-n Monte Carlo aggregates.
struct TrialReport {
    Eigen::Index n = 0;
    Eigen::Index trials = 0;
    double alpha = 0.5;
    std::optional<double> beta;
    double c = 1.0;  // consistency constant in c*log(n)/n
    std::uint64_t seed = 0;

    // Mean (r-hat - r)^2 over trials passing the oracle event
    // |D| > alpha*||mu2||^2; absent when no trial passed.
    std::optional<double> cond_mse;
    Eigen::Index conditioned_trials = 0;
    // Unconditional mean squared loss. Heavy-tailed: it does not converge
    // as trials grow, so nothing is ever asserted about its value.
    double uncond_mse = 0.0;
    // Fraction of trials failing the oracle event (|D| <= alpha*E[D]).
    double cond_event_fail_rate = 0.0;
    // Fraction failing the data-checkable event (|D| <= beta*n).
    std::optional<double> beta_event_fail_rate;
    // Fraction of trials with (r-hat - r)^2 <= c*log(n)/n.
    double consistency_rate = 0.0;
    double naive_mean = 0.0;
    // Mean of r-hat over conditioned trials.
    double cond_mean = 0.0;
    // Conditional MSE of the mismatched-time estimator r-hat', when computed.
    std::optional<double> mismatched_cond_mse;

    double mu2_norm_sq = 0.0;
    double time_offset = 0.0;

    [[nodiscard]] nlohmann::json to_json() const;
};

// Runs seeded independent trials of the model and aggregates losses and
// event frequencies. The mismatched-time estimator is evaluated whenever
// params.time_offset != 0.
TrialReport run_trials(const ModelParams& params, Eigen::Index trials,
                       double alpha, std::optional<double> beta, double c,
                       std::uint64_t seed);

struct ScalingFit {
    double exponent = 0.0;
    double r_squared = 0.0;
};

// Least-squares slope of log(mse) against log(n).
ScalingFit scaling_fit(const std::vector<std::pair<double, double>>& n_vs_mse);
ScalingFit scaling_fit(const std::vector<TrialReport>& reports);

struct HeavyTailDiagnostic {
    // Max single-trial (r-hat - r)^2 divided by the conditional MSE.
    double max_loss_ratio = 0.0;
    // Frequency of |D| <= 0.1 * E[D].
    double small_denominator_rate = 0.0;
};

// Demonstrates (does not prove) the infinite unconditional loss: with a
// small ||mu2||^2 relative to n*sigma2^2, near-zero denominators produce
// single-trial losses orders of magnitude above the conditional MSE.
HeavyTailDiagnostic heavy_tail_diagnostic(const ModelParams& params,
                                          Eigen::Index trials,
                                          std::uint64_t seed,
                                          double alpha = 0.5);

inline double default_premise_cap(double r) { return 10.0 * (1.0 + r * r); }

// Evaluates r-hat' = <X',Y>/D where X' is observed on the shifted grid.
// The premise ||X - X'||^2 = r^2*sum (f(t_i)-f(t_i+offset))^2 is computed
// up front; if it exceeds premise_cap a PremiseViolationError is thrown.
TrialReport mismatched_time_experiment(const ModelParams& params,
                                       Eigen::Index trials, double alpha,
                                       std::uint64_t seed, double c = 1.0,
                                       std::optional<double> beta = std::nullopt,
                                       std::optional<double> premise_cap =
                                           std::nullopt);

// ||X - X'||^2 for the configured offset; deterministic given params.
double mismatch_norm_sq(const ModelParams& params);

}  // namespace ratioreg
