#include "ratioreg/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "ratioreg/errors.hpp"
#include "ratioreg/estimators.hpp"
#include "ratioreg/numeric.hpp"
#include "ratioreg/rng.hpp"

namespace ratioreg {

nlohmann::json TrialReport::to_json() const {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["n"] = n;
    j["trials"] = trials;
    j["alpha"] = alpha;
    if (beta) {
        j["beta"] = *beta;
    } else {
        j["beta"] = nullptr;
    }
    j["c"] = c;
    j["seed"] = seed;
    if (cond_mse) {
        j["cond_mse"] = *cond_mse;
    } else {
        j["cond_mse"] = nullptr;
    }
    j["conditioned_trials"] = conditioned_trials;
    j["uncond_mse"] = uncond_mse;
    j["uncond_mse_stable"] = false;  // Prop-1 pathology: never assert this value
    j["cond_event_fail_rate"] = cond_event_fail_rate;
    if (beta_event_fail_rate) {
        j["beta_event_fail_rate"] = *beta_event_fail_rate;
    } else {
        j["beta_event_fail_rate"] = nullptr;
    }
    j["consistency_rate"] = consistency_rate;
    j["naive_mean"] = naive_mean;
    j["cond_mean"] = cond_mean;
    if (mismatched_cond_mse) {
        j["mismatched_cond_mse"] = *mismatched_cond_mse;
    } else {
        j["mismatched_cond_mse"] = nullptr;
    }
    j["mu2_norm_sq"] = mu2_norm_sq;
    j["time_offset"] = time_offset;
    return j;
}

double mismatch_norm_sq(const ModelParams& params) {
    const Eigen::VectorXd t = params.times();
    CompensatedSum acc;
    for (Eigen::Index i = 0; i < params.n; ++i) {
        const double d = params.f(t[i]) - params.f(t[i] + params.time_offset);
        acc.add(d * d);
    }
    return params.r * params.r * acc.value();
}

namespace {

TrialReport run_trials_impl(const ModelParams& params, Eigen::Index trials,
                            double alpha, std::optional<double> beta, double c,
                            std::uint64_t seed, bool compute_mismatched) {
    params.validate();
    if (trials < 1) {
        throw InputError("run_trials: trials must be positive");
    }
    if (alpha <= 0.0 || alpha >= 1.0) {
        throw InputError("run_trials: alpha must be in (0,1)");
    }
    if (beta && *beta <= 0.0) {
        throw InputError("run_trials: beta must be positive");
    }
    if (c <= 0.0) {
        throw InputError("run_trials: c must be positive");
    }

    const Eigen::Index n = params.n;
    const double dn = static_cast<double>(n);
    const Eigen::VectorXd t = params.times();
    Eigen::VectorXd mu2(n);
    Eigen::VectorXd mu1(n);
    Eigen::VectorXd mu1_shifted(n);  // r * f(t_i + offset)
    for (Eigen::Index i = 0; i < n; ++i) {
        mu2[i] = params.f(t[i]);
        mu1[i] = params.r * mu2[i];
        mu1_shifted[i] = params.r * params.f(t[i] + params.time_offset);
    }
    const double mu2_norm_sq = compensated_sum_sq(mu2);
    const double sigma1_sq = params.sigma1 * params.sigma1;
    const double sigma2_sq = params.sigma2 * params.sigma2;
    const double oracle_threshold = alpha * mu2_norm_sq;
    const double consistency_threshold = c * std::log(dn) / dn;

    CompensatedSum cond_loss;
    CompensatedSum uncond_loss;
    CompensatedSum cond_value;
    CompensatedSum naive_value;
    CompensatedSum mismatched_cond_loss;
    Eigen::Index conditioned = 0;
    Eigen::Index oracle_failed = 0;
    Eigen::Index beta_failed = 0;
    Eigen::Index consistent = 0;

    Eigen::VectorXd x(n);
    Eigen::VectorXd xp(n);
    Eigen::VectorXd y(n);
    for (Eigen::Index trial = 0; trial < trials; ++trial) {
        TrialRng rng_x(seed, static_cast<std::uint64_t>(trial),
                       TrialRng::Channel::x_noise);
        TrialRng rng_y(seed, static_cast<std::uint64_t>(trial),
                       TrialRng::Channel::y_noise);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double z = params.sigma1 == 0.0 ? 0.0 : params.sigma1 * rng_x.normal();
            x[i] = mu1[i] + z;
            xp[i] = mu1_shifted[i] + z;
        }
        for (Eigen::Index i = 0; i < n; ++i) {
            const double w = params.sigma2 == 0.0 ? 0.0 : params.sigma2 * rng_y.normal();
            y[i] = mu2[i] + w;
        }

        const double y_norm_sq = compensated_sum_sq(y);
        const double d = y_norm_sq - dn * sigma2_sq;
        const double xy = compensated_dot(x, y);
        const double r_hat = xy / d;
        const double loss = (r_hat - params.r) * (r_hat - params.r);

        uncond_loss.add(loss);
        naive_value.add(xy / y_norm_sq);
        if (loss <= consistency_threshold) {
            ++consistent;
        }
        const bool oracle_pass = std::abs(d) > oracle_threshold;
        if (!oracle_pass) {
            ++oracle_failed;
        } else {
            ++conditioned;
            cond_loss.add(loss);
            cond_value.add(r_hat);
            if (compute_mismatched) {
                const double rp = compensated_dot(xp, y) / d;
                mismatched_cond_loss.add((rp - params.r) * (rp - params.r));
            }
        }
        if (beta && !(std::abs(d) > *beta * dn)) {
            ++beta_failed;
        }
    }

    TrialReport report;
    report.n = n;
    report.trials = trials;
    report.alpha = alpha;
    report.beta = beta;
    report.c = c;
    report.seed = seed;
    report.conditioned_trials = conditioned;
    if (conditioned > 0) {
        report.cond_mse = cond_loss.value() / static_cast<double>(conditioned);
        report.cond_mean = cond_value.value() / static_cast<double>(conditioned);
        if (compute_mismatched) {
            report.mismatched_cond_mse =
                mismatched_cond_loss.value() / static_cast<double>(conditioned);
        }
    }
    report.uncond_mse = uncond_loss.value() / static_cast<double>(trials);
    report.cond_event_fail_rate =
        static_cast<double>(oracle_failed) / static_cast<double>(trials);
    if (beta) {
        report.beta_event_fail_rate =
            static_cast<double>(beta_failed) / static_cast<double>(trials);
    }
    report.consistency_rate =
        static_cast<double>(consistent) / static_cast<double>(trials);
    report.naive_mean = naive_value.value() / static_cast<double>(trials);
    report.mu2_norm_sq = mu2_norm_sq;
    report.time_offset = params.time_offset;
    return report;
}

}  // namespace

TrialReport run_trials(const ModelParams& params, Eigen::Index trials,
                       double alpha, std::optional<double> beta, double c,
                       std::uint64_t seed) {
    return run_trials_impl(params, trials, alpha, beta, c, seed,
                           params.time_offset != 0.0);
}

ScalingFit scaling_fit(const std::vector<std::pair<double, double>>& n_vs_mse) {
    std::set<double> distinct;
    for (const auto& [n, mse] : n_vs_mse) {
        if (n <= 0.0) {
            throw InputError("scaling_fit: n values must be positive");
        }
        if (mse <= 0.0) {
            throw InputError("scaling_fit: mse values must be positive");
        }
        distinct.insert(n);
    }
    if (distinct.size() < 3) {
        throw InputError("scaling_fit: need at least 3 distinct n values");
    }

    const Eigen::Index k = static_cast<Eigen::Index>(n_vs_mse.size());
    Eigen::MatrixXd design(k, 2);
    Eigen::VectorXd rhs(k);
    for (Eigen::Index i = 0; i < k; ++i) {
        design(i, 0) = 1.0;
        design(i, 1) = std::log(n_vs_mse[static_cast<std::size_t>(i)].first);
        rhs[i] = std::log(n_vs_mse[static_cast<std::size_t>(i)].second);
    }
    const Eigen::Vector2d coef =
        design.colPivHouseholderQr().solve(rhs);
    const Eigen::VectorXd residual = rhs - design * coef;
    const double ss_res = residual.squaredNorm();
    const double ss_tot = (rhs.array() - rhs.mean()).matrix().squaredNorm();

    ScalingFit fit;
    fit.exponent = coef[1];
    fit.r_squared = ss_tot == 0.0 ? 1.0 : 1.0 - ss_res / ss_tot;
    return fit;
}

ScalingFit scaling_fit(const std::vector<TrialReport>& reports) {
    std::vector<std::pair<double, double>> points;
    points.reserve(reports.size());
    for (const auto& rep : reports) {
        if (!rep.cond_mse) {
            throw InputError("scaling_fit: report at n=" + std::to_string(rep.n) +
                             " has no conditional MSE");
        }
        points.emplace_back(static_cast<double>(rep.n), *rep.cond_mse);
    }
    return scaling_fit(points);
}

HeavyTailDiagnostic heavy_tail_diagnostic(const ModelParams& params,
                                          Eigen::Index trials,
                                          std::uint64_t seed, double alpha) {
    params.validate();
    if (trials < 1) {
        throw InputError("heavy_tail_diagnostic: trials must be positive");
    }

    const Eigen::Index n = params.n;
    const double dn = static_cast<double>(n);
    const Eigen::VectorXd mu2 = params.mu2();
    const Eigen::VectorXd mu1 = params.r * mu2;
    const double mu2_norm_sq = compensated_sum_sq(mu2);
    const double sigma2_sq = params.sigma2 * params.sigma2;

    CompensatedSum cond_loss;
    Eigen::Index conditioned = 0;
    Eigen::Index small_denominator = 0;
    double max_loss = 0.0;

    Eigen::VectorXd x(n);
    Eigen::VectorXd y(n);
    for (Eigen::Index trial = 0; trial < trials; ++trial) {
        TrialRng rng_x(seed, static_cast<std::uint64_t>(trial),
                       TrialRng::Channel::x_noise);
        TrialRng rng_y(seed, static_cast<std::uint64_t>(trial),
                       TrialRng::Channel::y_noise);
        for (Eigen::Index i = 0; i < n; ++i) {
            x[i] = mu1[i] +
                   (params.sigma1 == 0.0 ? 0.0 : params.sigma1 * rng_x.normal());
        }
        for (Eigen::Index i = 0; i < n; ++i) {
            y[i] = mu2[i] +
                   (params.sigma2 == 0.0 ? 0.0 : params.sigma2 * rng_y.normal());
        }
        const double d = compensated_sum_sq(y) - dn * sigma2_sq;
        const double r_hat = compensated_dot(x, y) / d;
        const double loss = (r_hat - params.r) * (r_hat - params.r);
        max_loss = std::max(max_loss, loss);
        if (std::abs(d) <= 0.1 * mu2_norm_sq) {
            ++small_denominator;
        }
        if (std::abs(d) > alpha * mu2_norm_sq) {
            ++conditioned;
            cond_loss.add(loss);
        }
    }

    HeavyTailDiagnostic diag;
    diag.small_denominator_rate =
        static_cast<double>(small_denominator) / static_cast<double>(trials);
    if (conditioned == 0) {
        diag.max_loss_ratio = std::numeric_limits<double>::infinity();
    } else {
        const double cond_mse =
            cond_loss.value() / static_cast<double>(conditioned);
        diag.max_loss_ratio =
            cond_mse == 0.0 ? (max_loss == 0.0 ? 0.0
                                               : std::numeric_limits<double>::infinity())
                            : max_loss / cond_mse;
    }
    return diag;
}

TrialReport mismatched_time_experiment(const ModelParams& params,
                                       Eigen::Index trials, double alpha,
                                       std::uint64_t seed, double c,
                                       std::optional<double> beta,
                                       std::optional<double> premise_cap) {
    const double cap = premise_cap ? *premise_cap : default_premise_cap(params.r);
    const double diff_sq = mismatch_norm_sq(params);
    if (diff_sq > cap) {
        throw PremiseViolationError(
            "mismatched_time_experiment: ||X - X'||^2 = " +
                std::to_string(diff_sq) + " exceeds cap " + std::to_string(cap),
            diff_sq);
    }
    return run_trials_impl(params, trials, alpha, beta, c, seed,
                           /*compute_mismatched=*/true);
}

}  // namespace ratioreg
