#include "ratioreg/reporting.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "ratioreg/csv.hpp"
#include "ratioreg/errors.hpp"
#include "ratioreg/numeric.hpp"

namespace ratioreg {

namespace {

constexpr int kSchemaVersion = 1;

struct AlignedForEstimate {
    PairedObservations obs;
    double max_time_gap = 0.0;
    // Per-point scale on the y-channel noise variance (1 unless the
    // y-channel was interpolated).
    Eigen::VectorXd y_variance_scale;
    Eigen::VectorXd raw_y;  // pre-interpolation y values, for variance estimation
};

AlignedForEstimate align_for_estimate(const SampleSeries& a,
                                      const SampleSeries& b,
                                      const RunConfig& config) {
    AlignedForEstimate out;
    switch (config.alignment) {
        case RunConfig::Alignment::same_grid: {
            auto aligned = pair_same_grid(a, b, config.tol);
            out.obs = std::move(aligned.obs);
            out.max_time_gap = aligned.report.max_time_gap;
            out.raw_y = out.obs.y;
            out.y_variance_scale = Eigen::VectorXd::Ones(out.obs.n());
            return out;
        }
        case RunConfig::Alignment::nearest_unique: {
            auto aligned = pair_nearest_unique(a, b);
            out.obs = std::move(aligned.obs);
            out.max_time_gap = aligned.report.max_time_gap;
            out.raw_y = out.obs.y;
            out.y_variance_scale = Eigen::VectorXd::Ones(out.obs.n());
            return out;
        }
        case RunConfig::Alignment::interpolate: {
            // Interpolate the denser channel onto the other channel's grid so
            // that no observed point is reused.
            if (a.size() >= b.size()) {
                auto interp = interpolate_disjoint(a, b.times);
                out.obs.x = interp.series.values;
                out.obs.y = b.values;
                out.raw_y = b.values;
                out.y_variance_scale = Eigen::VectorXd::Ones(b.size());
                double gap = 0.0;
                for (std::size_t i = 0; i < interp.pairs_used.size(); ++i) {
                    const auto [lo, hi] = interp.pairs_used[i];
                    const double t = b.times[static_cast<Eigen::Index>(i)];
                    gap = std::max(gap, std::min(std::abs(t - a.times[lo]),
                                                 std::abs(t - a.times[hi])));
                }
                out.max_time_gap = gap;
            } else {
                auto interp = interpolate_disjoint(b, a.times);
                out.obs.x = a.values;
                out.obs.y = interp.series.values;
                out.raw_y = b.values;
                out.y_variance_scale = interp.variance_scale;
                double gap = 0.0;
                for (std::size_t i = 0; i < interp.pairs_used.size(); ++i) {
                    const auto [lo, hi] = interp.pairs_used[i];
                    const double t = a.times[static_cast<Eigen::Index>(i)];
                    gap = std::max(gap, std::min(std::abs(t - b.times[lo]),
                                                 std::abs(t - b.times[hi])));
                }
                out.max_time_gap = gap;
            }
            return out;
        }
    }
    throw InputError("unknown alignment method");
}

}  // namespace

const char* to_string(BetaVerdict v) {
    switch (v) {
        case BetaVerdict::passed:
            return "passed";
        case BetaVerdict::failed:
            return "failed";
        case BetaVerdict::not_checked:
            return "not_checked";
    }
    return "?";
}

const char* to_string(Sigma2Provenance p) {
    return p == Sigma2Provenance::supplied ? "supplied" : "estimated";
}

std::uint64_t effective_seed(std::uint64_t configured) {
    if (const char* env = std::getenv("RATIOREG_SEED")) {
        return std::strtoull(env, nullptr, 10);
    }
    return configured;
}

nlohmann::json EstimateReport::to_json() const {
    nlohmann::json j;
    j["schema_version"] = kSchemaVersion;
    j["ratio"] = ratio;
    j["denominator"] = denominator;
    j["condition_beta"] = to_string(condition_beta);
    if (beta) {
        j["beta"] = *beta;
    } else {
        j["beta"] = nullptr;
    }
    j["sigma2_sq"] = sigma2_sq;
    j["sigma2_provenance"] = to_string(sigma2_provenance);
    j["n"] = n;
    j["max_time_gap"] = max_time_gap;
    nlohmann::json curve = nlohmann::json::array();
    for (const auto& [k, value] : prefix_curve) {
        curve.push_back({{"k", k}, {"ratio", value}});
    }
    j["prefix_curve"] = curve;
    return j;
}

nlohmann::json VarianceReport::to_json() const {
    return {{"schema_version", kSchemaVersion},
            {"sigma2_sq", sigma2_sq},
            {"m", m},
            {"n", n}};
}

EstimateReport cmd_estimate(const RunConfig& config) {
    const SampleSeries a = read_series_csv(config.x_path);
    const SampleSeries b = read_series_csv(config.y_path);
    AlignedForEstimate aligned = align_for_estimate(a, b, config);
    const Eigen::Index n = aligned.obs.n();

    EstimateReport report;
    if (config.sigma2_sq) {
        report.sigma2_sq = *config.sigma2_sq;
        report.sigma2_provenance = Sigma2Provenance::supplied;
    } else {
        report.sigma2_sq = estimate_variance(aligned.raw_y).value;
        report.sigma2_provenance = Sigma2Provenance::estimated;
    }

    // Per-point y-noise variances; their sum replaces n*sigma2^2 in D so
    // E[D] = ||mu2||^2 stays exact after interpolation.
    const Eigen::VectorXd point_var = report.sigma2_sq * aligned.y_variance_scale;
    const double effective_sigma2 = point_var.sum() / static_cast<double>(n);

    aligned.obs.sigma2_sq = effective_sigma2;
    const RatioEstimate est = estimate_ratio(aligned.obs, config.beta);

    report.ratio = est.value;
    report.denominator = est.denominator;
    report.condition_beta = est.condition_beta;
    report.beta = config.beta;
    report.n = n;
    report.max_time_gap = aligned.max_time_gap;

    // Prefix curve via running compensated sums: r-hat on the first k pairs.
    const Eigen::Index stride = std::max<Eigen::Index>(1, config.stride);
    CompensatedSum xy;
    CompensatedSum ysq;
    CompensatedSum var_sum;
    for (Eigen::Index k = 1; k <= n; ++k) {
        xy.add(aligned.obs.x[k - 1] * aligned.obs.y[k - 1]);
        ysq.add(aligned.obs.y[k - 1] * aligned.obs.y[k - 1]);
        var_sum.add(point_var[k - 1]);
        if (k < 2) {
            continue;
        }
        if ((k - 2) % stride == 0 || k == n) {
            const double d = ysq.value() - var_sum.value();
            report.prefix_curve.emplace_back(
                k, d == 0.0 ? std::numeric_limits<double>::quiet_NaN()
                            : xy.value() / d);
        }
    }
    return report;
}

VarianceReport cmd_variance(const RunConfig& config) {
    const SampleSeries y = read_series_csv(config.y_path);
    const VarianceEstimate est = estimate_variance(y.values);
    VarianceReport report;
    report.sigma2_sq = est.value;
    report.m = est.m;
    report.n = y.size();
    return report;
}

SimulateOutputs cmd_simulate(const RunConfig& config) {
    const std::uint64_t seed = effective_seed(config.seed);
    const SimulatedData data = simulate(config.model, seed);

    std::filesystem::create_directories(config.out_path);
    SimulateOutputs paths;
    paths.x_csv = (std::filesystem::path(config.out_path) / "x.csv").string();
    paths.y_csv = (std::filesystem::path(config.out_path) / "y.csv").string();
    paths.truth_json =
        (std::filesystem::path(config.out_path) / "truth.json").string();

    write_series_csv(paths.x_csv, data.x_series);
    write_series_csv(paths.y_csv, data.y_series);

    nlohmann::json truth;
    truth["schema_version"] = kSchemaVersion;
    truth["r"] = config.model.r;
    truth["f"] = config.model.f.describe();
    truth["mu2_norm_sq"] = data.mu2_norm_sq;
    truth["sigma1"] = config.model.sigma1;
    truth["sigma2"] = config.model.sigma2;
    truth["n"] = config.model.n;
    truth["seed"] = seed;
    truth["time_offset"] = config.model.time_offset;
    std::ofstream out(paths.truth_json, std::ios::binary);
    if (!out) {
        throw InputError("cannot write '" + paths.truth_json + "'");
    }
    out << truth.dump(2) << "\n";
    return paths;
}

namespace {

double binomial_se(double p, double trials) {
    return std::sqrt(std::max(p * (1.0 - p), 1e-12) / trials);
}

nlohmann::json check_entry(const std::string& name, bool pass,
                           nlohmann::json measured) {
    return {{"name", name}, {"pass", pass}, {"measured", std::move(measured)}};
}

}  // namespace

nlohmann::json cmd_verify(const RunConfig& config) {
    std::ifstream in(config.config_path);
    if (!in) {
        throw InputError("cannot open config '" + config.config_path + "'");
    }
    nlohmann::json cfg = nlohmann::json::parse(in);

    ModelParams base;
    base.r = cfg.value("r", 10.0);
    base.f = MeanFunction::parse(cfg.value("f", std::string("sin2")));
    base.sigma1 = cfg.value("sigma1", 1.0);
    base.sigma2 = cfg.value("sigma2", 1.0);
    const double alpha = cfg.value("alpha", 0.5);
    const double c = cfg.value("c", 1.0);
    std::optional<double> beta;
    if (cfg.contains("beta") && !cfg["beta"].is_null()) {
        beta = cfg["beta"].get<double>();
    }
    const std::uint64_t seed = effective_seed(cfg.value("seed", 1ULL));
    const Eigen::Index trials = cfg.value("trials", Eigen::Index{2000});
    std::vector<Eigen::Index> n_grid;
    for (const auto& v : cfg.value("n_grid", nlohmann::json::array({100, 1000, 10000}))) {
        n_grid.push_back(v.get<Eigen::Index>());
    }
    if (n_grid.size() < 3) {
        throw InputError("verify: n_grid needs at least 3 points");
    }

    nlohmann::json result;
    result["schema_version"] = kSchemaVersion;
    result["config"] = cfg;
    nlohmann::json checks = nlohmann::json::array();

    // Matched-time trials across the n grid.
    std::vector<TrialReport> reports;
    nlohmann::json report_list = nlohmann::json::array();
    for (std::size_t gi = 0; gi < n_grid.size(); ++gi) {
        ModelParams params = base;
        params.n = n_grid[gi];
        TrialReport rep = run_trials(params, trials, alpha, beta, c,
                                     seed + static_cast<std::uint64_t>(gi));
        report_list.push_back(rep.to_json());
        reports.push_back(std::move(rep));
    }
    result["reports"] = report_list;

    // Conditional MSE scaling.
    try {
        const ScalingFit fit = scaling_fit(reports);
        checks.push_back(check_entry(
            "cond_mse_scaling",
            fit.exponent >= -1.3 && fit.exponent <= -0.7 && fit.r_squared >= 0.9,
            {{"exponent", fit.exponent}, {"r_squared", fit.r_squared}}));
    } catch (const InputError& e) {
        checks.push_back(check_entry("cond_mse_scaling", false,
                                     {{"error", e.what()}}));
    }

    // Consistency: non-decreasing within 3 binomial standard errors and
    // >= 0.99 at the largest n.
    bool monotone = true;
    for (std::size_t i = 1; i < reports.size(); ++i) {
        const double prev = reports[i - 1].consistency_rate;
        const double cur = reports[i].consistency_rate;
        const double slack =
            3.0 * (binomial_se(prev, static_cast<double>(trials)) +
                   binomial_se(cur, static_cast<double>(trials)));
        if (cur < prev - slack) {
            monotone = false;
        }
    }
    const double final_rate = reports.back().consistency_rate;
    checks.push_back(check_entry(
        "consistency", monotone && final_rate >= 0.99,
        {{"monotone", monotone}, {"rate_at_max_n", final_rate}}));

    // Chebyshev conditioning bound at three alphas, smallest grid point.
    {
        ModelParams params = base;
        params.n = n_grid.front();
        const double mu2sq = params.mu2_norm_sq();
        bool all_ok = true;
        nlohmann::json measured = nlohmann::json::array();
        for (const double a : {0.25, 0.5, 0.75}) {
            const TrialReport rep =
                run_trials(params, trials, a, beta, c, seed + 101);
            const double bound = chebyshev_conditioning_bound(
                a, params.sigma2 * params.sigma2, mu2sq, params.n);
            const double slack =
                3.0 * binomial_se(bound, static_cast<double>(trials));
            const bool ok = rep.cond_event_fail_rate <= bound + slack;
            all_ok = all_ok && ok;
            measured.push_back({{"alpha", a},
                                {"empirical", rep.cond_event_fail_rate},
                                {"bound", bound},
                                {"pass", ok}});
        }
        checks.push_back(check_entry("chebyshev_bound", all_ok, measured));
    }

    // Heavy-tail diagnostic (infinite unconditional loss regime).
    {
        nlohmann::json ht = cfg.value(
            "heavy_tail", nlohmann::json{{"f", "const:0.1"},
                                         {"sigma2", 1.0},
                                         {"n", 20},
                                         {"trials", 100000}});
        ModelParams params = base;
        params.f = MeanFunction::parse(ht.value("f", std::string("const:0.1")));
        params.sigma2 = ht.value("sigma2", 1.0);
        params.n = ht.value("n", Eigen::Index{20});
        const Eigen::Index ht_trials = ht.value("trials", Eigen::Index{100000});
        const HeavyTailDiagnostic diag =
            heavy_tail_diagnostic(params, ht_trials, seed + 202);
        checks.push_back(check_entry(
            "heavy_tail", diag.max_loss_ratio > 1e3,
            {{"max_loss_ratio", diag.max_loss_ratio},
             {"small_denominator_rate", diag.small_denominator_rate}}));
    }

    // Mismatched-time runs with offset schedule 1/n.
    if (cfg.value("mismatched", true)) {
        bool all_ok = true;
        nlohmann::json measured = nlohmann::json::array();
        std::vector<std::pair<double, double>> mism_points;
        for (std::size_t gi = 0; gi < n_grid.size(); ++gi) {
            ModelParams params = base;
            params.n = n_grid[gi];
            params.time_offset = 1.0 / static_cast<double>(params.n);
            try {
                const TrialReport rep = mismatched_time_experiment(
                    params, trials, alpha, seed + static_cast<std::uint64_t>(gi),
                    c, beta);
                const double ratio = *rep.mismatched_cond_mse / *rep.cond_mse;
                const bool ok = ratio >= 0.5 && ratio <= 2.0;
                all_ok = all_ok && ok;
                mism_points.emplace_back(static_cast<double>(rep.n),
                                         *rep.mismatched_cond_mse);
                measured.push_back({{"n", rep.n},
                                    {"cond_mse", *rep.cond_mse},
                                    {"mismatched_cond_mse", *rep.mismatched_cond_mse},
                                    {"ratio", ratio},
                                    {"pass", ok}});
            } catch (const PremiseViolationError& e) {
                all_ok = false;
                measured.push_back({{"n", n_grid[gi]},
                                    {"premise_violation", e.what()},
                                    {"computed", e.computed_value},
                                    {"pass", false}});
            }
        }
        if (mism_points.size() >= 3) {
            const ScalingFit fit = scaling_fit(mism_points);
            const bool ok = fit.exponent >= -1.3 && fit.exponent <= -0.7;
            all_ok = all_ok && ok;
            measured.push_back(
                {{"scaling_exponent", fit.exponent}, {"pass", ok}});
        }
        checks.push_back(check_entry("mismatched_time", all_ok, measured));
    }

    bool all_pass = true;
    for (const auto& chk : checks) {
        all_pass = all_pass && chk["pass"].get<bool>();
    }
    result["checks"] = checks;
    result["all_pass"] = all_pass;
    return result;
}

void write_estimate_report(const EstimateReport& report, const RunConfig& config) {
    if (config.out_path.empty()) {
        throw InputError("no output path given");
    }
    std::ofstream out(config.out_path, std::ios::binary);
    if (!out) {
        throw InputError("cannot write '" + config.out_path + "'");
    }
    if (config.format == RunConfig::Format::json) {
        out << report.to_json().dump(2) << "\n";
        return;
    }
    // CSV: summary as comment lines, then the plot-ready prefix curve.
    char buf[128];
    out << "# ratio=" << report.ratio << "\n";
    out << "# denominator=" << report.denominator << "\n";
    out << "# condition_beta=" << to_string(report.condition_beta) << "\n";
    out << "# sigma2_sq=" << report.sigma2_sq << "\n";
    out << "# sigma2_provenance=" << to_string(report.sigma2_provenance) << "\n";
    out << "# n=" << report.n << "\n";
    out << "# max_time_gap=" << report.max_time_gap << "\n";
    out << "k,ratio\n";
    for (const auto& [k, value] : report.prefix_curve) {
        std::snprintf(buf, sizeof(buf), "%lld,%.17g\n",
                      static_cast<long long>(k), value);
        out << buf;
    }
}

}  // namespace ratioreg
