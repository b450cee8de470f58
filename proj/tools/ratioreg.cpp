#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "ratioreg/errors.hpp"
#include "ratioreg/reporting.hpp"

namespace {

using ratioreg::RunConfig;

int run_estimate(const RunConfig& config) {
    const ratioreg::EstimateReport report = ratioreg::cmd_estimate(config);
    if (!config.out_path.empty()) {
        ratioreg::write_estimate_report(report, config);
    }
    std::cout << report.to_json().dump(2) << "\n";
    if (config.beta && report.condition_beta != ratioreg::BetaVerdict::passed) {
        std::cerr << "condition |D| > beta*n failed (D=" << report.denominator
                  << ", beta=" << *config.beta << ", n=" << report.n << ")\n";
        return 3;
    }
    return 0;
}

int run_variance(const RunConfig& config) {
    const ratioreg::VarianceReport report = ratioreg::cmd_variance(config);
    const std::string text = report.to_json().dump(2);
    if (!config.out_path.empty()) {
        std::ofstream out(config.out_path, std::ios::binary);
        if (!out) {
            throw ratioreg::InputError("cannot write '" + config.out_path + "'");
        }
        out << text << "\n";
    }
    std::cout << text << "\n";
    return 0;
}

int run_simulate(const RunConfig& config) {
    const ratioreg::SimulateOutputs paths = ratioreg::cmd_simulate(config);
    nlohmann::json j{{"x_csv", paths.x_csv},
                     {"y_csv", paths.y_csv},
                     {"truth_json", paths.truth_json}};
    std::cout << j.dump(2) << "\n";
    return 0;
}

int run_verify(const RunConfig& config) {
    const nlohmann::json result = ratioreg::cmd_verify(config);
    const std::string text = result.dump(2);
    if (!config.out_path.empty()) {
        std::ofstream out(config.out_path, std::ios::binary);
        if (!out) {
            throw ratioreg::InputError("cannot write '" + config.out_path + "'");
        }
        out << text << "\n";
    }
    std::cout << text << "\n";
    for (const auto& chk : result["checks"]) {
        std::cerr << (chk["pass"].get<bool>() ? "[PASS] " : "[FAIL] ")
                  << chk["name"].get<std::string>() << "\n";
    }
    return result["all_pass"].get<bool>() ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Ratio estimation for two noisily observed proportional "
                 "functions"};
    app.require_subcommand(1);

    RunConfig config;
    std::string align_text = "same";
    std::string format_text = "json";
    std::string f_text = "sin2";
    double sigma2_value = 0.0;
    double beta_value = 0.0;

    auto* estimate = app.add_subcommand("estimate", "Estimate the ratio r");
    estimate->add_option("--x", config.x_path, "x-channel CSV (time,value)")
        ->required();
    estimate->add_option("--y", config.y_path, "y-channel CSV (time,value)")
        ->required();
    auto* sigma2_opt = estimate->add_option(
        "--sigma2", sigma2_value,
        "y-channel noise variance; estimated from data when omitted");
    auto* beta_opt = estimate->add_option(
        "--beta", beta_value, "check the condition |D| > beta*n");
    estimate->add_option("--align", align_text, "same|nearest|interp")
        ->check(CLI::IsMember({"same", "nearest", "interp"}));
    estimate->add_option("--tol", config.tol,
                         "max time gap for --align same");
    estimate->add_option("--stride", config.stride, "prefix-curve stride");
    estimate->add_option("--out", config.out_path, "output path");
    estimate->add_option("--format", format_text, "json|csv")
        ->check(CLI::IsMember({"json", "csv"}));

    auto* variance = app.add_subcommand("variance",
                                        "Difference-based noise variance");
    variance->add_option("--y", config.y_path, "CSV (time,value)")->required();
    variance->add_option("--out", config.out_path, "output path");

    auto* simulate = app.add_subcommand("simulate", "Simulate the model");
    simulate->add_option("--f", f_text, "mean function: sin2 or const:<c>");
    simulate->add_option("--r", config.model.r, "true ratio")->required();
    simulate->add_option("--sigma1", config.model.sigma1, "x-channel noise sd");
    simulate->add_option("--sigma2", config.model.sigma2, "y-channel noise sd");
    simulate->add_option("--n", config.model.n, "sample count")->required();
    simulate->add_option("--seed", config.seed, "RNG seed");
    simulate->add_option("--offset", config.model.time_offset,
                         "x-channel time grid shift");
    simulate->add_option("--out", config.out_path, "output directory")
        ->required();

    auto* verify = app.add_subcommand("verify",
                                      "Monte Carlo verification battery");
    verify->add_option("--config", config.config_path, "JSON config")
        ->required();
    verify->add_option("--out", config.out_path, "output path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(estimate)) {
            if (sigma2_opt->count() > 0) {
                config.sigma2_sq = sigma2_value;
            }
            if (beta_opt->count() > 0) {
                config.beta = beta_value;
            }
            if (align_text == "same") {
                config.alignment = RunConfig::Alignment::same_grid;
            } else if (align_text == "nearest") {
                config.alignment = RunConfig::Alignment::nearest_unique;
            } else {
                config.alignment = RunConfig::Alignment::interpolate;
            }
            config.format = format_text == "csv" ? RunConfig::Format::csv
                                                 : RunConfig::Format::json;
            return run_estimate(config);
        }
        if (app.got_subcommand(variance)) {
            return run_variance(config);
        }
        if (app.got_subcommand(simulate)) {
            config.model.f = ratioreg::MeanFunction::parse(f_text);
            return run_simulate(config);
        }
        if (app.got_subcommand(verify)) {
            return run_verify(config);
        }
    } catch (const ratioreg::DegenerateDenominatorError& e) {
        std::cerr << "degenerate denominator: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
