#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ratioreg/estimators.hpp"
#include "ratioreg/model.hpp"
#include "ratioreg/montecarlo.hpp"

namespace ratioreg {

struct RunConfig {
    enum class Command { estimate, variance, simulate, verify };
    enum class Alignment { same_grid, nearest_unique, interpolate };
    enum class Format { json, csv };

    Command command = Command::estimate;
    std::string x_path;
    std::string y_path;
    std::optional<double> sigma2_sq;  // absent: estimate from data
    std::optional<double> beta;
    double alpha = 0.5;
    double c = 1.0;
    std::uint64_t seed = 0;
    Eigen::Index trials = 2000;
    std::vector<Eigen::Index> n_grid;
    Alignment alignment = Alignment::same_grid;
    double tol = 1e-6;
    Eigen::Index stride = 1;  // prefix-curve stride
    std::string out_path;
    Format format = Format::json;
    ModelParams model;         // simulate
    std::string config_path;   // verify
};

struct EstimateReport {
    double ratio = 0.0;
    double denominator = 0.0;
    BetaVerdict condition_beta = BetaVerdict::not_checked;
    std::optional<double> beta;
    double sigma2_sq = 0.0;
    Sigma2Provenance sigma2_provenance = Sigma2Provenance::supplied;
    Eigen::Index n = 0;
    double max_time_gap = 0.0;
    // r-hat recomputed on the first k aligned pairs, in time order.
    std::vector<std::pair<Eigen::Index, double>> prefix_curve;

    [[nodiscard]] nlohmann::json to_json() const;
};

struct VarianceReport {
    double sigma2_sq = 0.0;
    Eigen::Index m = 0;
    Eigen::Index n = 0;

    [[nodiscard]] nlohmann::json to_json() const;
};

struct SimulateOutputs {
    std::string x_csv;
    std::string y_csv;
    std::string truth_json;
};

// RATIOREG_SEED, when set, overrides any configured seed.
std::uint64_t effective_seed(std::uint64_t configured);

EstimateReport cmd_estimate(const RunConfig& config);
VarianceReport cmd_variance(const RunConfig& config);
// Writes x.csv, y.csv and truth.json under config.out_path (a directory).
SimulateOutputs cmd_simulate(const RunConfig& config);
// Runs the Monte Carlo verification battery described by the JSON config
// at config.config_path; returns pass/fail per check with measured values.
nlohmann::json cmd_verify(const RunConfig& config);

// Serializes an estimate report to config.out_path in the requested format.
void write_estimate_report(const EstimateReport& report, const RunConfig& config);

const char* to_string(BetaVerdict v);
const char* to_string(Sigma2Provenance p);

}  // namespace ratioreg
