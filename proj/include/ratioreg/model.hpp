#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>

#include "ratioreg/alignment.hpp"

namespace ratioreg {

// The unknown mean function f, reduced to the shapes needed for simulation.
struct MeanFunction {
    enum class Kind { sin_plus_2, constant, table };

    Kind kind = Kind::sin_plus_2;
    double c = 0.0;                 // constant level
    Eigen::VectorXd table_times;    // piecewise-linear table, strictly increasing
    Eigen::VectorXd table_values;

    double operator()(double t) const;

    static MeanFunction sin_plus_2() { return {}; }
    static MeanFunction constant(double level) {
        MeanFunction f;
        f.kind = Kind::constant;
        f.c = level;
        return f;
    }
    static MeanFunction table(Eigen::VectorXd times, Eigen::VectorXd values);

    [[nodiscard]] std::string describe() const;
    static MeanFunction parse(const std::string& text);  // "sin2" | "const:<c>"
};

// Simulation ground truth: x_i = r*f(t_i + offset) + z_i, y_i = f(t_i) + w_i.
struct ModelParams {
    double r = 1.0;
    MeanFunction f;
    double sigma1 = 0.0;
    double sigma2 = 0.0;
    Eigen::Index n = 2;
    Eigen::VectorXd time_grid;  // empty means integers 1..n
    double time_offset = 0.0;

    void validate() const;
    [[nodiscard]] Eigen::VectorXd times() const;
    [[nodiscard]] Eigen::VectorXd mu2() const;  // (f(t_1),...,f(t_n))
    [[nodiscard]] double mu2_norm_sq() const;
};

struct SimulatedData {
    SampleSeries x_series;  // observed on t_i + offset
    SampleSeries y_series;  // observed on t_i
    double mu2_norm_sq = 0.0;
};

// Deterministic given (params, seed); same seed gives bit-identical output.
SimulatedData simulate(const ModelParams& params, std::uint64_t seed);

}  // namespace ratioreg
