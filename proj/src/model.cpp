#include "ratioreg/model.hpp"

#include <algorithm>
#include <cmath>

#include "ratioreg/errors.hpp"
#include "ratioreg/numeric.hpp"
#include "ratioreg/rng.hpp"

namespace ratioreg {

double MeanFunction::operator()(double t) const {
    switch (kind) {
        case Kind::sin_plus_2:
            return std::sin(t) + 2.0;
        case Kind::constant:
            return c;
        case Kind::table: {
            const Eigen::Index n = table_times.size();
            if (t <= table_times[0]) return table_values[0];
            if (t >= table_times[n - 1]) return table_values[n - 1];
            const double* begin = table_times.data();
            const double* upper = std::upper_bound(begin, begin + n, t);
            const Eigen::Index k = static_cast<Eigen::Index>(upper - begin) - 1;
            const double lambda =
                (t - table_times[k]) / (table_times[k + 1] - table_times[k]);
            return (1.0 - lambda) * table_values[k] + lambda * table_values[k + 1];
        }
    }
    return 0.0;
}

MeanFunction MeanFunction::table(Eigen::VectorXd times, Eigen::VectorXd values) {
    if (times.size() != values.size() || times.size() < 1) {
        throw InputError("MeanFunction::table: times and values must be "
                         "nonempty and of equal length");
    }
    for (Eigen::Index i = 1; i < times.size(); ++i) {
        if (!(times[i] > times[i - 1])) {
            throw InputError("MeanFunction::table: times must be strictly "
                             "increasing");
        }
    }
    MeanFunction f;
    f.kind = Kind::table;
    f.table_times = std::move(times);
    f.table_values = std::move(values);
    return f;
}

std::string MeanFunction::describe() const {
    switch (kind) {
        case Kind::sin_plus_2:
            return "sin2";
        case Kind::constant:
            return "const:" + std::to_string(c);
        case Kind::table:
            return "table[" + std::to_string(table_times.size()) + "]";
    }
    return "?";
}

MeanFunction MeanFunction::parse(const std::string& text) {
    if (text == "sin2") {
        return sin_plus_2();
    }
    if (text.rfind("const:", 0) == 0) {
        try {
            return constant(std::stod(text.substr(6)));
        } catch (const std::exception&) {
            throw InputError("bad constant in mean function spec '" + text + "'");
        }
    }
    throw InputError("unknown mean function spec '" + text +
                     "' (expected sin2 or const:<c>)");
}

void ModelParams::validate() const {
    if (n < 2) {
        throw InputError("ModelParams: n must be >= 2");
    }
    if (sigma1 < 0.0 || sigma2 < 0.0) {
        throw InputError("ModelParams: sigmas must be nonnegative");
    }
    if (time_grid.size() != 0 && time_grid.size() != n) {
        throw InputError("ModelParams: explicit time grid must have length n");
    }
}

Eigen::VectorXd ModelParams::times() const {
    if (time_grid.size() != 0) {
        return time_grid;
    }
    return Eigen::VectorXd::LinSpaced(n, 1.0, static_cast<double>(n));
}

Eigen::VectorXd ModelParams::mu2() const {
    const Eigen::VectorXd t = times();
    Eigen::VectorXd out(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        out[i] = f(t[i]);
    }
    return out;
}

double ModelParams::mu2_norm_sq() const { return compensated_sum_sq(mu2()); }

SimulatedData simulate(const ModelParams& params, std::uint64_t seed) {
    params.validate();
    const Eigen::VectorXd t = params.times();

    SimulatedData out;
    out.y_series.times = t;
    out.x_series.times = t.array() + params.time_offset;
    out.x_series.values.resize(params.n);
    out.y_series.values.resize(params.n);

    TrialRng rng_x(seed, 0, TrialRng::Channel::x_noise);
    TrialRng rng_y(seed, 0, TrialRng::Channel::y_noise);
    const Eigen::VectorXd z = rng_x.normal_vector(params.n, params.sigma1);
    const Eigen::VectorXd w = rng_y.normal_vector(params.n, params.sigma2);

    CompensatedSum mu2_sq;
    for (Eigen::Index i = 0; i < params.n; ++i) {
        const double fy = params.f(t[i]);
        const double fx = params.f(t[i] + params.time_offset);
        out.x_series.values[i] = params.r * fx + z[i];
        out.y_series.values[i] = fy + w[i];
        mu2_sq.add(fy * fy);
    }
    out.mu2_norm_sq = mu2_sq.value();
    return out;
}

}  // namespace ratioreg
