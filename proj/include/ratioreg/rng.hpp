#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace ratioreg {

// Counter-based generator keyed by (seed, trial, channel). Each key opens an
// independent splitmix64 stream, so trials can run in any order (or in
// parallel) and still reproduce bit-identical draws.
class TrialRng {
  public:
    enum class Channel : std::uint64_t { x_noise = 0, y_noise = 1 };

    TrialRng(std::uint64_t seed, std::uint64_t trial, Channel channel) {
        state_ = mix(seed);
        state_ = mix(state_ ^ (0x9e3779b97f4a7c15ULL * (trial + 1)));
        state_ = mix(state_ ^ (0xbf58476d1ce4e5b9ULL *
                               (static_cast<std::uint64_t>(channel) + 1)));
    }

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        return mix(state_);
    }

    // Uniform in the open interval (0, 1).
    double uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller; the sine partner is cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

    Eigen::VectorXd normal_vector(Eigen::Index n, double sigma) {
        Eigen::VectorXd out(n);
        if (sigma == 0.0) {
            out.setZero();
            return out;
        }
        for (Eigen::Index i = 0; i < n; ++i) {
            out[i] = sigma * normal();
        }
        return out;
    }

  private:
    static std::uint64_t mix(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xbf58476d1ce4e5b9ULL;
        z ^= z >> 27;
        z *= 0x94d049bb133111ebULL;
        z ^= z >> 31;
        return z;
    }

    std::uint64_t state_ = 0;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace ratioreg
