#pragma once

#include <Eigen/Dense>
#include <cmath>

namespace ratioreg {

// Neumaier-compensated accumulator. Results are permutation-stable to
// well below 1e-12 relative error for the vector lengths used here.
class CompensatedSum {
  public:
    void add(double v) {
        const double t = sum_ + v;
        if (std::abs(sum_) >= std::abs(v)) {
            comp_ += (sum_ - t) + v;
        } else {
            comp_ += (v - t) + sum_;
        }
        sum_ = t;
    }
    [[nodiscard]] double value() const { return sum_ + comp_; }

  private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

inline double compensated_dot(const Eigen::Ref<const Eigen::VectorXd>& a,
                              const Eigen::Ref<const Eigen::VectorXd>& b) {
    CompensatedSum acc;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        acc.add(a[i] * b[i]);
    }
    return acc.value();
}

inline double compensated_sum_sq(const Eigen::Ref<const Eigen::VectorXd>& a) {
    CompensatedSum acc;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        acc.add(a[i] * a[i]);
    }
    return acc.value();
}

}  // namespace ratioreg
