#pragma once

#include <cmath>

namespace chshforge {

// Neumaier-compensated accumulator. Weighted sums over the hidden-variable
// space must agree across independent computation routes to 1e-12, so plain
// left-to-right accumulation is not good enough for large spaces.
class CompensatedSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::fabs(sum_) >= std::fabs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }

    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

} // namespace chshforge
