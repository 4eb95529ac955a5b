#pragma once

#include <cmath>
#include <span>
#include <vector>

namespace lavgap {

/// Neumaier-compensated accumulator. Summation order is fixed by the caller,
/// so results are bitwise reproducible for a fixed configuration.
class CompensatedSum {
public:
    void add(double v) {
        double t = sum_ + v;
        if (std::abs(sum_) >= std::abs(v))
            comp_ += (sum_ - t) + v;
        else
            comp_ += (v - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

/// Pairwise reduction; deterministic for a fixed input order.
inline double pairwise_sum(std::span<const double> v) {
    if (v.size() <= 8) {
        CompensatedSum s;
        for (double x : v) s.add(x);
        return s.value();
    }
    std::size_t half = v.size() / 2;
    return pairwise_sum(v.subspan(0, half)) + pairwise_sum(v.subspan(half));
}

} // namespace lavgap
