#pragma once

#include <cstddef>
#include <vector>

namespace hamlearn {

// Kahan compensated accumulator. Ensemble means and per-record loss reductions
// use it so that results do not depend on summation order beyond ~1e-12.
class KahanSum {
public:
    void add(double x) {
        double y = x - comp_;
        double t = sum_ + y;
        comp_ = (t - sum_) - y;
        sum_ = t;
    }
    double value() const { return sum_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

inline double kahan_total(const std::vector<double>& xs) {
    KahanSum s;
    for (double x : xs) s.add(x);
    return s.value();
}

}  // namespace hamlearn
