#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace uqcal {

// Kahan-Babuska-Neumaier compensated accumulator over long double.
// Squared errors and squared uncertainties routinely span many orders of
// magnitude; naive summation loses the small terms.
class CompensatedSum {
public:
    void add(double x) {
        const long double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(static_cast<long double>(x)))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (static_cast<long double>(x) - t) + sum_;
        sum_ = t;
    }

    double value() const { return static_cast<double>(sum_ + comp_); }

private:
    long double sum_ = 0.0L;
    long double comp_ = 0.0L;
};

inline double compensated_mean(std::span<const double> xs) {
    if (xs.empty())
        throw std::invalid_argument("mean of empty sample");
    CompensatedSum s;
    for (double x : xs)
        s.add(x);
    return s.value() / static_cast<double>(xs.size());
}

// Sample standard deviation, divisor M-1.
inline double sample_sd(std::span<const double> xs) {
    if (xs.size() < 2)
        throw std::invalid_argument("sample_sd needs at least 2 points");
    const double m = compensated_mean(xs);
    CompensatedSum s;
    for (double x : xs)
        s.add((x - m) * (x - m));
    return std::sqrt(s.value() / static_cast<double>(xs.size() - 1));
}

// Continuous quantile of a sorted sample, Hyndman-Fan type 7:
// h = (n-1)p, linear interpolation between the bracketing order statistics.
inline double quantile_sorted(std::span<const double> sorted, double p) {
    if (sorted.empty())
        throw std::invalid_argument("quantile of empty sample");
    if (p < 0.0 || p > 1.0)
        throw std::invalid_argument("quantile probability outside [0,1]");
    const std::size_t n = sorted.size();
    if (n == 1)
        return sorted[0];
    const double h = static_cast<double>(n - 1) * p;
    const std::size_t lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, n - 1);
    const double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

inline double quantile(std::span<const double> xs, double p) {
    std::vector<double> sorted(xs.begin(), xs.end());
    std::sort(sorted.begin(), sorted.end());
    return quantile_sorted(sorted, p);
}

inline double median(std::span<const double> xs) { return quantile(xs, 0.5); }

} // namespace uqcal
