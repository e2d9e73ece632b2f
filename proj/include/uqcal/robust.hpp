#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dataset.hpp"
#include "math.hpp"
#include "stats.hpp"

// Distribution-agnostic tailedness metrics and the safety-threshold screen
// applied to the squared uncertainty, error and z-score samples.

namespace uqcal {

// Robust skewness: (mean - median) / mean |x - median|, bounded in [-1, 1],
// zero for symmetric samples. Constant samples map to 0 rather than erroring
// so screening never crashes on degenerate data.
inline double beta_gm(std::span<const double> sample) {
    if (sample.size() < 2)
        throw std::invalid_argument("beta_gm: needs at least 2 points");
    const double m = compensated_mean(sample);
    const double med = median(sample);
    CompensatedSum s;
    for (double x : sample)
        s.add(std::abs(x - med));
    const double mad = s.value() / static_cast<double>(sample.size());
    if (mad == 0.0)
        return 0.0;
    return (m - med) / mad;
}

// Quantile ratio of the 2.5/97.5 spread over the interquartile range, as an
// excess kurtosis relative to the standard normal value of the same ratio.
inline constexpr double kappa_cs_normal_ratio = 2.906;

inline double kappa_cs(std::span<const double> sample) {
    if (sample.size() < 8)
        throw std::invalid_argument("kappa_cs: needs at least 8 points");
    std::vector<double> sorted(sample.begin(), sample.end());
    std::sort(sorted.begin(), sorted.end());
    const double q025 = quantile_sorted(sorted, 0.025);
    const double q25 = quantile_sorted(sorted, 0.25);
    const double q75 = quantile_sorted(sorted, 0.75);
    const double q975 = quantile_sorted(sorted, 0.975);
    const double iqr = q75 - q25;
    if (iqr == 0.0)
        throw std::invalid_argument("kappa_cs: zero interquartile range");
    return (q975 - q025) / iqr - kappa_cs_normal_ratio;
}

// Standard deviation over mean (sample sd, divisor M-1); not robust, reported
// for comparison only.
inline double coeff_variation(std::span<const double> sample) {
    if (sample.size() < 2)
        throw std::invalid_argument("coeff_variation: needs at least 2 points");
    const double m = compensated_mean(sample);
    if (m <= 0.0)
        throw std::invalid_argument("coeff_variation: mean must be positive");
    return sample_sd(sample) / m;
}

// beta_gm limits above which the corresponding calibration statistics should
// be questioned; overridable, defaults follow the screening table.
struct TailThresholds {
    double u2 = 0.6;
    double e2 = 0.8;
    double z2 = 0.8;
};

struct TailEntry {
    std::string target; // "uE2", "E2" or "Z2"
    double beta_gm = 0.0;
    double kappa_cs = 0.0;
    double cv = 0.0;
    bool flagged = false;
};

struct TailReport {
    TailEntry u2;
    TailEntry e2;
    TailEntry z2;
    TailThresholds thresholds;
};

namespace detail {

inline TailEntry screen_one(std::string target, const std::vector<double>& sq,
                            double threshold) {
    TailEntry e;
    e.target = std::move(target);
    const auto [mn, mx] = std::minmax_element(sq.begin(), sq.end());
    if (*mn == *mx) {
        // Constant sample: symmetric degenerate, nothing to flag.
        e.beta_gm = 0.0;
        e.kappa_cs = 0.0;
        e.cv = 0.0;
        e.flagged = false;
        return e;
    }
    e.beta_gm = beta_gm(sq);
    e.kappa_cs = kappa_cs(sq);
    e.cv = coeff_variation(sq);
    e.flagged = e.beta_gm > threshold;
    return e;
}

} // namespace detail

// Computes beta_gm, kappa_cs and cv on u^2, E^2 and Z^2 and applies the
// screening thresholds.
inline TailReport tail_screen(const Dataset& d, const TailThresholds& thresholds = {}) {
    if (d.size() < 8)
        throw std::invalid_argument("tail_screen: needs at least 8 points");
    std::vector<double> u2(d.size());
    std::vector<double> e2(d.size());
    std::vector<double> z2(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        u2[i] = d.uncertainties()[i] * d.uncertainties()[i];
        e2[i] = d.errors()[i] * d.errors()[i];
        const double z = d.errors()[i] / d.uncertainties()[i];
        z2[i] = z * z;
    }
    TailReport report;
    report.thresholds = thresholds;
    report.u2 = detail::screen_one("uE2", u2, thresholds.u2);
    report.e2 = detail::screen_one("E2", e2, thresholds.e2);
    report.z2 = detail::screen_one("Z2", z2, thresholds.z2);
    return report;
}

} // namespace uqcal
