#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dataset.hpp"
#include "math.hpp"

// Point estimators for the average and bin-based calibration statistics.
// All functions are pure; Dataset guarantees u > 0.

namespace uqcal {

enum class StatKind { zms, rce, rce2, nll, ence, lzms };

inline const char* stat_name(StatKind kind) {
    switch (kind) {
    case StatKind::zms: return "ZMS";
    case StatKind::rce: return "RCE";
    case StatKind::rce2: return "RCE2";
    case StatKind::nll: return "NLL";
    case StatKind::ence: return "ENCE";
    case StatKind::lzms: return "LZMS";
    }
    return "?";
}

inline std::optional<StatKind> stat_from_name(std::string_view name) {
    if (name == "ZMS" || name == "zms") return StatKind::zms;
    if (name == "RCE" || name == "rce") return StatKind::rce;
    if (name == "RCE2" || name == "rce2") return StatKind::rce2;
    if (name == "NLL" || name == "nll") return StatKind::nll;
    if (name == "ENCE" || name == "ence") return StatKind::ence;
    if (name == "LZMS" || name == "lzms") return StatKind::lzms;
    return std::nullopt;
}

// Reference value for statistical validation; NLL, ENCE and LZMS have none.
inline std::optional<double> reference_value(StatKind kind) {
    switch (kind) {
    case StatKind::zms: return 1.0;
    case StatKind::rce: return 0.0;
    case StatKind::rce2: return 0.0;
    default: return std::nullopt;
    }
}

struct BinSpec {
    std::size_t n_bins = 20;
    enum class Mode { equal_count_on_u } mode = Mode::equal_count_on_u;
};

inline std::vector<double> zscores(const Dataset& d) {
    std::vector<double> z(d.size());
    for (std::size_t i = 0; i < d.size(); ++i)
        z[i] = d.errors()[i] / d.uncertainties()[i];
    return z;
}

namespace detail {

inline void require_size(const Dataset& d, std::size_t min, const char* what) {
    if (d.size() < min)
        throw std::invalid_argument(std::string(what) + ": needs at least " +
                                    std::to_string(min) + " points");
}

inline double mean_sq(std::span<const double> xs) {
    CompensatedSum s;
    for (double x : xs)
        s.add(x * x);
    return s.value() / static_cast<double>(xs.size());
}

inline double mean_sq_ratio(std::span<const double> num, std::span<const double> den) {
    CompensatedSum s;
    for (std::size_t i = 0; i < num.size(); ++i) {
        const double z = num[i] / den[i];
        s.add(z * z);
    }
    return s.value() / static_cast<double>(num.size());
}

} // namespace detail

// Mean of squared z-scores; reference value 1.
inline double zms(const Dataset& d) {
    detail::require_size(d, 2, "zms");
    return detail::mean_sq_ratio(d.errors(), d.uncertainties());
}

// (RMV - RMSE) / RMV; reference value 0.
inline double rce(const Dataset& d) {
    detail::require_size(d, 2, "rce");
    const double rmse = std::sqrt(detail::mean_sq(d.errors()));
    const double rmv = std::sqrt(detail::mean_sq(d.uncertainties()));
    if (rmv == 0.0)
        throw std::invalid_argument("rce: root mean variance is zero");
    return 1.0 - rmse / rmv;
}

// (MV - MSE) / MV, the square-root-free variant; reference value 0.
inline double rce2(const Dataset& d) {
    detail::require_size(d, 2, "rce2");
    const double mse = detail::mean_sq(d.errors());
    const double mv = detail::mean_sq(d.uncertainties());
    if (mv == 0.0)
        throw std::invalid_argument("rce2: mean variance is zero");
    return 1.0 - mse / mv;
}

// Gaussian NLL = 1/2 (<Z^2> + <ln u^2> + ln 2 pi), split into its average
// calibration term and the sharpness term that keeps uncertainties small.
struct NllResult {
    double value = 0.0;
    double zms_term = 0.0;       // <Z^2> / 2
    double sharpness_term = 0.0; // (<ln u^2> + ln 2 pi) / 2
};

inline NllResult nll(const Dataset& d) {
    const double mz2 = detail::mean_sq_ratio(d.errors(), d.uncertainties());
    CompensatedSum s;
    for (double u : d.uncertainties())
        s.add(2.0 * std::log(u));
    const double mean_log_u2 = s.value() / static_cast<double>(d.size());
    NllResult r;
    r.zms_term = 0.5 * mz2;
    r.sharpness_term = 0.5 * (mean_log_u2 + std::log(2.0 * std::numbers::pi));
    r.value = r.zms_term + r.sharpness_term;
    return r;
}

namespace detail {

// Equal-count bins over rows ordered by (u, original index). The remainder
// after division goes one-per-bin starting from the lowest-u bin. Returns
// per-bin row index lists, in increasing-u order.
inline std::vector<std::vector<std::size_t>> bin_indices(const Dataset& d,
                                                         const BinSpec& bins) {
    if (bins.n_bins == 0)
        throw std::invalid_argument("binning: n_bins must be >= 1");
    std::vector<std::size_t> order(d.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return d.uncertainties()[a] < d.uncertainties()[b];
    });
    const std::size_t base = d.size() / bins.n_bins;
    const std::size_t rem = d.size() % bins.n_bins;
    std::vector<std::vector<std::size_t>> out(bins.n_bins);
    std::size_t pos = 0;
    for (std::size_t b = 0; b < bins.n_bins; ++b) {
        const std::size_t count = base + (b < rem ? 1 : 0);
        if (count < 2)
            throw std::invalid_argument("binning: bin " + std::to_string(b + 1) +
                                        " has fewer than 2 points");
        out[b].assign(order.begin() + pos, order.begin() + pos + count);
        pos += count;
    }
    return out;
}

inline double rce_over(const Dataset& d, const std::vector<std::size_t>& idx) {
    CompensatedSum se;
    CompensatedSum su;
    for (std::size_t i : idx) {
        se.add(d.errors()[i] * d.errors()[i]);
        su.add(d.uncertainties()[i] * d.uncertainties()[i]);
    }
    const double n = static_cast<double>(idx.size());
    const double rmse = std::sqrt(se.value() / n);
    const double rmv = std::sqrt(su.value() / n);
    if (rmv == 0.0)
        throw std::invalid_argument("ence: root mean variance is zero in a bin");
    return 1.0 - rmse / rmv;
}

} // namespace detail

// Mean absolute per-bin RCE over equal-count bins sorted by u.
inline double ence(const Dataset& d, const BinSpec& bins = {}) {
    const auto groups = detail::bin_indices(d, bins);
    CompensatedSum s;
    for (const auto& idx : groups)
        s.add(std::abs(detail::rce_over(d, idx)));
    return s.value() / static_cast<double>(groups.size());
}

// Per-bin ZMS values in increasing-u bin order.
inline std::vector<double> local_zms(const Dataset& d, const BinSpec& bins = {}) {
    const auto groups = detail::bin_indices(d, bins);
    std::vector<double> out;
    out.reserve(groups.size());
    for (const auto& idx : groups) {
        CompensatedSum s;
        for (std::size_t i : idx) {
            const double z = d.errors()[i] / d.uncertainties()[i];
            s.add(z * z);
        }
        out.push_back(s.value() / static_cast<double>(idx.size()));
    }
    return out;
}

} // namespace uqcal
