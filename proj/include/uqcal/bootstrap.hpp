#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dataset.hpp"
#include "math.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "special.hpp"
#include "stats.hpp"

// BCa bootstrap intervals, zeta-scores, and the binary validation verdict.
// Resampling always draws paired rows; replicate b uses the stream derived
// from (seed, b) and replicates are reduced in index order, so results are
// bit-identical across worker counts.

namespace uqcal {

enum class IntervalMethod { bca, percentile };

struct BootstrapResult {
    double theta_est = 0.0;
    double bias_bs = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    double level = 0.95;
    std::size_t n_replicates = 0;
    IntervalMethod method = IntervalMethod::bca;
    bool degenerate = false; // set when BCa fell back or the interval was widened
};

using StatFn = std::function<double(const Dataset&)>;

namespace detail {

// Per-row terms from which ZMS/RCE/RCE2/NLL are all means or simple
// combinations of means; lets replicates and jackknives run in O(M).
struct RowTerms {
    std::vector<double> z2;
    std::vector<double> e2;
    std::vector<double> u2;
    std::vector<double> logu2;

    explicit RowTerms(const Dataset& d)
        : z2(d.size()), e2(d.size()), u2(d.size()), logu2(d.size()) {
        for (std::size_t i = 0; i < d.size(); ++i) {
            const double e = d.errors()[i];
            const double u = d.uncertainties()[i];
            const double z = e / u;
            z2[i] = z * z;
            e2[i] = e * e;
            u2[i] = u * u;
            logu2[i] = 2.0 * std::log(u);
        }
    }
};

inline double stat_from_means(StatKind kind, double mean_z2, double mean_e2, double mean_u2,
                              double mean_logu2) {
    switch (kind) {
    case StatKind::zms:
        return mean_z2;
    case StatKind::rce:
        return 1.0 - std::sqrt(mean_e2) / std::sqrt(mean_u2);
    case StatKind::rce2:
        return 1.0 - mean_e2 / mean_u2;
    case StatKind::nll:
        return 0.5 * (mean_z2 + mean_logu2 + std::log(2.0 * std::numbers::pi));
    default:
        throw std::invalid_argument("bootstrap: statistic is not a row-mean statistic");
    }
}

inline double eval_on_indices(StatKind kind, const RowTerms& terms,
                              std::span<const std::uint32_t> idx) {
    long double sz = 0.0L;
    long double se = 0.0L;
    long double su = 0.0L;
    long double sl = 0.0L;
    for (std::uint32_t i : idx) {
        sz += terms.z2[i];
        se += terms.e2[i];
        su += terms.u2[i];
        sl += terms.logu2[i];
    }
    const double n = static_cast<double>(idx.size());
    return stat_from_means(kind, static_cast<double>(sz) / n, static_cast<double>(se) / n,
                           static_cast<double>(su) / n, static_cast<double>(sl) / n);
}

// Leave-one-out values for a row-mean statistic, O(M) overall.
inline std::vector<double> jackknife_values(StatKind kind, const RowTerms& terms) {
    const std::size_t m = terms.z2.size();
    long double sz = 0.0L;
    long double se = 0.0L;
    long double su = 0.0L;
    long double sl = 0.0L;
    for (std::size_t i = 0; i < m; ++i) {
        sz += terms.z2[i];
        se += terms.e2[i];
        su += terms.u2[i];
        sl += terms.logu2[i];
    }
    std::vector<double> out(m);
    const double n1 = static_cast<double>(m - 1);
    for (std::size_t i = 0; i < m; ++i) {
        out[i] = stat_from_means(kind, static_cast<double>(sz - terms.z2[i]) / n1,
                                 static_cast<double>(se - terms.e2[i]) / n1,
                                 static_cast<double>(su - terms.u2[i]) / n1,
                                 static_cast<double>(sl - terms.logu2[i]) / n1);
    }
    return out;
}

inline Dataset subset(const Dataset& d, std::span<const std::uint32_t> idx) {
    std::vector<double> e(idx.size());
    std::vector<double> u(idx.size());
    for (std::size_t j = 0; j < idx.size(); ++j) {
        e[j] = d.errors()[idx[j]];
        u[j] = d.uncertainties()[idx[j]];
    }
    return Dataset(std::move(e), std::move(u), d.name());
}

// Bias-correction z0 from the replicate distribution; replicates equal to the
// point estimate count as half below (midpoint convention).
inline double bca_z0(std::span<const double> replicates, double theta_est, bool& degenerate) {
    std::size_t below = 0;
    std::size_t ties = 0;
    for (double r : replicates) {
        if (r < theta_est)
            ++below;
        else if (r == theta_est)
            ++ties;
    }
    const double frac = (static_cast<double>(below) + 0.5 * static_cast<double>(ties)) /
                        static_cast<double>(replicates.size());
    if (frac <= 0.0 || frac >= 1.0) {
        degenerate = true;
        return 0.0;
    }
    degenerate = false;
    return sf::normal_quantile(frac);
}

// Jackknife acceleration a = sum d^3 / (6 (sum d^2)^{3/2}), d_i = mean - theta_(-i).
inline double bca_acceleration(std::span<const double> jack) {
    const double mean = compensated_mean(jack);
    CompensatedSum s2;
    CompensatedSum s3;
    for (double t : jack) {
        const double d = mean - t;
        s2.add(d * d);
        s3.add(d * d * d);
    }
    const double denom = 6.0 * std::pow(s2.value(), 1.5);
    if (denom == 0.0 || !std::isfinite(denom))
        return 0.0;
    return s3.value() / denom;
}

// Adjusted quantile levels for the BCa interval. Returns false when the
// adjustment is degenerate (acceleration pole crossed or levels collapse).
inline bool bca_levels(double z0, double accel, double level, double& alpha_lo,
                       double& alpha_hi) {
    const double alpha = 1.0 - level;
    const double z_lo = sf::normal_quantile(alpha / 2.0);
    const double z_hi = sf::normal_quantile(1.0 - alpha / 2.0);
    const double d_lo = 1.0 - accel * (z0 + z_lo);
    const double d_hi = 1.0 - accel * (z0 + z_hi);
    if (d_lo <= 0.0 || d_hi <= 0.0)
        return false;
    alpha_lo = sf::normal_cdf(z0 + (z0 + z_lo) / d_lo);
    alpha_hi = sf::normal_cdf(z0 + (z0 + z_hi) / d_hi);
    return std::isfinite(alpha_lo) && std::isfinite(alpha_hi) && alpha_lo < alpha_hi;
}

inline std::pair<double, double> percentile_interval(std::span<const double> sorted_reps,
                                                     double level) {
    const double alpha = 1.0 - level;
    return {quantile_sorted(sorted_reps, alpha / 2.0),
            quantile_sorted(sorted_reps, 1.0 - alpha / 2.0)};
}

// Assembles the interval from replicates + jackknife values; shared by the
// StatKind and custom-statistic entry points.
inline BootstrapResult assemble_result(std::vector<double> replicates, double theta_est,
                                       std::span<const double> jack, double level) {
    BootstrapResult res;
    res.theta_est = theta_est;
    res.level = level;
    res.n_replicates = replicates.size();
    res.bias_bs = compensated_mean(replicates) - theta_est;

    std::vector<double> sorted(replicates);
    std::sort(sorted.begin(), sorted.end());

    if (sorted.front() == sorted.back()) {
        // All replicates identical: zero-width interval at the estimate.
        res.ci_low = res.ci_high = theta_est;
        res.method = IntervalMethod::percentile;
        res.degenerate = true;
        return res;
    }

    bool z0_degenerate = false;
    const double z0 = bca_z0(sorted, theta_est, z0_degenerate);
    const double accel = jack.empty() ? 0.0 : bca_acceleration(jack);

    double alpha_lo = 0.0;
    double alpha_hi = 0.0;
    if (!z0_degenerate && bca_levels(z0, accel, level, alpha_lo, alpha_hi)) {
        res.ci_low = quantile_sorted(sorted, alpha_lo);
        res.ci_high = quantile_sorted(sorted, alpha_hi);
        res.method = IntervalMethod::bca;
    } else {
        const auto [lo, hi] = percentile_interval(sorted, level);
        res.ci_low = lo;
        res.ci_high = hi;
        res.method = IntervalMethod::percentile;
        res.degenerate = true;
    }

    if (theta_est < res.ci_low || theta_est > res.ci_high) {
        // A replicate distribution shifted almost entirely to one side of the
        // estimate can leave it outside the interval; widen so the zeta score
        // stays defined, and record the pathology.
        res.ci_low = std::min(res.ci_low, theta_est);
        res.ci_high = std::max(res.ci_high, theta_est);
        res.method = IntervalMethod::percentile;
        res.degenerate = true;
    }
    return res;
}

} // namespace detail

// BCa bootstrap for one of the row-mean statistics (ZMS, RCE, RCE2, NLL).
inline BootstrapResult bootstrap_bca(const Dataset& d, StatKind stat, std::size_t n_replicates,
                                     double level = 0.95, std::uint64_t seed = 0,
                                     unsigned workers = 1) {
    if (n_replicates < 100)
        throw std::invalid_argument("bootstrap_bca: needs at least 100 replicates");
    if (level <= 0.0 || level >= 1.0)
        throw std::invalid_argument("bootstrap_bca: level must be in (0,1)");
    if (stat == StatKind::ence || stat == StatKind::lzms)
        throw std::invalid_argument(
            "bootstrap_bca: ENCE/LZMS need a binning context; pass a custom statistic");

    const detail::RowTerms terms(d);
    const std::size_t m = d.size();

    std::vector<std::uint32_t> all(m);
    for (std::size_t i = 0; i < m; ++i)
        all[i] = static_cast<std::uint32_t>(i);
    const double theta_est = detail::eval_on_indices(stat, terms, all);

    std::vector<double> replicates(n_replicates);
    parallel_for(n_replicates, workers, [&](std::size_t b) {
        rng::Stream stream(seed, b);
        std::vector<std::uint32_t> idx(m);
        for (std::size_t i = 0; i < m; ++i)
            idx[i] = static_cast<std::uint32_t>(stream.next_below(m));
        replicates[b] = detail::eval_on_indices(stat, terms, idx);
    });

    const auto jack = detail::jackknife_values(stat, terms);
    return detail::assemble_result(std::move(replicates), theta_est, jack, level);
}

// BCa bootstrap for an arbitrary statistic of the paired rows. The jackknife
// is full leave-one-out, so cost is O(M * cost(stat)).
inline BootstrapResult bootstrap_bca(const Dataset& d, const StatFn& stat,
                                     std::size_t n_replicates, double level = 0.95,
                                     std::uint64_t seed = 0, unsigned workers = 1) {
    if (n_replicates < 100)
        throw std::invalid_argument("bootstrap_bca: needs at least 100 replicates");
    if (level <= 0.0 || level >= 1.0)
        throw std::invalid_argument("bootstrap_bca: level must be in (0,1)");

    const std::size_t m = d.size();
    const double theta_est = stat(d);

    std::vector<double> replicates(n_replicates);
    parallel_for(n_replicates, workers, [&](std::size_t b) {
        rng::Stream stream(seed, b);
        std::vector<std::uint32_t> idx(m);
        for (std::size_t i = 0; i < m; ++i)
            idx[i] = static_cast<std::uint32_t>(stream.next_below(m));
        replicates[b] = stat(detail::subset(d, idx));
    });

    std::vector<double> jack;
    if (m > 2) {
        jack.resize(m);
        parallel_for(m, workers, [&](std::size_t i) {
            std::vector<std::uint32_t> idx;
            idx.reserve(m - 1);
            for (std::size_t j = 0; j < m; ++j)
                if (j != i)
                    idx.push_back(static_cast<std::uint32_t>(j));
            jack[i] = stat(detail::subset(d, idx));
        });
    }
    return detail::assemble_result(std::move(replicates), theta_est, jack, level);
}

// Signed, interval-normalized distance of the estimate from its reference:
// the distance to the reference over the distance to the interval edge on the
// side of the reference. |zeta| <= 1 is exactly the interval test.
inline double zeta_score(double theta_est, double theta_ref, double ci_low, double ci_high) {
    if (theta_est < ci_low || theta_est > ci_high)
        throw std::invalid_argument("zeta_score: inconsistent interval (estimate outside)");
    const double diff = theta_est - theta_ref;
    if (diff == 0.0)
        return 0.0;
    const double denom = diff <= 0.0 ? ci_high - theta_est : theta_est - ci_low;
    if (denom == 0.0)
        return diff < 0.0 ? -std::numeric_limits<double>::infinity()
                          : std::numeric_limits<double>::infinity();
    return diff / denom;
}

struct ValidationVerdict {
    StatKind stat = StatKind::zms;
    BootstrapResult result;
    double theta_ref = 0.0;
    double zeta = 0.0;
    bool valid = false;
};

// Bootstraps the statistic and tests it against its reference value.
inline ValidationVerdict validate_stat(const Dataset& d, StatKind stat,
                                       std::size_t n_replicates = 10000,
                                       std::uint64_t seed = 0, double level = 0.95,
                                       unsigned workers = 1) {
    const auto ref = reference_value(stat);
    if (!ref)
        throw std::invalid_argument(std::string("validate_stat: ") + stat_name(stat) +
                                    " has no reference value");
    ValidationVerdict verdict;
    verdict.stat = stat;
    verdict.theta_ref = *ref;
    verdict.result = bootstrap_bca(d, stat, n_replicates, level, seed, workers);
    verdict.zeta = zeta_score(verdict.result.theta_est, *ref, verdict.result.ci_low,
                              verdict.result.ci_high);
    verdict.valid = std::abs(verdict.zeta) <= 1.0;
    return verdict;
}

} // namespace uqcal
