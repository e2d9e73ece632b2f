#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "bootstrap.hpp"
#include "dataset.hpp"
#include "generate.hpp"
#include "math.hpp"
#include "parallel.hpp"
#include "robust.hpp"
#include "rng.hpp"
#include "stats.hpp"

// Monte-Carlo reliability experiments: statistic bias over a model grid,
// validation-probability studies, and decimation (confidence) curves.

namespace uqcal {

struct SweepRow {
    GenModel model;
    StatKind stat = StatKind::rce;
    double beta_gm_e2 = 0.0; // mean over runs
    double beta_gm_z2 = 0.0;
    double mean_stat = 0.0;
    double sd_stat = 0.0; // sd across runs, divisor N-1
    std::size_t n_runs = 0;
};

struct PvalResult {
    GenModel model;
    StatKind stat = StatKind::zms;
    double p_val = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    std::size_t n_runs = 0;
};

struct DecimationCurve {
    std::vector<double> k_percent;
    std::vector<double> delta_rce;
    std::vector<double> delta_zms;
    // Zero-centered 95% bootstrap CIs of the full-data statistics, for
    // comparing deviation amplitudes against estimation noise.
    std::pair<double, double> ci_rce{0.0, 0.0};
    std::pair<double, double> ci_zms{0.0, 0.0};
};

// Wilson score interval for a binomial proportion.
inline std::pair<double, double> binomial_interval(std::size_t k, std::size_t n,
                                                   double level = 0.95) {
    if (n == 0)
        throw std::invalid_argument("binomial_interval: n must be >= 1");
    if (k > n)
        throw std::invalid_argument("binomial_interval: k must be <= n");
    if (level <= 0.0 || level >= 1.0)
        throw std::invalid_argument("binomial_interval: level must be in (0,1)");
    const double z = sf::normal_quantile(1.0 - (1.0 - level) / 2.0);
    const double nn = static_cast<double>(n);
    const double p = static_cast<double>(k) / nn;
    const double z2 = z * z;
    const double denom = nn + z2;
    const double center = (static_cast<double>(k) + z2 / 2.0) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) * nn + z2 / 4.0) / denom;
    return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

// Monte-Carlo mean/sd of statistics over generated datasets, one row per
// (model, stat), sorted by mean beta_gm(E^2).
inline std::vector<SweepRow> sweep_bias(const std::vector<GenModel>& models,
                                        std::size_t n_runs, const std::vector<StatKind>& stats,
                                        std::uint64_t seed, unsigned workers = 1) {
    if (n_runs < 30)
        throw std::invalid_argument("sweep_bias: needs at least 30 runs");
    if (models.empty() || stats.empty())
        throw std::invalid_argument("sweep_bias: empty model or stat list");
    for (StatKind s : stats)
        if (s == StatKind::ence || s == StatKind::lzms || s == StatKind::nll)
            throw std::invalid_argument("sweep_bias: only ZMS/RCE/RCE2 are swept");

    std::vector<SweepRow> rows;
    for (std::size_t j = 0; j < models.size(); ++j) {
        const GenModel& model = models[j];
        std::vector<double> beta_e2(n_runs);
        std::vector<double> beta_z2(n_runs);
        std::vector<std::vector<double>> values(stats.size(),
                                                std::vector<double>(n_runs));
        parallel_for(n_runs, workers, [&](std::size_t r) {
            const std::uint64_t run_seed = rng::derive_seed(seed, j * n_runs + r);
            const Dataset d = gen_dataset(model, run_seed);
            std::vector<double> e2(d.size());
            std::vector<double> z2(d.size());
            for (std::size_t i = 0; i < d.size(); ++i) {
                e2[i] = d.errors()[i] * d.errors()[i];
                const double z = d.errors()[i] / d.uncertainties()[i];
                z2[i] = z * z;
            }
            beta_e2[r] = beta_gm(e2);
            beta_z2[r] = beta_gm(z2);
            for (std::size_t s = 0; s < stats.size(); ++s) {
                switch (stats[s]) {
                case StatKind::zms: values[s][r] = zms(d); break;
                case StatKind::rce: values[s][r] = rce(d); break;
                case StatKind::rce2: values[s][r] = rce2(d); break;
                default: break;
                }
            }
        });
        for (std::size_t s = 0; s < stats.size(); ++s) {
            SweepRow row;
            row.model = model;
            row.stat = stats[s];
            row.beta_gm_e2 = compensated_mean(beta_e2);
            row.beta_gm_z2 = compensated_mean(beta_z2);
            row.mean_stat = compensated_mean(values[s]);
            row.sd_stat = sample_sd(values[s]);
            row.n_runs = n_runs;
            rows.push_back(row);
        }
    }
    std::stable_sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
        return a.beta_gm_e2 < b.beta_gm_e2;
    });
    return rows;
}

// Fraction of Monte-Carlo runs whose zeta verdict is valid, with Wilson CI.
inline PvalResult pval_experiment(const GenModel& model, StatKind stat, std::size_t n_runs,
                                  std::size_t n_replicates, std::uint64_t seed,
                                  unsigned workers = 1) {
    if (!reference_value(stat))
        throw std::invalid_argument("pval_experiment: statistic has no reference value");
    if (n_runs == 0)
        throw std::invalid_argument("pval_experiment: n_runs must be >= 1");

    std::vector<char> valid(n_runs, 0);
    parallel_for(n_runs, workers, [&](std::size_t r) {
        // Disjoint sub-seeds for generation and resampling.
        const std::uint64_t gen_seed = rng::derive_seed(seed, 2 * r);
        const std::uint64_t bs_seed = rng::derive_seed(seed, 2 * r + 1);
        const Dataset d = gen_dataset(model, gen_seed);
        const ValidationVerdict v = validate_stat(d, stat, n_replicates, bs_seed);
        valid[r] = v.valid ? 1 : 0;
    });

    const std::size_t k = static_cast<std::size_t>(
        std::count(valid.begin(), valid.end(), static_cast<char>(1)));
    PvalResult res;
    res.model = model;
    res.stat = stat;
    res.n_runs = n_runs;
    res.p_val = static_cast<double>(k) / static_cast<double>(n_runs);
    const auto ci = binomial_interval(k, n_runs, 0.95);
    res.ci_low = ci.first;
    res.ci_high = ci.second;
    return res;
}

namespace detail {

// Removal order for decimation: largest uncertainty first, ties broken by
// original index (lower index removed first).
inline std::vector<std::size_t> decimation_order(const Dataset& d) {
    std::vector<std::size_t> order(d.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return d.uncertainties()[a] > d.uncertainties()[b];
    });
    return order;
}

} // namespace detail

// Statistic deltas as the k% largest uncertainties are pruned, on an even
// grid of n_steps values over [0, k_max]. The removed-row set grows
// monotonically with k.
inline DecimationCurve decimation_curve(const Dataset& d, double k_max_percent,
                                        std::size_t n_steps, std::size_t n_replicates,
                                        std::uint64_t seed, unsigned workers = 1) {
    if (k_max_percent < 0.0 || k_max_percent > 50.0)
        throw std::invalid_argument("decimation_curve: k_max must be in [0, 50] percent");
    if (n_steps < 2)
        throw std::invalid_argument("decimation_curve: needs at least 2 steps");
    const std::size_t max_removed = static_cast<std::size_t>(
        std::ceil(k_max_percent * static_cast<double>(d.size()) / 100.0));
    if (d.size() - max_removed < 10)
        throw std::invalid_argument("decimation_curve: pruning would leave fewer than 10 rows");

    const auto order = detail::decimation_order(d);
    const double rce0 = rce(d);
    const double zms0 = zms(d);

    DecimationCurve curve;
    for (std::size_t s = 0; s < n_steps; ++s) {
        const double k = k_max_percent * static_cast<double>(s) /
                         static_cast<double>(n_steps - 1);
        const std::size_t n_remove = static_cast<std::size_t>(
            std::ceil(k * static_cast<double>(d.size()) / 100.0));
        curve.k_percent.push_back(k);
        if (n_remove == 0) {
            curve.delta_rce.push_back(0.0);
            curve.delta_zms.push_back(0.0);
            continue;
        }
        std::vector<char> removed(d.size(), 0);
        for (std::size_t i = 0; i < n_remove; ++i)
            removed[order[i]] = 1;
        std::vector<double> e;
        std::vector<double> u;
        e.reserve(d.size() - n_remove);
        u.reserve(d.size() - n_remove);
        for (std::size_t i = 0; i < d.size(); ++i) {
            if (!removed[i]) {
                e.push_back(d.errors()[i]);
                u.push_back(d.uncertainties()[i]);
            }
        }
        const Dataset pruned(std::move(e), std::move(u), d.name());
        curve.delta_rce.push_back(rce(pruned) - rce0);
        curve.delta_zms.push_back(zms(pruned) - zms0);
    }

    const BootstrapResult bs_rce = bootstrap_bca(d, StatKind::rce, n_replicates, 0.95,
                                                 rng::derive_seed(seed, 0), workers);
    const BootstrapResult bs_zms = bootstrap_bca(d, StatKind::zms, n_replicates, 0.95,
                                                 rng::derive_seed(seed, 1), workers);
    curve.ci_rce = {bs_rce.ci_low - bs_rce.theta_est, bs_rce.ci_high - bs_rce.theta_est};
    curve.ci_zms = {bs_zms.ci_low - bs_zms.theta_est, bs_zms.ci_high - bs_zms.theta_est};
    return curve;
}

} // namespace uqcal
