#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "math.hpp"
#include "parallel.hpp"
#include "special.hpp"

// Shape-distribution fitting by Kolmogorov-Smirnov distance minimization:
// inverse-gamma for squared uncertainties, F(1, nu) for squared errors and
// squared z-scores.

namespace uqcal {

enum class ShapeFamily {
    inverse_gamma_nu_nu, // x / sigma2 ~ InvGamma(nu, nu)
    f_one_nu,            // x / sigma2 ~ F(1, nu)
};

inline const char* family_name(ShapeFamily f) {
    switch (f) {
    case ShapeFamily::inverse_gamma_nu_nu: return "inverse_gamma_nu_nu";
    case ShapeFamily::f_one_nu: return "f_one_nu";
    }
    return "?";
}

// CDF of the scaled family at x; 0 on the non-positive half line.
inline double model_cdf(ShapeFamily family, double nu, double sigma2, double x) {
    if (nu <= 0.0 || sigma2 <= 0.0)
        throw std::invalid_argument("model_cdf: nu and sigma2 must be positive");
    if (x <= 0.0)
        return 0.0;
    const double y = x / sigma2;
    switch (family) {
    case ShapeFamily::inverse_gamma_nu_nu:
        // P(InvGamma(nu, nu) <= y) = Q(nu, nu / y)
        return sf::gamma_q(nu, nu / y);
    case ShapeFamily::f_one_nu:
        // P(F(1, nu) <= y) = I_t(1/2, nu/2) with t = y / (y + nu)
        return sf::beta_inc(0.5, 0.5 * nu, y / (y + nu));
    }
    return 0.0;
}

// Two-sided KS distance between the empirical CDF of the sample and the
// scaled model: sup over sorted x_i of max(|i/M - F(x_i)|, |(i-1)/M - F(x_i)|).
inline double ks_distance(std::span<const double> sample, ShapeFamily family, double nu,
                          double sigma2) {
    if (sample.empty())
        throw std::invalid_argument("ks_distance: empty sample");
    std::vector<double> sorted(sample.begin(), sample.end());
    std::sort(sorted.begin(), sorted.end());
    if (sorted.front() < 0.0)
        throw std::invalid_argument("ks_distance: sample values must be non-negative");
    const double m = static_cast<double>(sorted.size());
    double sup = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double f = model_cdf(family, nu, sigma2, sorted[i]);
        const double hi = (static_cast<double>(i) + 1.0) / m - f;
        const double lo = f - static_cast<double>(i) / m;
        sup = std::max({sup, std::abs(hi), std::abs(lo)});
    }
    return sup;
}

struct FitResult {
    ShapeFamily family = ShapeFamily::inverse_gamma_nu_nu;
    double nu = 0.0;
    double sigma2 = 0.0;
    double ks_distance = 1.0;
    std::size_t n_evaluations = 0;
};

struct FitError : std::runtime_error {
    FitError(const std::string& what, FitResult best_so_far)
        : std::runtime_error(what), best(best_so_far) {}
    FitResult best;
};

namespace detail {

struct NelderMeadResult {
    std::array<double, 2> x{};
    double value = std::numeric_limits<double>::infinity();
    std::size_t evaluations = 0;
    bool converged = false;
};

// Plain 2-D Nelder-Mead with standard coefficients. Terminates when the
// simplex diameter (L-inf, parameter space) drops below diam_tol or the
// objective spread drops below spread_tol; gives up after max_evals.
inline NelderMeadResult nelder_mead_2d(const std::function<double(const std::array<double, 2>&)>& f,
                                       std::array<double, 2> start, double step,
                                       double diam_tol, double spread_tol,
                                       std::size_t max_evals) {
    struct Vertex {
        std::array<double, 2> x;
        double fx;
    };
    NelderMeadResult res;
    auto eval = [&](const std::array<double, 2>& x) {
        ++res.evaluations;
        return f(x);
    };

    std::array<Vertex, 3> simplex{Vertex{start, eval(start)},
                                  Vertex{{start[0] + step, start[1]}, 0.0},
                                  Vertex{{start[0], start[1] + step}, 0.0}};
    simplex[1].fx = eval(simplex[1].x);
    simplex[2].fx = eval(simplex[2].x);

    auto order = [&] {
        std::sort(simplex.begin(), simplex.end(),
                  [](const Vertex& a, const Vertex& b) { return a.fx < b.fx; });
    };
    order();

    while (res.evaluations < max_evals) {
        double diam = 0.0;
        for (int i = 0; i < 3; ++i)
            for (int j = i + 1; j < 3; ++j)
                diam = std::max({diam, std::abs(simplex[i].x[0] - simplex[j].x[0]),
                                 std::abs(simplex[i].x[1] - simplex[j].x[1])});
        const double spread = simplex[2].fx - simplex[0].fx;
        if (diam < diam_tol || spread < spread_tol) {
            res.converged = true;
            break;
        }

        const std::array<double, 2> centroid{(simplex[0].x[0] + simplex[1].x[0]) / 2.0,
                                             (simplex[0].x[1] + simplex[1].x[1]) / 2.0};
        auto at = [&](double t) {
            return std::array<double, 2>{centroid[0] + t * (simplex[2].x[0] - centroid[0]),
                                         centroid[1] + t * (simplex[2].x[1] - centroid[1])};
        };

        const auto xr = at(-1.0); // reflection
        const double fr = eval(xr);
        if (fr < simplex[0].fx) {
            const auto xe = at(-2.0); // expansion
            const double fe = eval(xe);
            simplex[2] = fe < fr ? Vertex{xe, fe} : Vertex{xr, fr};
        } else if (fr < simplex[1].fx) {
            simplex[2] = {xr, fr};
        } else {
            const bool outside = fr < simplex[2].fx;
            const auto xc = at(outside ? -0.5 : 0.5); // contraction
            const double fc = eval(xc);
            if (fc < std::min(fr, simplex[2].fx)) {
                simplex[2] = {xc, fc};
            } else {
                // Shrink toward the best vertex.
                for (int i = 1; i < 3; ++i) {
                    simplex[i].x[0] = simplex[0].x[0] + 0.5 * (simplex[i].x[0] - simplex[0].x[0]);
                    simplex[i].x[1] = simplex[0].x[1] + 0.5 * (simplex[i].x[1] - simplex[0].x[1]);
                    simplex[i].fx = eval(simplex[i].x);
                }
            }
        }
        order();
    }
    res.x = simplex[0].x;
    res.value = simplex[0].fx;
    return res;
}

} // namespace detail

struct FitOptions {
    std::size_t max_evals_per_start = 2000;
    double diam_tol = 1e-6;   // simplex diameter in (ln nu, ln sigma2) space
    double spread_tol = 1e-9; // objective spread
    unsigned workers = 1;
};

// Fits (nu, sigma2) by minimizing the KS distance, Nelder-Mead over
// (ln nu, ln sigma2) from a fixed 5x5 log-grid of starts: nu spanning
// [0.5, 64], sigma2 bracketed by the sample quartiles. Deterministic for a
// given sample; the winner is the converged start with the lowest distance,
// ties broken by start index, so results do not depend on worker count.
inline FitResult fit_shape(std::span<const double> sample, ShapeFamily family,
                           const FitOptions& options = {}) {
    if (sample.size() < 50)
        throw std::invalid_argument("fit_shape: needs at least 50 points");
    std::vector<double> sorted(sample.begin(), sample.end());
    std::sort(sorted.begin(), sorted.end());
    if (sorted.front() < 0.0)
        throw std::invalid_argument("fit_shape: sample values must be non-negative");
    if (sorted.front() == sorted.back()) {
        FitResult best{family, 1.0, std::max(sorted.front(), 1e-300), 0.5, 0};
        throw FitError("fit_shape: constant sample, KS distance is not improvable", best);
    }
    // Zeros can appear in squared-error samples (null errors are retained);
    // the model puts no mass at 0, so they simply floor the attainable
    // distance. The start bracket must come from the positive part.
    const auto first_pos = std::upper_bound(sorted.begin(), sorted.end(), 0.0);
    const std::span<const double> positive{&*first_pos,
                                           static_cast<std::size_t>(sorted.end() - first_pos)};
    if (positive.size() < 2)
        throw std::invalid_argument("fit_shape: needs at least 2 positive values");

    const double m = static_cast<double>(sorted.size());
    auto objective = [&](const std::array<double, 2>& p) {
        const double nu = std::exp(p[0]);
        const double sigma2 = std::exp(p[1]);
        double sup = 0.0;
        for (std::size_t i = 0; i < sorted.size(); ++i) {
            const double f = model_cdf(family, nu, sigma2, sorted[i]);
            const double hi = (static_cast<double>(i) + 1.0) / m - f;
            const double lo = f - static_cast<double>(i) / m;
            sup = std::max({sup, std::abs(hi), std::abs(lo)});
        }
        return sup;
    };

    const double q25 = quantile_sorted(positive, 0.25);
    const double q75 = quantile_sorted(positive, 0.75);
    std::array<double, 5> nu_grid;
    std::array<double, 5> s2_grid;
    for (int i = 0; i < 5; ++i) {
        const double t = static_cast<double>(i) / 4.0;
        nu_grid[i] = std::log(0.5) + t * (std::log(64.0) - std::log(0.5));
        s2_grid[i] = std::log(q25) + t * (std::log(q75) - std::log(q25));
    }

    std::vector<std::array<double, 2>> starts;
    starts.reserve(25);
    for (double lnu : nu_grid)
        for (double ls2 : s2_grid)
            starts.push_back({lnu, ls2});

    std::vector<detail::NelderMeadResult> results(starts.size());
    parallel_for(starts.size(), options.workers, [&](std::size_t i) {
        results[i] = detail::nelder_mead_2d(objective, starts[i], 0.25, options.diam_tol,
                                            options.spread_tol, options.max_evals_per_start);
    });

    std::size_t total_evals = 0;
    std::size_t winner = starts.size();
    for (std::size_t i = 0; i < results.size(); ++i) {
        total_evals += results[i].evaluations;
        if (!results[i].converged)
            continue;
        if (winner == starts.size() || results[i].value < results[winner].value)
            winner = i;
    }

    if (winner == starts.size()) {
        // No start converged within budget; surface the best attempt.
        std::size_t best = 0;
        for (std::size_t i = 1; i < results.size(); ++i)
            if (results[i].value < results[best].value)
                best = i;
        FitResult best_fit{family, std::exp(results[best].x[0]), std::exp(results[best].x[1]),
                           results[best].value, total_evals};
        throw FitError("fit_shape: optimizer did not converge within budget", best_fit);
    }

    FitResult fit;
    fit.family = family;
    fit.nu = std::exp(results[winner].x[0]);
    fit.sigma2 = std::exp(results[winner].x[1]);
    fit.ks_distance = ks_distance(sorted, family, fit.nu, fit.sigma2);
    fit.n_evaluations = total_evals;
    return fit;
}

} // namespace uqcal
