#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "dataset.hpp"
#include "rng.hpp"

// Synthetic calibrated datasets: squared uncertainties from an inverse-gamma
// with matched shape/scale, errors as u times a unit-variance kernel (normal
// for NIG, variance-scaled Student-t for TIG). Population ZMS is 1 by
// construction.

namespace uqcal {

enum class GenKind { nig, tig };

struct GenModel {
    GenKind kind = GenKind::nig;
    double nu_ig = 10.0;        // u^2 ~ InvGamma(nu_ig / 2, nu_ig / 2)
    double nu_d = 0.0;          // TIG only: kernel dof, must exceed 2
    std::size_t m = 5000;

    std::string label() const {
        std::string s = kind == GenKind::nig ? "nig" : "tig";
        s += "(nu_ig=" + std::to_string(nu_ig);
        if (kind == GenKind::tig)
            s += ", nu_d=" + std::to_string(nu_d);
        return s + ")";
    }
};

inline Dataset gen_nig(std::size_t m, double nu_ig, std::uint64_t seed) {
    if (m < 2)
        throw std::invalid_argument("gen_nig: m must be >= 2");
    if (nu_ig <= 0.0)
        throw std::invalid_argument("gen_nig: nu_ig must be positive");
    rng::Stream stream(seed, 0);
    std::vector<double> errors(m);
    std::vector<double> uncertainties(m);
    const double half = 0.5 * nu_ig;
    for (std::size_t i = 0; i < m; ++i) {
        const double u = std::sqrt(stream.inverse_gamma(half, half));
        uncertainties[i] = u;
        errors[i] = u * stream.normal();
    }
    return Dataset(std::move(errors), std::move(uncertainties), "nig");
}

inline Dataset gen_tig(std::size_t m, double nu_ig, double nu_d, std::uint64_t seed) {
    if (m < 2)
        throw std::invalid_argument("gen_tig: m must be >= 2");
    if (nu_ig <= 0.0)
        throw std::invalid_argument("gen_tig: nu_ig must be positive");
    if (nu_d <= 2.0)
        throw std::invalid_argument("gen_tig: nu_d must exceed 2 (finite kernel variance)");
    rng::Stream stream(seed, 0);
    std::vector<double> errors(m);
    std::vector<double> uncertainties(m);
    const double half = 0.5 * nu_ig;
    for (std::size_t i = 0; i < m; ++i) {
        const double u = std::sqrt(stream.inverse_gamma(half, half));
        uncertainties[i] = u;
        errors[i] = u * stream.student_t_scaled(nu_d);
    }
    return Dataset(std::move(errors), std::move(uncertainties), "tig");
}

inline Dataset gen_dataset(const GenModel& model, std::uint64_t seed) {
    if (model.kind == GenKind::nig)
        return gen_nig(model.m, model.nu_ig, seed);
    return gen_tig(model.m, model.nu_ig, model.nu_d, seed);
}

} // namespace uqcal
