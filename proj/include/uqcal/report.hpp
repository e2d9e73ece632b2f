#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "bootstrap.hpp"
#include "dataset.hpp"
#include "distfit.hpp"
#include "robust.hpp"
#include "stats.hpp"
#include "version.hpp"

// Assembly of the per-dataset analysis report and its JSON serialization.
// Reports carry no timestamps so identical configurations yield byte-identical
// files.

namespace uqcal {

using json = nlohmann::ordered_json;

struct AnalysisConfig {
    std::uint64_t seed = 0;
    std::size_t n_replicates = 10000;
    std::size_t n_bins = 20;
    double level = 0.95;
    TailThresholds thresholds;
    unsigned workers = 1;
};

struct FitBlockEntry {
    std::string target;
    std::optional<FitResult> fit;
    std::string error; // set when the fit failed; fit then holds nothing
};

struct AnalysisReport {
    std::string dataset_name;
    std::string source_path;
    SanitizeReport sanitize;
    double zms_value = 0.0;
    double rce_value = 0.0;
    double rce2_value = 0.0;
    NllResult nll_value;
    double ence_value = 0.0;
    std::vector<double> lzms_values;
    std::vector<ValidationVerdict> verdicts; // ZMS, RCE, RCE2
    TailReport tails;
    std::vector<FitBlockEntry> fits; // uE2, E2, Z2
    AnalysisConfig config;
};

// Runs the full analysis pipeline on a sanitized dataset.
inline AnalysisReport analyze_dataset(const Dataset& d, const SanitizeReport& sanitize_report,
                                      const std::string& source_path,
                                      const AnalysisConfig& config) {
    AnalysisReport report;
    report.dataset_name = d.name();
    report.source_path = source_path;
    report.sanitize = sanitize_report;
    report.config = config;

    report.zms_value = zms(d);
    report.rce_value = rce(d);
    report.rce2_value = rce2(d);
    report.nll_value = nll(d);
    const BinSpec bins{config.n_bins};
    report.ence_value = ence(d, bins);
    report.lzms_values = local_zms(d, bins);

    const StatKind kinds[] = {StatKind::zms, StatKind::rce, StatKind::rce2};
    for (std::size_t i = 0; i < 3; ++i) {
        report.verdicts.push_back(validate_stat(d, kinds[i], config.n_replicates,
                                                rng::derive_seed(config.seed, i), config.level,
                                                config.workers));
    }

    report.tails = tail_screen(d, config.thresholds);

    std::vector<double> u2(d.size());
    std::vector<double> e2(d.size());
    std::vector<double> z2(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        u2[i] = d.uncertainties()[i] * d.uncertainties()[i];
        e2[i] = d.errors()[i] * d.errors()[i];
        const double z = d.errors()[i] / d.uncertainties()[i];
        z2[i] = z * z;
    }
    const FitOptions fit_options{2000, 1e-6, 1e-9, config.workers};
    struct Target {
        const char* name;
        const std::vector<double>* sample;
        ShapeFamily family;
    };
    const Target targets[] = {
        {"uE2", &u2, ShapeFamily::inverse_gamma_nu_nu},
        {"E2", &e2, ShapeFamily::f_one_nu},
        {"Z2", &z2, ShapeFamily::f_one_nu},
    };
    for (const auto& t : targets) {
        FitBlockEntry entry;
        entry.target = t.name;
        try {
            entry.fit = fit_shape(*t.sample, t.family, fit_options);
        } catch (const FitError& err) {
            entry.fit = err.best;
            entry.error = err.what();
        } catch (const std::exception& err) {
            entry.error = err.what();
        }
        report.fits.push_back(std::move(entry));
    }
    return report;
}

inline json to_json(const BootstrapResult& r) {
    return json{{"theta_est", r.theta_est},
                {"bias_bs", r.bias_bs},
                {"ci", {r.ci_low, r.ci_high}},
                {"level", r.level},
                {"n_replicates", r.n_replicates},
                {"method", r.method == IntervalMethod::bca ? "BCa" : "Percentile"},
                {"degenerate", r.degenerate}};
}

inline json to_json(const ValidationVerdict& v) {
    json j = to_json(v.result);
    j["stat"] = stat_name(v.stat);
    j["theta_ref"] = v.theta_ref;
    j["zeta"] = std::isfinite(v.zeta) ? json(v.zeta)
                                      : json(v.zeta > 0 ? "+inf" : "-inf");
    j["valid"] = v.valid;
    return j;
}

inline json to_json(const TailEntry& e) {
    return json{{"target", e.target},
                {"beta_gm", e.beta_gm},
                {"kappa_cs", e.kappa_cs},
                {"cv", e.cv},
                {"flagged", e.flagged}};
}

inline json to_json(const FitBlockEntry& e) {
    json j{{"target", e.target}};
    if (e.fit) {
        j["family"] = family_name(e.fit->family);
        j["nu"] = e.fit->nu;
        j["sigma2"] = e.fit->sigma2;
        j["ks_distance"] = e.fit->ks_distance;
        j["n_evaluations"] = e.fit->n_evaluations;
    }
    if (!e.error.empty())
        j["error"] = e.error;
    return j;
}

inline json to_json(const AnalysisReport& r) {
    json j;
    j["schema_version"] = report_schema_version;
    j["dataset"] = {{"name", r.dataset_name},
                    {"source_path", r.source_path},
                    {"n_input", r.sanitize.n_input},
                    {"n_nonpositive_u", r.sanitize.n_nonpositive_u},
                    {"n_null_errors", r.sanitize.n_null_errors},
                    {"n_output", r.sanitize.n_output}};
    j["statistics"] = {
        {"zms", r.zms_value},
        {"rce", r.rce_value},
        {"rce2", r.rce2_value},
        {"nll",
         {{"value", r.nll_value.value},
          {"zms_term", r.nll_value.zms_term},
          {"sharpness_term", r.nll_value.sharpness_term}}},
        {"ence", {{"value", r.ence_value}, {"n_bins", r.config.n_bins}}},
        {"lzms", {{"values", r.lzms_values}, {"n_bins", r.config.n_bins}}}};
    j["validation"] = json::array();
    for (const auto& v : r.verdicts)
        j["validation"].push_back(to_json(v));
    j["tails"] = json::array({to_json(r.tails.u2), to_json(r.tails.e2), to_json(r.tails.z2)});
    j["fits"] = json::array();
    for (const auto& f : r.fits)
        j["fits"].push_back(to_json(f));
    j["provenance"] = {{"seed", r.config.seed},
                       {"B", r.config.n_replicates},
                       {"level", r.config.level},
                       {"n_bins", r.config.n_bins},
                       {"thresholds",
                        {{"u2", r.config.thresholds.u2},
                         {"e2", r.config.thresholds.e2},
                         {"z2", r.config.thresholds.z2}}},
                       {"version", version_string}};
    return j;
}

inline void write_json_file(const json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write file: " + path);
    out << j.dump(2) << "\n";
}

} // namespace uqcal
