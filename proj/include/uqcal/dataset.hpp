#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

// Data model: paired error/uncertainty vectors, file ingestion, and the
// sanitization policy (drop non-positive uncertainties, keep but count null
// errors).

namespace uqcal {

struct LoadError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Rows exactly as parsed from disk: uncertainties may still be non-positive.
struct RawDataset {
    std::vector<double> errors;
    std::vector<double> uncertainties;
    std::string name;
    std::string source_path;

    std::size_t size() const { return errors.size(); }
};

// Validated dataset: equal-length paired vectors, all uncertainties > 0,
// no non-finite entries. Immutable after construction.
class Dataset {
public:
    Dataset(std::vector<double> errors, std::vector<double> uncertainties,
            std::string name = "")
        : errors_(std::move(errors)),
          uncertainties_(std::move(uncertainties)),
          name_(std::move(name)) {
        if (errors_.size() != uncertainties_.size())
            throw std::invalid_argument("dataset: errors and uncertainties differ in length");
        if (errors_.empty())
            throw std::invalid_argument("dataset: empty");
        for (std::size_t i = 0; i < errors_.size(); ++i) {
            if (!std::isfinite(errors_[i]) || !std::isfinite(uncertainties_[i]))
                throw std::invalid_argument("dataset: non-finite entry at row " +
                                            std::to_string(i + 1));
            if (uncertainties_[i] <= 0.0)
                throw std::invalid_argument("dataset: non-positive uncertainty at row " +
                                            std::to_string(i + 1));
        }
    }

    const std::vector<double>& errors() const { return errors_; }
    const std::vector<double>& uncertainties() const { return uncertainties_; }
    const std::string& name() const { return name_; }
    std::size_t size() const { return errors_.size(); }

private:
    std::vector<double> errors_;
    std::vector<double> uncertainties_;
    std::string name_;
};

struct SanitizeReport {
    std::size_t n_input = 0;
    std::size_t n_nonpositive_u = 0;
    std::size_t n_null_errors = 0; // zeros among *retained* errors; kept, only counted
    std::size_t n_output = 0;
};

struct SanitizeResult {
    Dataset dataset;
    SanitizeReport report;
};

// Removes rows with u <= 0, keeps (but counts) rows with E = 0.
inline SanitizeResult sanitize(const RawDataset& raw) {
    SanitizeReport report;
    report.n_input = raw.size();
    std::vector<double> errors;
    std::vector<double> uncertainties;
    errors.reserve(raw.size());
    uncertainties.reserve(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        if (raw.uncertainties[i] <= 0.0) {
            ++report.n_nonpositive_u;
            continue;
        }
        if (raw.errors[i] == 0.0)
            ++report.n_null_errors;
        errors.push_back(raw.errors[i]);
        uncertainties.push_back(raw.uncertainties[i]);
    }
    report.n_output = errors.size();
    if (errors.empty())
        throw std::invalid_argument("sanitize: no usable rows (all uncertainties non-positive)");
    return {Dataset(std::move(errors), std::move(uncertainties), raw.name), report};
}

struct ColumnPair {
    std::string error_column = "E";
    std::string uncertainty_column = "uE";
};

namespace detail {

inline char detect_delimiter(std::string_view header) {
    const char candidates[] = {',', ';', '\t'};
    char best = ',';
    std::size_t best_count = 0;
    for (char c : candidates) {
        const std::size_t count =
            static_cast<std::size_t>(std::count(header.begin(), header.end(), c));
        if (count > best_count) {
            best_count = count;
            best = c;
        }
    }
    return best;
}

inline std::vector<std::string> split_line(std::string_view line, char delim) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(delim, start);
        std::string_view f = line.substr(start, pos == std::string_view::npos
                                                    ? std::string_view::npos
                                                    : pos - start);
        while (!f.empty() && (f.front() == ' ' || f.front() == '\r'))
            f.remove_prefix(1);
        while (!f.empty() && (f.back() == ' ' || f.back() == '\r'))
            f.remove_suffix(1);
        fields.emplace_back(f);
        if (pos == std::string_view::npos)
            break;
        start = pos + 1;
    }
    return fields;
}

inline double parse_cell(const std::string& cell, std::size_t row, const std::string& column) {
    double value = 0.0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last)
        throw LoadError("non-numeric cell '" + cell + "' in column '" + column +
                        "' at data row " + std::to_string(row));
    if (!std::isfinite(value))
        throw LoadError("non-finite value in column '" + column + "' at data row " +
                        std::to_string(row));
    return value;
}

} // namespace detail

// Reads a delimiter-separated text file with a header line. The delimiter is
// auto-detected among comma/semicolon/tab; column names are configurable and
// default to "E"/"uE". NaN/Inf cells are hard errors.
inline RawDataset load_dataset(const std::filesystem::path& path,
                               const ColumnPair& columns = {},
                               std::string name = "") {
    std::ifstream in(path);
    if (!in)
        throw LoadError("cannot open file: " + path.string());

    std::string header;
    if (!std::getline(in, header))
        throw LoadError("empty file: " + path.string());

    const char delim = detail::detect_delimiter(header);
    const auto names = detail::split_line(header, delim);

    std::size_t col_e = names.size();
    std::size_t col_u = names.size();
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == columns.error_column)
            col_e = i;
        if (names[i] == columns.uncertainty_column)
            col_u = i;
    }
    if (col_e == names.size())
        throw LoadError("missing column '" + columns.error_column + "' in " + path.string());
    if (col_u == names.size())
        throw LoadError("missing column '" + columns.uncertainty_column + "' in " +
                        path.string());

    RawDataset raw;
    raw.source_path = path.string();
    raw.name = name.empty() ? path.stem().string() : std::move(name);

    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r")
            continue;
        ++row;
        const auto fields = detail::split_line(line, delim);
        if (fields.size() <= std::max(col_e, col_u))
            throw LoadError("too few fields at data row " + std::to_string(row) + " in " +
                            path.string());
        raw.errors.push_back(detail::parse_cell(fields[col_e], row, columns.error_column));
        raw.uncertainties.push_back(
            detail::parse_cell(fields[col_u], row, columns.uncertainty_column));
    }
    if (raw.errors.empty())
        throw LoadError("zero data rows in " + path.string());
    return raw;
}

} // namespace uqcal
