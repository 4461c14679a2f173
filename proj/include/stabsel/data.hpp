#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "csv.hpp"
#include "errors.hpp"
#include "rng.hpp"

namespace stabsel {

/// Design matrix, response and variable names.
///
/// When `standardized` is set, `center` and `scale` hold the constants that
/// were applied to the columns of `x`; they are reused to put held-out data
/// on the same scale. Otherwise center is 0 and scale is 1.
struct Dataset {
    Eigen::MatrixXd x;
    Eigen::VectorXd y;
    std::vector<std::string> names;
    bool standardized = false;
    Eigen::VectorXd center;
    Eigen::VectorXd scale;

    Eigen::Index n() const noexcept { return x.rows(); }
    Eigen::Index p() const noexcept { return x.cols(); }
};

/// V1..Vp
inline std::vector<std::string> default_names(Eigen::Index p) {
    std::vector<std::string> names;
    names.reserve(static_cast<std::size_t>(p));
    for (Eigen::Index j = 0; j < p; ++j) names.push_back("V" + std::to_string(j + 1));
    return names;
}

/// Builds a Dataset after checking shapes and finiteness.
inline Dataset make_dataset(Eigen::MatrixXd x, Eigen::VectorXd y, std::vector<std::string> names = {}) {
    if (x.rows() != y.size()) throw ParameterError("x has " + std::to_string(x.rows()) + " rows but y has " + std::to_string(y.size()) + " entries");
    if (x.rows() < 1 || x.cols() < 1) throw ParameterError("dataset must have at least one row and one column");
    if (!x.allFinite()) throw ParameterError("x contains non-finite entries");
    if (!y.allFinite()) throw ParameterError("y contains non-finite entries");
    if (names.empty()) names = default_names(x.cols());
    if (static_cast<Eigen::Index>(names.size()) != x.cols()) throw ParameterError("number of names does not match number of columns");
    Dataset d;
    d.center = Eigen::VectorXd::Zero(x.cols());
    d.scale = Eigen::VectorXd::Ones(x.cols());
    d.x = std::move(x);
    d.y = std::move(y);
    d.names = std::move(names);
    return d;
}

/// Checks the invariants required before resampling (n >= 4, p >= 2).
inline void require_resamplable(const Dataset& d) {
    if (d.n() < 4) throw ParameterError("dataset needs at least 4 rows, has " + std::to_string(d.n()));
    if (d.p() < 2) throw ParameterError("dataset needs at least 2 predictors, has " + std::to_string(d.p()));
}

// ---------------------------------------------------------------------------
// Synthetic data

/// Gaussian predictors with AR(1) correlation rho^|j-k| and a linear response.
struct SyntheticSpec {
    Eigen::Index n = 50;
    Eigen::Index p = 500;
    double rho = 0.5;
    Eigen::VectorXd beta;
    double noise_sd = 1.0;
    std::uint64_t seed = 0;

    void validate() const {
        if (n < 1) throw ParameterError("n must be positive");
        if (p < 1) throw ParameterError("p must be positive");
        if (!(rho >= 0.0 && rho < 1.0)) throw ParameterError("rho must lie in [0, 1), got " + csv::format(rho));
        if (!(noise_sd > 0.0) || !std::isfinite(noise_sd)) throw ParameterError("noise_sd must be positive and finite");
        if (beta.size() != p) throw ParameterError("beta has length " + std::to_string(beta.size()) + ", expected p = " + std::to_string(p));
        if (!beta.allFinite()) throw ParameterError("beta contains non-finite entries");
    }
};

/// beta = (b_1, ..., b_k, 0, ..., 0) of length p.
inline Eigen::VectorXd leading_beta(Eigen::Index p, std::initializer_list<double> leading) {
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    Eigen::Index j = 0;
    for (double b : leading) {
        if (j >= p) break;
        beta(j++) = b;
    }
    return beta;
}

/// The two-signal design used throughout the synthetic experiments.
inline SyntheticSpec two_signal_spec(double rho, std::uint64_t seed, Eigen::Index n = 50, Eigen::Index p = 500) {
    SyntheticSpec spec;
    spec.n = n;
    spec.p = p;
    spec.rho = rho;
    spec.beta = leading_beta(p, {1.5, 1.1});
    spec.noise_sd = 1.0;
    spec.seed = seed;
    return spec;
}

namespace detail {

// Row i draws from its own stream derived from (seed, i), so rows can be
// generated in any order. x_1 ~ N(0,1), x_j = rho x_{j-1} + sqrt(1-rho^2) z_j
// has exactly the AR(1) covariance.
inline Dataset draw_rows(const SyntheticSpec& spec, Eigen::Index count, std::uint64_t seed) {
    const double innovation = std::sqrt(1.0 - spec.rho * spec.rho);
    Eigen::MatrixXd x(count, spec.p);
    Eigen::VectorXd y(count);
    for (Eigen::Index i = 0; i < count; ++i) {
        auto eng = rng::engine(seed, rng::streams::simulate, static_cast<std::uint64_t>(i));
        std::normal_distribution<double> normal(0.0, 1.0);
        double prev = normal(eng);
        x(i, 0) = prev;
        for (Eigen::Index j = 1; j < spec.p; ++j) {
            prev = spec.rho * prev + innovation * normal(eng);
            x(i, j) = prev;
        }
        y(i) = x.row(i).dot(spec.beta) + spec.noise_sd * normal(eng);
    }
    return make_dataset(std::move(x), std::move(y));
}

} // namespace detail

/// Draws spec.n rows. Deterministic in (spec, spec.seed).
inline Dataset simulate(const SyntheticSpec& spec) {
    spec.validate();
    return detail::draw_rows(spec, spec.n, spec.seed);
}

/// Draws `count` fresh rows from the distribution described by `spec`,
/// e.g. a test set. Use a seed distinct from the training draw.
inline Dataset simulate_ar1_samples(const SyntheticSpec& spec, Eigen::Index count, std::uint64_t seed) {
    spec.validate();
    if (count < 1) throw ParameterError("sample count must be at least 1");
    return detail::draw_rows(spec, count, seed);
}

// ---------------------------------------------------------------------------
// Standardization

/// Centers each column and scales it to unit sample standard deviation
/// (denominator n-1). Constant columns become zero with scale 1. y is left
/// untouched. The constants are recorded relative to the original data, so
/// standardizing an already standardized dataset composes the constants.
inline Dataset standardize(const Dataset& d) {
    Dataset out = d;
    const Eigen::Index n = d.n();
    const Eigen::Index p = d.p();
    Eigen::VectorXd mean(p), sd(p);
    for (Eigen::Index j = 0; j < p; ++j) {
        const auto col = d.x.col(j);
        const double m = col.mean();
        double ss = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double r = col(i) - m;
            ss += r * r;
        }
        const double s = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
        const bool constant = !(s > 1e-12 * (1.0 + std::abs(m)));
        mean(j) = m;
        sd(j) = constant ? 1.0 : s;
        if (constant) {
            out.x.col(j).setZero();
        } else {
            out.x.col(j) = (col.array() - m) / s;
        }
    }
    const Eigen::VectorXd base_center = d.standardized ? d.center : Eigen::VectorXd::Zero(p);
    const Eigen::VectorXd base_scale = d.standardized ? d.scale : Eigen::VectorXd::Ones(p);
    out.center = base_center.array() + base_scale.array() * mean.array();
    out.scale = base_scale.array() * sd.array();
    out.standardized = true;
    return out;
}

/// Puts `raw` on the scale of `reference` using its recorded constants.
inline Dataset apply_standardization(const Dataset& raw, const Dataset& reference) {
    if (raw.p() != reference.p()) throw ParameterError("column count mismatch: " + std::to_string(raw.p()) + " vs " + std::to_string(reference.p()));
    Dataset out = raw;
    if (reference.standardized) {
        for (Eigen::Index j = 0; j < raw.p(); ++j) {
            out.x.col(j) = (raw.x.col(j).array() - reference.center(j)) / reference.scale(j);
        }
    }
    out.standardized = reference.standardized;
    out.center = reference.center;
    out.scale = reference.scale;
    return out;
}

/// Rows of `d` at `rows`, keeping names and standardization state.
inline Dataset take_rows(const Dataset& d, const std::vector<Eigen::Index>& rows) {
    Dataset out;
    out.x.resize(static_cast<Eigen::Index>(rows.size()), d.p());
    out.y.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t k = 0; k < rows.size(); ++k) {
        out.x.row(static_cast<Eigen::Index>(k)) = d.x.row(rows[k]);
        out.y(static_cast<Eigen::Index>(k)) = d.y(rows[k]);
    }
    out.names = d.names;
    out.standardized = d.standardized;
    out.center = d.center;
    out.scale = d.scale;
    return out;
}

/// Splits off round(fraction * n) rows as a test set, chosen by a seeded
/// shuffle. Returns {train, test} on the original scale.
inline std::pair<Dataset, Dataset> holdout_split(const Dataset& d, double fraction, std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction < 1.0)) throw ParameterError("holdout fraction must lie in (0, 1)");
    const auto n = d.n();
    const auto n_test = static_cast<Eigen::Index>(std::llround(fraction * static_cast<double>(n)));
    if (n_test < 1 || n_test >= n) throw ParameterError("holdout fraction leaves an empty train or test split");
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    auto eng = rng::engine(seed, rng::streams::holdout);
    std::shuffle(order.begin(), order.end(), eng);
    std::vector<Eigen::Index> test(order.begin(), order.begin() + n_test);
    std::vector<Eigen::Index> train(order.begin() + n_test, order.end());
    std::sort(test.begin(), test.end());
    std::sort(train.begin(), train.end());
    return {take_rows(d, train), take_rows(d, test)};
}

// ---------------------------------------------------------------------------
// CSV

/// Response column, by header name or zero-based index.
using ResponseColumn = std::variant<std::string, std::size_t>;

inline Dataset parse_csv(std::string_view text, const ResponseColumn& response, bool header, const std::string& source = "<memory>") {
    const auto records = csv::parse(text);
    if (records.empty()) throw IngestionError(source + ": file is empty");
    const std::size_t width = records.front().fields.size();
    if (width < 2) throw IngestionError(source + ": need at least 2 columns, found " + std::to_string(width));

    std::vector<std::string> header_names;
    std::size_t first_data = 0;
    if (header) {
        header_names = records.front().fields;
        first_data = 1;
    }

    std::size_t response_col = 0;
    if (const auto* name = std::get_if<std::string>(&response)) {
        if (!header) throw IngestionError(source + ": response given by name '" + *name + "' but the file has no header");
        auto it = std::find(header_names.begin(), header_names.end(), *name);
        if (it == header_names.end()) throw IngestionError(source + ": response column '" + *name + "' not found in header");
        response_col = static_cast<std::size_t>(it - header_names.begin());
    } else {
        response_col = std::get<std::size_t>(response);
        if (response_col >= width) throw IngestionError(source + ": response column index " + std::to_string(response_col) + " out of range (file has " + std::to_string(width) + " columns)");
    }

    const std::size_t n = records.size() - first_data;
    if (n == 0) throw IngestionError(source + ": no data rows");
    const auto p = static_cast<Eigen::Index>(width - 1);
    Eigen::MatrixXd x(static_cast<Eigen::Index>(n), p);
    Eigen::VectorXd y(static_cast<Eigen::Index>(n));

    for (std::size_t r = 0; r < n; ++r) {
        const auto& rec = records[first_data + r];
        if (rec.fields.size() != width) {
            throw IngestionError(source + ": line " + std::to_string(rec.line) + " has " + std::to_string(rec.fields.size()) + " fields, expected " + std::to_string(width));
        }
        Eigen::Index j = 0;
        for (std::size_t c = 0; c < width; ++c) {
            const auto v = csv::parse_double(rec.fields[c]);
            if (!v || !std::isfinite(*v)) {
                const std::string col_label = header ? "'" + header_names[c] + "'" : std::to_string(c);
                throw IngestionError(source + ": non-numeric or non-finite cell '" + rec.fields[c] + "' at line " + std::to_string(rec.line) + ", column " + col_label + " (index " + std::to_string(c) + ")");
            }
            if (c == response_col) {
                y(static_cast<Eigen::Index>(r)) = *v;
            } else {
                x(static_cast<Eigen::Index>(r), j++) = *v;
            }
        }
    }

    std::vector<std::string> names;
    if (header) {
        for (std::size_t c = 0; c < width; ++c) {
            if (c != response_col) names.push_back(header_names[c]);
        }
    }
    return make_dataset(std::move(x), std::move(y), std::move(names));
}

inline Dataset load_csv(const std::string& path, const ResponseColumn& response, bool header = true) {
    return parse_csv(csv::read_file(path), response, header, path);
}

/// Header `response_name,<names...>` then one row per observation, response
/// first. Values use the shortest exact round-trip representation.
inline std::string to_csv(const Dataset& d, const std::string& response_name = "y") {
    std::string out = csv::escape(response_name);
    for (const auto& name : d.names) {
        out += ',';
        out += csv::escape(name);
    }
    out += '\n';
    for (Eigen::Index i = 0; i < d.n(); ++i) {
        out += csv::format(d.y(i));
        for (Eigen::Index j = 0; j < d.p(); ++j) {
            out += ',';
            out += csv::format(d.x(i, j));
        }
        out += '\n';
    }
    return out;
}

inline void save_csv(const Dataset& d, const std::string& path, const std::string& response_name = "y") {
    csv::write_file(path, to_csv(d, response_name));
}

} // namespace stabsel
