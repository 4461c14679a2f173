#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cstdint>
#include <memory>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "csv.hpp"
#include "data.hpp"
#include "diagnostics.hpp"
#include "errors.hpp"
#include "lasso.hpp"
#include "parallel.hpp"
#include "rng.hpp"

namespace stabsel {

using Subsamples = std::vector<std::vector<Eigen::Index>>;

/// B x p binary record of which variables the lasso selected on each
/// subsample at one lambda. Rows are stored sparsely as sorted column
/// indices, which keeps p in the thousands affordable.
class SelectionMatrix {
public:
    SelectionMatrix() = default;

    /// `rows[b]` lists the selected columns of row b (any order, no repeats).
    SelectionMatrix(double lambda, std::size_t p, const std::vector<std::vector<std::uint32_t>>& rows,
                    std::shared_ptr<const Subsamples> subsamples = nullptr, std::uint64_t seed = 0)
        : lambda_(lambda), p_(p), seed_(seed), subsamples_(std::move(subsamples)) {
        offsets_.reserve(rows.size() + 1);
        offsets_.push_back(0);
        for (const auto& row : rows) {
            std::vector<std::uint32_t> sorted = row;
            std::sort(sorted.begin(), sorted.end());
            if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) throw ParameterError("selection row has a repeated column");
            if (!sorted.empty() && sorted.back() >= p) throw ParameterError("selection row column out of range");
            cols_.insert(cols_.end(), sorted.begin(), sorted.end());
            offsets_.push_back(cols_.size());
        }
    }

    /// From a dense 0/1 matrix; any nonzero entry counts as selected.
    static SelectionMatrix from_dense(const std::vector<std::vector<int>>& dense, double lambda = 1.0) {
        if (dense.empty()) throw ParameterError("selection matrix needs at least one row");
        const std::size_t p = dense.front().size();
        std::vector<std::vector<std::uint32_t>> rows;
        rows.reserve(dense.size());
        for (const auto& r : dense) {
            if (r.size() != p) throw ParameterError("ragged selection matrix");
            std::vector<std::uint32_t> sel;
            for (std::size_t j = 0; j < p; ++j) {
                if (r[j] != 0) sel.push_back(static_cast<std::uint32_t>(j));
            }
            rows.push_back(std::move(sel));
        }
        return SelectionMatrix(lambda, p, rows);
    }

    double lambda() const noexcept { return lambda_; }
    std::size_t B() const noexcept { return offsets_.empty() ? 0 : offsets_.size() - 1; }
    std::size_t p() const noexcept { return p_; }
    std::uint64_t seed() const noexcept { return seed_; }

    std::span<const std::uint32_t> row(std::size_t b) const {
        return {cols_.data() + offsets_[b], offsets_[b + 1] - offsets_[b]};
    }

    bool entry(std::size_t b, std::size_t j) const {
        const auto r = row(b);
        return std::binary_search(r.begin(), r.end(), static_cast<std::uint32_t>(j));
    }

    /// Number of ones in each column.
    std::vector<std::uint64_t> column_counts() const {
        std::vector<std::uint64_t> counts(p_, 0);
        for (auto j : cols_) ++counts[j];
        return counts;
    }

    /// Number of ones in the whole matrix.
    std::uint64_t total() const noexcept { return cols_.size(); }

    /// The first t rows, as used by the sequential convergence trace.
    SelectionMatrix first_rows(std::size_t t) const {
        if (t > B()) throw ParameterError("first_rows beyond B");
        SelectionMatrix out;
        out.lambda_ = lambda_;
        out.p_ = p_;
        out.seed_ = seed_;
        out.subsamples_ = subsamples_;
        out.offsets_.assign(offsets_.begin(), offsets_.begin() + static_cast<std::ptrdiff_t>(t) + 1);
        out.cols_.assign(cols_.begin(), cols_.begin() + static_cast<std::ptrdiff_t>(offsets_[t]));
        return out;
    }

    /// Row indices of each subsample, when produced by a resampling run.
    const Subsamples* subsample_indices() const noexcept { return subsamples_.get(); }

private:
    double lambda_ = 0.0;
    std::size_t p_ = 0;
    std::uint64_t seed_ = 0;
    std::vector<std::size_t> offsets_;
    std::vector<std::uint32_t> cols_;
    std::shared_ptr<const Subsamples> subsamples_;
};

struct SelectionFrequencies {
    double lambda = 0.0;
    std::vector<double> freq;
};

inline SelectionFrequencies selection_frequencies(const SelectionMatrix& m) {
    if (m.B() < 1) throw ParameterError("selection matrix has no rows");
    SelectionFrequencies out{m.lambda(), std::vector<double>(m.p(), 0.0)};
    const auto counts = m.column_counts();
    const double B = static_cast<double>(m.B());
    for (std::size_t j = 0; j < m.p(); ++j) out.freq[j] = static_cast<double>(counts[j]) / B;
    return out;
}

/// q: mean number of selected variables per subsample.
inline double average_selected(const SelectionMatrix& m) {
    if (m.B() < 1) throw ParameterError("selection matrix has no rows");
    return static_cast<double>(m.total()) / static_cast<double>(m.B());
}

/// floor(n/2) distinct rows, sorted, drawn by partial Fisher-Yates from the
/// stream (seed, index).
inline std::vector<Eigen::Index> draw_subsample(Eigen::Index n, std::uint64_t seed, std::uint64_t index) {
    std::vector<Eigen::Index> pool(static_cast<std::size_t>(n));
    std::iota(pool.begin(), pool.end(), Eigen::Index{0});
    const auto half = static_cast<std::size_t>(n / 2);
    auto eng = rng::engine(seed, rng::streams::subsample, index);
    for (std::size_t i = 0; i < half; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
        std::swap(pool[i], pool[pick(eng)]);
    }
    pool.resize(half);
    std::sort(pool.begin(), pool.end());
    return pool;
}

/// Penalized coefficients of one (subsample, lambda) fit, kept sparse.
struct SparseFit {
    double intercept = 0.0;
    std::vector<std::uint32_t> index;
    std::vector<double> value;
};

/// Fits indexed [lambda_index * B + b].
struct FitRecords {
    std::size_t B = 0;
    std::size_t grid_size = 0;
    std::vector<SparseFit> fits;

    const SparseFit& at(std::size_t lambda_index, std::size_t b) const { return fits[lambda_index * B + b]; }
};

struct FitIssue {
    std::size_t subsample = 0;
    std::size_t lambda_index = 0;
    long iterations = 0;
};

enum class SubsampleMode {
    /// Subsample b is a function of (seed, b) and serves every lambda.
    shared,
    /// Independent subsamples for every (lambda, b), for sensitivity checks.
    per_lambda,
};

struct ResamplingOptions {
    LassoOptions lasso = resampling_lasso_options();
    unsigned threads = 1;
    bool retain_fits = false;
    SubsampleMode mode = SubsampleMode::shared;
};

struct StabilitySelectionRun {
    std::vector<SelectionMatrix> matrices; // one per grid value, grid order
    std::optional<FitRecords> fits;
    std::vector<FitIssue> issues;          // non-converged fits
};

/// Lasso stability selection over a grid.
///
/// Output is a pure function of (d, grid, B, seed, mode): every (b, lambda)
/// task draws from its own stream and writes its own slot, so the thread
/// count never changes the result.
inline StabilitySelectionRun run_stability_selection(const Dataset& d, const LambdaGrid& grid, std::size_t B, std::uint64_t seed,
                                                     const ResamplingOptions& options = {}) {
    require_resamplable(d);
    grid.validate();
    if (B < 2) throw ParameterError("B must be at least 2");
    const std::size_t L = grid.size();
    const auto p = static_cast<std::size_t>(d.p());
    const bool shared = options.mode == SubsampleMode::shared;

    // Per-lambda stream index: disjoint from the shared indices [0, B).
    auto stream_index = [&](std::size_t l, std::size_t b) -> std::uint64_t {
        return shared ? b : static_cast<std::uint64_t>(B) * (l + 1) + b;
    };

    std::vector<std::shared_ptr<Subsamples>> subsamples(shared ? 1 : L);
    for (auto& s : subsamples) s = std::make_shared<Subsamples>(B);

    // rows[l][b]
    std::vector<std::vector<std::vector<std::uint32_t>>> rows(L, std::vector<std::vector<std::uint32_t>>(B));
    std::vector<std::vector<FitIssue>> issues(B);
    FitRecords records;
    if (options.retain_fits) {
        records.B = B;
        records.grid_size = L;
        records.fits.resize(L * B);
    }

    auto record = [&](std::size_t l, std::size_t b, const LassoFit& fit) {
        auto& row = rows[l][b];
        for (std::size_t j = 0; j < p; ++j) {
            if (fit.coefficients(static_cast<Eigen::Index>(j)) != 0.0) row.push_back(static_cast<std::uint32_t>(j));
        }
        if (!fit.converged) issues[b].push_back({b, l, fit.iterations});
        if (options.retain_fits) {
            auto& sf = records.fits[l * B + b];
            sf.intercept = fit.intercept;
            sf.index = row;
            sf.value.reserve(row.size());
            for (auto j : row) sf.value.push_back(fit.coefficients(j));
        }
    };

    parallel_for(B, options.threads, [&](std::size_t b) {
        if (shared) {
            auto idx = draw_subsample(d.n(), seed, stream_index(0, b));
            LassoSolver solver(d, idx, options.lasso);
            (*subsamples[0])[b] = std::move(idx);
            for (std::size_t l = 0; l < L; ++l) record(l, b, solver.solve(grid[l]));
        } else {
            for (std::size_t l = 0; l < L; ++l) {
                auto idx = draw_subsample(d.n(), seed, stream_index(l, b));
                LassoSolver solver(d, idx, options.lasso);
                (*subsamples[l])[b] = std::move(idx);
                record(l, b, solver.solve(grid[l]));
            }
        }
    });

    StabilitySelectionRun run;
    run.matrices.reserve(L);
    for (std::size_t l = 0; l < L; ++l) {
        run.matrices.emplace_back(grid[l], p, rows[l], subsamples[shared ? 0 : l], seed);
    }
    for (auto& v : issues) run.issues.insert(run.issues.end(), v.begin(), v.end());
    if (options.retain_fits) run.fits = std::move(records);
    return run;
}

// ---------------------------------------------------------------------------
// Held-out accuracy

struct AccuracyCurve {
    std::vector<double> mse; // per grid value
    std::size_t n_test = 0;
};

/// Mean over subsamples of the test-set MSE of each retained fit.
///
/// The fits live on the scale of `d`. A test set that has not been
/// standardized is mapped onto that scale with the constants recorded in `d`.
inline AccuracyCurve evaluate_mse(const Dataset& d, const LambdaGrid& grid, const FitRecords& fits, const Dataset& test) {
    if (test.p() != d.p()) throw ParameterError("test set has " + std::to_string(test.p()) + " columns, training data has " + std::to_string(d.p()));
    if (fits.grid_size != grid.size()) throw ParameterError("fit records do not match the grid");
    const Dataset scaled = (d.standardized && !test.standardized) ? apply_standardization(test, d) : test;

    AccuracyCurve curve;
    curve.n_test = static_cast<std::size_t>(scaled.n());
    curve.mse.assign(grid.size(), 0.0);
    for (std::size_t l = 0; l < grid.size(); ++l) {
        double total = 0.0;
        for (std::size_t b = 0; b < fits.B; ++b) {
            const auto& f = fits.at(l, b);
            double sse = 0.0;
            for (Eigen::Index i = 0; i < scaled.n(); ++i) {
                double pred = f.intercept;
                for (std::size_t k = 0; k < f.index.size(); ++k) pred += f.value[k] * scaled.x(i, f.index[k]);
                const double e = scaled.y(i) - pred;
                sse += e * e;
            }
            total += sse / static_cast<double>(scaled.n());
        }
        curve.mse[l] = total / static_cast<double>(fits.B);
    }
    return curve;
}

// ---------------------------------------------------------------------------
// Audit export: rows = subsamples, columns = variable names, cells 0/1.

inline std::string selection_matrix_csv(const SelectionMatrix& m, const std::vector<std::string>& names) {
    if (names.size() != m.p()) throw ParameterError("name count does not match selection matrix width");
    std::string out;
    for (std::size_t j = 0; j < names.size(); ++j) {
        if (j) out += ',';
        out += csv::escape(names[j]);
    }
    out += '\n';
    std::vector<char> line(m.p());
    for (std::size_t b = 0; b < m.B(); ++b) {
        std::fill(line.begin(), line.end(), '0');
        for (auto j : m.row(b)) line[j] = '1';
        for (std::size_t j = 0; j < m.p(); ++j) {
            if (j) out += ',';
            out += line[j];
        }
        out += '\n';
    }
    return out;
}

/// Reads the audit format back. Returns the matrix and its column names.
inline std::pair<SelectionMatrix, std::vector<std::string>> parse_selection_matrix_csv(std::string_view text, double lambda,
                                                                                       const std::string& source = "<memory>") {
    const auto records = csv::parse(text);
    if (records.size() < 2) throw IngestionError(source + ": selection matrix needs a header and at least one row");
    const auto& names = records.front().fields;
    std::vector<std::vector<std::uint32_t>> rows;
    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& rec = records[r];
        if (rec.fields.size() != names.size()) throw IngestionError(source + ": line " + std::to_string(rec.line) + " has the wrong number of fields");
        std::vector<std::uint32_t> sel;
        for (std::size_t j = 0; j < rec.fields.size(); ++j) {
            const auto& cell = rec.fields[j];
            if (cell == "1") {
                sel.push_back(static_cast<std::uint32_t>(j));
            } else if (cell != "0") {
                throw IngestionError(source + ": cell '" + cell + "' at line " + std::to_string(rec.line) + ", column '" + names[j] + "' is not 0 or 1");
            }
        }
        rows.push_back(std::move(sel));
    }
    return {SelectionMatrix(lambda, names.size(), rows), names};
}

} // namespace stabsel
