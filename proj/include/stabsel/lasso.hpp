#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "data.hpp"
#include "diagnostics.hpp"
#include "errors.hpp"
#include "parallel.hpp"
#include "rng.hpp"

namespace stabsel {

struct LassoOptions {
    /// Convergence when a full sweep changes no coefficient by more than tol.
    double tol = 1e-7;
    /// Cap on coordinate-descent sweeps (full and active-set) per solve.
    long max_iter = 100000;
    /// Re-evaluate the objective after every sweep and throw if it rises.
    bool check_descent = false;
    /// Scale columns to unit variance (denominator n) on the rows being fit,
    /// penalize on that scale and map coefficients back. This is the per-fit
    /// standardization of common lasso packages.
    bool standardize_rows = false;
};

/// Options used for subsample and cross-validation fits: per-fit column
/// standardization on.
inline LassoOptions resampling_lasso_options() {
    LassoOptions o;
    o.standardize_rows = true;
    return o;
}

struct LassoFit {
    double intercept = 0.0;
    Eigen::VectorXd coefficients;
    double lambda = 0.0;
    long iterations = 0;
    bool converged = false;

    /// Indices with a nonzero coefficient.
    std::vector<Eigen::Index> support() const {
        std::vector<Eigen::Index> s;
        for (Eigen::Index j = 0; j < coefficients.size(); ++j) {
            if (coefficients(j) != 0.0) s.push_back(j);
        }
        return s;
    }

    Eigen::VectorXd predict(const Eigen::MatrixXd& x) const {
        return (x * coefficients).array() + intercept;
    }
};

inline double soft_threshold(double z, double gamma) noexcept {
    if (z > gamma) return z - gamma;
    if (z < -gamma) return z + gamma;
    return 0.0;
}

/// Cyclic coordinate descent for
///
///     (1/(2n)) ||y - b0 - X b||^2 + lambda ||b||_1
///
/// on a row subset of a dataset. The intercept is unpenalized and handled
/// by centering x and y over the subset. Successive calls to solve() warm
/// start from the previous solution, so walking a decreasing grid is cheap.
///
/// Each solve alternates a sweep over all coordinates with sweeps over the
/// active set until a full sweep moves no coefficient by more than tol.
class LassoSolver {
public:
    explicit LassoSolver(const Dataset& d, LassoOptions options = {})
        : LassoSolver(d, all_rows(d.n()), options) {}

    LassoSolver(const Dataset& d, std::span<const Eigen::Index> rows, LassoOptions options = {})
        : options_(options) {
        if (rows.empty()) throw ParameterError("lasso needs at least one row");
        const auto m = static_cast<Eigen::Index>(rows.size());
        const Eigen::Index p = d.p();
        xc_.resize(m, p);
        yc_.resize(m);
        for (Eigen::Index i = 0; i < m; ++i) {
            xc_.row(i) = d.x.row(rows[static_cast<std::size_t>(i)]);
            yc_(i) = d.y(rows[static_cast<std::size_t>(i)]);
        }
        inv_n_ = 1.0 / static_cast<double>(m);
        x_mean_ = xc_.colwise().mean().transpose();
        xc_.rowwise() -= x_mean_.transpose();
        y_mean_ = yc_.mean();
        yc_.array() -= y_mean_;
        col_ms_ = xc_.colwise().squaredNorm().transpose() * inv_n_;
        col_scale_ = Eigen::VectorXd::Ones(p);
        // Columns that are constant on this subset cannot enter the model.
        for (Eigen::Index j = 0; j < p; ++j) {
            const double scale = std::max(1.0, x_mean_(j) * x_mean_(j));
            if (col_ms_(j) <= 1e-24 * scale) {
                col_ms_(j) = 0.0;
            } else if (options_.standardize_rows) {
                col_scale_(j) = std::sqrt(col_ms_(j));
                xc_.col(j) /= col_scale_(j);
                col_ms_(j) = 1.0;
            }
        }
        reset();
    }

    Eigen::Index n() const noexcept { return xc_.rows(); }
    Eigen::Index p() const noexcept { return xc_.cols(); }

    /// Smallest lambda whose solution on this subset is the null model.
    double lambda_max() const {
        if (p() == 0) return 0.0;
        return (xc_.transpose() * yc_).cwiseAbs().maxCoeff() * inv_n_;
    }

    /// Drops the warm-start state.
    void reset() {
        beta_ = Eigen::VectorXd::Zero(p());
        r_ = yc_;
        active_.clear();
        in_active_.assign(static_cast<std::size_t>(p()), 0);
    }

    LassoFit solve(double lambda) {
        if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ParameterError("lambda must be a nonnegative finite number");
        LassoFit fit;
        fit.lambda = lambda;
        double last_objective = objective(lambda);
        auto sweep = [&](bool full) {
            const double change = full ? sweep_all(lambda) : sweep_active(lambda);
            ++fit.iterations;
            if (options_.check_descent) {
                const double obj = objective(lambda);
                if (obj > last_objective + 1e-12 * (1.0 + std::abs(last_objective))) {
                    throw std::logic_error("coordinate descent increased the objective from " + csv::format(last_objective) + " to " + csv::format(obj));
                }
                last_objective = obj;
            }
            return change;
        };

        while (fit.iterations < options_.max_iter) {
            if (sweep(true) < options_.tol) {
                fit.converged = true;
                break;
            }
            while (fit.iterations < options_.max_iter) {
                if (sweep(false) < options_.tol) break;
            }
        }
        fit.coefficients = coefficients();
        fit.intercept = intercept();
        return fit;
    }

    /// (1/(2n)) ||r||^2 + lambda ||beta||_1 at the current state.
    double objective(double lambda) const {
        return 0.5 * inv_n_ * r_.squaredNorm() + lambda * beta_.lpNorm<1>();
    }

    /// Coefficients on the scale of the input columns.
    Eigen::VectorXd coefficients() const { return beta_.cwiseQuotient(col_scale_); }
    double intercept() const { return y_mean_ - x_mean_.dot(coefficients()); }
    const std::vector<Eigen::Index>& active_set() const noexcept { return active_; }

private:
    static std::vector<Eigen::Index> all_rows(Eigen::Index n) {
        std::vector<Eigen::Index> rows(static_cast<std::size_t>(n));
        std::iota(rows.begin(), rows.end(), Eigen::Index{0});
        return rows;
    }

    double update(Eigen::Index j, double lambda) {
        const double v = col_ms_(j);
        if (v == 0.0) return 0.0;
        const double old = beta_(j);
        const double z = xc_.col(j).dot(r_) * inv_n_ + v * old;
        const double next = soft_threshold(z, lambda) / v;
        if (next == old) return 0.0;
        r_.noalias() -= (next - old) * xc_.col(j);
        beta_(j) = next;
        if (!in_active_[static_cast<std::size_t>(j)]) {
            in_active_[static_cast<std::size_t>(j)] = 1;
            active_.push_back(j);
        }
        return std::abs(next - old);
    }

    double sweep_all(double lambda) {
        double change = 0.0;
        for (Eigen::Index j = 0; j < p(); ++j) change = std::max(change, update(j, lambda));
        return change;
    }

    double sweep_active(double lambda) {
        double change = 0.0;
        for (std::size_t k = 0; k < active_.size(); ++k) change = std::max(change, update(active_[k], lambda));
        return change;
    }

    LassoOptions options_;
    Eigen::MatrixXd xc_;
    Eigen::VectorXd yc_;
    Eigen::VectorXd x_mean_;
    Eigen::VectorXd col_ms_;
    Eigen::VectorXd col_scale_;
    Eigen::VectorXd beta_;
    Eigen::VectorXd r_;
    double y_mean_ = 0.0;
    double inv_n_ = 1.0;
    std::vector<Eigen::Index> active_;
    std::vector<char> in_active_;
};

/// Single cold-start fit on all rows of `d`. A fit that hits max_iter is
/// returned with converged = false and a warning.
inline LassoFit fit_lasso(const Dataset& d, double lambda, const LassoOptions& options = {}, Diagnostics* diag = nullptr) {
    LassoSolver solver(d, options);
    LassoFit fit = solver.solve(lambda);
    if (!fit.converged) {
        warn(diag, "lasso did not converge at lambda=" + csv::format(lambda) + " after " + std::to_string(fit.iterations) + " sweeps");
    }
    return fit;
}

/// max_j |<x_j, y - mean(y)>| / n. Zero (with a warning) when y is constant.
inline double lambda_max(const Dataset& d, Diagnostics* diag = nullptr) {
    const Eigen::VectorXd yc = d.y.array() - d.y.mean();
    double best = 0.0;
    for (Eigen::Index j = 0; j < d.p(); ++j) {
        const auto col = d.x.col(j);
        const double mean = col.mean();
        best = std::max(best, std::abs((col.array() - mean).matrix().dot(yc)));
    }
    best /= static_cast<double>(d.n());
    if (best == 0.0) warn(diag, "lambda_max is zero: the centered response is identically zero");
    return best;
}

// ---------------------------------------------------------------------------
// Regularization grid

enum class GridSource { cv_derived, user };

inline const char* to_string(GridSource s) { return s == GridSource::cv_derived ? "cv-derived" : "user"; }

/// Strictly decreasing positive regularization values.
struct LambdaGrid {
    std::vector<double> values;
    GridSource source = GridSource::cv_derived;

    std::size_t size() const noexcept { return values.size(); }
    double operator[](std::size_t i) const { return values[i]; }

    void validate() const {
        if (values.size() < 2) throw GridError("grid needs at least 2 values");
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (!(values[i] > 0.0) || !std::isfinite(values[i])) throw GridError("grid values must be positive and finite");
            if (i > 0 && !(values[i] < values[i - 1])) throw GridError("grid values must be strictly decreasing");
        }
    }

    /// User-supplied values in any order; duplicates are rejected.
    static LambdaGrid user(std::vector<double> values) {
        std::sort(values.begin(), values.end(), std::greater<>());
        LambdaGrid g{std::move(values), GridSource::user};
        g.validate();
        return g;
    }
};

/// Default ratio between the smallest and largest grid value.
inline double default_grid_ratio(Eigen::Index n, Eigen::Index p) { return n > p ? 1e-4 : 1e-2; }

/// Geometric sequence from `top` down to ratio * top.
inline LambdaGrid geometric_grid(double top, std::size_t length, double ratio) {
    if (length < 2) throw ParameterError("grid length must be at least 2");
    if (!(ratio > 0.0 && ratio < 1.0)) throw ParameterError("grid ratio must lie in (0, 1)");
    if (!(top > 0.0) || !std::isfinite(top)) throw GridError("cannot build a grid below lambda_max = " + csv::format(top));
    LambdaGrid g;
    g.values.resize(length);
    const double last = static_cast<double>(length - 1);
    for (std::size_t k = 0; k < length; ++k) {
        g.values[k] = top * std::pow(ratio, static_cast<double>(k) / last);
    }
    g.values.back() = top * ratio;
    g.validate();
    return g;
}

inline LambdaGrid make_grid(const Dataset& d, std::size_t length, double ratio, Diagnostics* diag = nullptr) {
    return geometric_grid(lambda_max(d, diag), length, ratio);
}

// ---------------------------------------------------------------------------
// Cross-validation

struct CvResult {
    LambdaGrid grid;
    std::vector<double> mean_cv_error;
    std::vector<double> sd_cv_error;
    std::size_t index_min = 0;
    std::size_t index_1se = 0;
    double lambda_min = 0.0;
    double lambda_1se = 0.0;
    std::size_t folds = 0;
    std::vector<std::size_t> fold_of_row;
};

/// Seeded shuffle of the rows, then contiguous blocks; the first n % folds
/// blocks get one extra row.
inline std::vector<std::size_t> assign_folds(Eigen::Index n, std::size_t folds, std::uint64_t seed) {
    if (folds < 2) throw ParameterError("need at least 2 folds");
    if (folds > static_cast<std::size_t>(n)) throw ParameterError("more folds (" + std::to_string(folds) + ") than rows (" + std::to_string(n) + ")");
    std::vector<std::size_t> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), std::size_t{0});
    auto eng = rng::engine(seed, rng::streams::cv_folds);
    std::shuffle(order.begin(), order.end(), eng);
    std::vector<std::size_t> fold_of(order.size());
    const std::size_t base = order.size() / folds;
    const std::size_t extra = order.size() % folds;
    std::size_t pos = 0;
    for (std::size_t k = 0; k < folds; ++k) {
        const std::size_t size = base + (k < extra ? 1 : 0);
        for (std::size_t i = 0; i < size; ++i) fold_of[order[pos++]] = k;
    }
    return fold_of;
}

/// K-fold cross-validation of held-out squared error over the grid.
///
/// The mean error weights each fold by its size; the standard error is the
/// size-weighted spread of fold errors divided by sqrt(K - 1). lambda_min
/// minimizes the mean; lambda_1se is the largest grid value whose mean is
/// within one standard error of that minimum.
inline CvResult cross_validate(const Dataset& d, const LambdaGrid& grid, std::size_t folds, std::uint64_t seed,
                               const LassoOptions& options = resampling_lasso_options(), unsigned threads = 1) {
    grid.validate();
    CvResult res;
    res.grid = grid;
    res.folds = folds;
    res.fold_of_row = assign_folds(d.n(), folds, seed);

    const std::size_t L = grid.size();
    std::vector<std::vector<double>> fold_mse(folds, std::vector<double>(L, 0.0));
    std::vector<double> fold_size(folds, 0.0);
    for (auto k : res.fold_of_row) fold_size[k] += 1.0;
    for (std::size_t k = 0; k < folds; ++k) {
        if (fold_size[k] < 1.0) throw ParameterError("fold " + std::to_string(k) + " has no rows");
    }

    parallel_for(folds, threads, [&](std::size_t k) {
        std::vector<Eigen::Index> train, test;
        for (std::size_t i = 0; i < res.fold_of_row.size(); ++i) {
            (res.fold_of_row[i] == k ? test : train).push_back(static_cast<Eigen::Index>(i));
        }
        LassoSolver solver(d, train, options);
        for (std::size_t l = 0; l < L; ++l) {
            solver.solve(grid[l]);
            const Eigen::VectorXd beta = solver.coefficients();
            const double b0 = solver.intercept();
            double sse = 0.0;
            for (auto i : test) {
                const double e = d.y(i) - b0 - d.x.row(i).dot(beta);
                sse += e * e;
            }
            fold_mse[k][l] = sse / static_cast<double>(test.size());
        }
    });

    const double n = static_cast<double>(d.n());
    res.mean_cv_error.assign(L, 0.0);
    res.sd_cv_error.assign(L, 0.0);
    for (std::size_t l = 0; l < L; ++l) {
        double mean = 0.0;
        for (std::size_t k = 0; k < folds; ++k) mean += fold_size[k] * fold_mse[k][l];
        mean /= n;
        double var = 0.0;
        for (std::size_t k = 0; k < folds; ++k) {
            const double dev = fold_mse[k][l] - mean;
            var += fold_size[k] * dev * dev;
        }
        var /= n;
        res.mean_cv_error[l] = mean;
        res.sd_cv_error[l] = std::sqrt(var / static_cast<double>(folds - 1));
    }

    res.index_min = static_cast<std::size_t>(std::min_element(res.mean_cv_error.begin(), res.mean_cv_error.end()) - res.mean_cv_error.begin());
    const double bound = res.mean_cv_error[res.index_min] + res.sd_cv_error[res.index_min];
    res.index_1se = res.index_min;
    for (std::size_t l = 0; l < L; ++l) {
        if (res.mean_cv_error[l] <= bound) {
            res.index_1se = l;
            break;
        }
    }
    res.lambda_min = grid[res.index_min];
    res.lambda_1se = grid[res.index_1se];
    return res;
}

} // namespace stabsel
