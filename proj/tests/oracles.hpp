#pragma once

// Independent reference implementations used only by tests. None of these
// call into the library's numerical code.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

namespace oracle {

/// Exact fraction over __int128 with normalized sign and gcd.
class Rational {
public:
    Rational(__int128 num = 0, __int128 den = 1) : num_(num), den_(den) {
        if (den_ == 0) throw std::domain_error("zero denominator");
        normalize();
    }
    __int128 num() const { return num_; }
    __int128 den() const { return den_; }

    friend Rational operator+(const Rational& a, const Rational& b) { return {a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_}; }
    friend Rational operator-(const Rational& a, const Rational& b) { return {a.num_ * b.den_ - b.num_ * a.den_, a.den_ * b.den_}; }
    friend Rational operator*(const Rational& a, const Rational& b) { return {a.num_ * b.num_, a.den_ * b.den_}; }
    friend Rational operator/(const Rational& a, const Rational& b) { return {a.num_ * b.den_, a.den_ * b.num_}; }
    friend bool operator==(const Rational& a, const Rational& b) { return a.num_ == b.num_ && a.den_ == b.den_; }
    friend bool operator<(const Rational& a, const Rational& b) { return a.num_ * b.den_ < b.num_ * a.den_; }

    /// Correctly rounded: both parts are exact doubles, so only the
    /// division rounds.
    double to_double() const {
        constexpr __int128 exact = __int128{1} << 53;
        if (num_ >= exact || -num_ >= exact || den_ >= exact) throw std::overflow_error("rational too wide for an exact conversion");
        return static_cast<double>(num_) / static_cast<double>(den_);
    }

private:
    static __int128 gcd(__int128 a, __int128 b) {
        if (a < 0) a = -a;
        if (b < 0) b = -b;
        while (b != 0) {
            const __int128 t = a % b;
            a = b;
            b = t;
        }
        return a;
    }
    void normalize() {
        if (den_ < 0) {
            num_ = -num_;
            den_ = -den_;
        }
        const __int128 g = gcd(num_, den_);
        if (g > 1) {
            num_ /= g;
            den_ /= g;
        }
    }
    __int128 num_, den_;
};

using Dense = std::vector<std::vector<int>>;

/// The stability estimator written exactly as the textbook formula:
///   1 - mean_j(s_j^2) / ((q/p)(1 - q/p)),
/// s_j^2 = B/(B-1) p_j (1 - p_j), p_j the column mean, q the mean row sum.
inline std::optional<Rational> phi_textbook(const Dense& m) {
    const auto B = static_cast<__int128>(m.size());
    const auto p = static_cast<__int128>(m.front().size());
    Rational q(0);
    for (const auto& row : m) {
        Rational rs(0);
        for (int v : row) rs = rs + Rational(v);
        q = q + rs / Rational(B);
    }
    const Rational qp = q / Rational(p);
    const Rational denom = qp * (Rational(1) - qp);
    if (denom == Rational(0)) return std::nullopt;
    Rational mean_s2(0);
    for (std::size_t j = 0; j < m.front().size(); ++j) {
        Rational pj(0);
        for (const auto& row : m) pj = pj + Rational(row[j], B);
        const Rational s2 = Rational(B, B - 1) * pj * (Rational(1) - pj);
        mean_s2 = mean_s2 + s2 / Rational(p);
    }
    return Rational(1) - mean_s2 / denom;
}

inline Dense random_binary(std::size_t B, std::size_t p, double density, std::mt19937_64& eng) {
    std::bernoulli_distribution bit(density);
    Dense m(B, std::vector<int>(p));
    for (auto& row : m)
        for (auto& v : row) v = bit(eng) ? 1 : 0;
    return m;
}

struct Point {
    double phi, mse;
};

/// Indices of points not dominated by any other point, by pairwise check.
inline std::vector<std::size_t> brute_front(const std::vector<Point>& pts) {
    std::vector<std::size_t> front;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        bool dominated = false;
        for (std::size_t k = 0; k < pts.size() && !dominated; ++k) {
            if (k == i) continue;
            const bool geq = pts[k].phi >= pts[i].phi && -pts[k].mse >= -pts[i].mse;
            const bool gt = pts[k].phi > pts[i].phi || -pts[k].mse > -pts[i].mse;
            dominated = geq && gt;
        }
        if (!dominated) front.push_back(i);
    }
    return front;
}

/// Ordinary least squares with an intercept via the normal equations.
struct Ols {
    double intercept;
    Eigen::VectorXd beta;
};

inline Ols ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
    Eigen::MatrixXd a(x.rows(), x.cols() + 1);
    a.col(0).setOnes();
    a.rightCols(x.cols()) = x;
    const Eigen::VectorXd coef = (a.transpose() * a).ldlt().solve(a.transpose() * y);
    return {coef(0), coef.tail(x.cols())};
}

/// Exact lasso for small p by enumerating every support and sign pattern:
/// the solution is the pattern whose stationary point is sign-consistent
/// and satisfies the inactive-coordinate bound. Columns are optionally
/// scaled to unit population variance first (coefficients are reported
/// on the original scale).
struct ExactLasso {
    double intercept;
    Eigen::VectorXd beta;
};

inline ExactLasso exact_lasso(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda, bool unit_scale) {
    const auto n = static_cast<double>(x.rows());
    const Eigen::Index p = x.cols();
    const Eigen::RowVectorXd xm = x.colwise().mean();
    Eigen::MatrixXd xc = x.rowwise() - xm;
    const double ym = y.mean();
    const Eigen::VectorXd yc = y.array() - ym;
    Eigen::VectorXd scale = Eigen::VectorXd::Ones(p);
    if (unit_scale) {
        for (Eigen::Index j = 0; j < p; ++j) {
            scale(j) = std::sqrt(xc.col(j).squaredNorm() / n);
            xc.col(j) /= scale(j);
        }
    }
    const Eigen::MatrixXd g = xc.transpose() * xc / n;
    const Eigen::VectorXd c = xc.transpose() * yc / n;

    std::optional<Eigen::VectorXd> found;
    for (unsigned mask = 0; mask < (1u << p) && !found; ++mask) {
        std::vector<Eigen::Index> s;
        for (Eigen::Index j = 0; j < p; ++j)
            if (mask & (1u << j)) s.push_back(j);
        const auto k = static_cast<Eigen::Index>(s.size());
        for (unsigned signs = 0; signs < (1u << k) && !found; ++signs) {
            Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
            if (k > 0) {
                Eigen::MatrixXd gs(k, k);
                Eigen::VectorXd rhs(k);
                for (Eigen::Index a = 0; a < k; ++a) {
                    const double sg = (signs & (1u << a)) ? -1.0 : 1.0;
                    rhs(a) = c(s[a]) - lambda * sg;
                    for (Eigen::Index b = 0; b < k; ++b) gs(a, b) = g(s[a], s[b]);
                }
                const Eigen::VectorXd bs = gs.fullPivLu().solve(rhs);
                bool consistent = true;
                for (Eigen::Index a = 0; a < k; ++a) {
                    const double sg = (signs & (1u << a)) ? -1.0 : 1.0;
                    if (bs(a) * sg <= 0.0) consistent = false;
                    beta(s[a]) = bs(a);
                }
                if (!consistent) continue;
            }
            const Eigen::VectorXd grad = c - g * beta;
            bool kkt = true;
            for (Eigen::Index j = 0; j < p; ++j) {
                if (beta(j) == 0.0 && std::abs(grad(j)) > lambda * (1 + 1e-12) + 1e-14) kkt = false;
            }
            if (kkt) found = beta;
        }
    }
    if (!found) throw std::runtime_error("exact lasso: no consistent pattern");
    Eigen::VectorXd beta = found->cwiseQuotient(scale);
    return {ym - xm.dot(beta), beta};
}

} // namespace oracle
