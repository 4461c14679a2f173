#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "csv.hpp"
#include "diagnostics.hpp"
#include "errors.hpp"
#include "resampling.hpp"
#include "stability.hpp"

namespace stabsel {

// ---------------------------------------------------------------------------
// Stable sets

enum class SelectionRule { mb_best_case, stable, stable_1sd };

inline const char* to_string(SelectionRule r) {
    switch (r) {
    case SelectionRule::mb_best_case: return "mb-best-case";
    case SelectionRule::stable: return "stable";
    case SelectionRule::stable_1sd: return "stable-1sd";
    }
    return "stable";
}

struct SelectedVariable {
    std::size_t index = 0;
    double frequency = 0.0; // the frequency that decided membership
};

struct StableSet {
    SelectionRule rule = SelectionRule::stable;
    double pi_thr = 0.6;
    std::vector<SelectedVariable> members; // ascending index

    bool contains(std::size_t j) const {
        return std::any_of(members.begin(), members.end(), [j](const auto& m) { return m.index == j; });
    }
    std::vector<std::size_t> indices() const {
        std::vector<std::size_t> out;
        for (const auto& m : members) out.push_back(m.index);
        return out;
    }
};

/// Thresholds must lie in (0.5, 1]; values outside [0.6, 0.9] draw a warning.
inline void check_threshold(double pi_thr, Diagnostics* diag = nullptr) {
    if (!(pi_thr > 0.5 && pi_thr <= 1.0)) throw ParameterError("pi_thr must lie in (0.5, 1], got " + csv::format(pi_thr));
    if (pi_thr < 0.6 || pi_thr > 0.9) warn(diag, "pi_thr=" + csv::format(pi_thr) + " lies outside the customary range [0.6, 0.9]");
}

/// Best-case rule: j is kept when its largest frequency over the grid
/// reaches pi_thr.
inline StableSet mb_stable_set(std::span<const SelectionFrequencies> freq_per_lambda, double pi_thr, Diagnostics* diag = nullptr) {
    check_threshold(pi_thr, diag);
    if (freq_per_lambda.empty()) throw ParameterError("no selection frequencies supplied");
    const std::size_t p = freq_per_lambda.front().freq.size();
    std::vector<double> best(p, 0.0);
    for (const auto& f : freq_per_lambda) {
        if (f.freq.size() != p) throw ParameterError("selection frequencies disagree on p");
        for (std::size_t j = 0; j < p; ++j) best[j] = std::max(best[j], f.freq[j]);
    }
    StableSet set{SelectionRule::mb_best_case, pi_thr, {}};
    for (std::size_t j = 0; j < p; ++j) {
        if (best[j] >= pi_thr) set.members.push_back({j, best[j]});
    }
    return set;
}

/// Frequencies at a single chosen lambda decide membership.
inline StableSet stable_stability_set(const SelectionFrequencies& freq, double pi_thr, SelectionRule rule = SelectionRule::stable,
                                      Diagnostics* diag = nullptr) {
    check_threshold(pi_thr, diag);
    StableSet set{rule, pi_thr, {}};
    for (std::size_t j = 0; j < freq.freq.size(); ++j) {
        if (freq.freq[j] >= pi_thr) set.members.push_back({j, freq.freq[j]});
    }
    return set;
}

// ---------------------------------------------------------------------------
// Error-rate calibration

struct FixThreshold {
    double pi_thr;
};
struct FixPfer {
    double pfer;
};
using CalibrationTarget = std::variant<FixThreshold, FixPfer>;

enum class CalibrationMode { fix_threshold, fix_pfer };

inline const char* to_string(CalibrationMode m) { return m == CalibrationMode::fix_threshold ? "fix-threshold" : "fix-pfer"; }

/// PFER <= q^2 / (p (2 pi_thr - 1)), solved for whichever side is free.
struct CalibrationResult {
    CalibrationMode mode = CalibrationMode::fix_threshold;
    double pi_thr = 0.0;
    double pfer_bound = 0.0;
    double q_used = 0.0;
    std::size_t p = 0;
    double lambda = 0.0;
};

inline double pfer_bound(double q, std::size_t p, double pi_thr) {
    return q * q / (static_cast<double>(p) * (2.0 * pi_thr - 1.0));
}

inline CalibrationResult calibrate_pfer(double q, std::size_t p, const CalibrationTarget& target, double lambda = 0.0) {
    if (p == 0) throw ParameterError("p must be positive");
    if (!(q >= 0.0) || !(q <= static_cast<double>(p))) throw ParameterError("q must lie in [0, p]");
    CalibrationResult res;
    res.q_used = q;
    res.p = p;
    res.lambda = lambda;
    if (const auto* fix = std::get_if<FixThreshold>(&target)) {
        if (!(fix->pi_thr > 0.5 && fix->pi_thr <= 1.0)) throw ParameterError("pi_thr must lie in (0.5, 1], got " + csv::format(fix->pi_thr));
        res.mode = CalibrationMode::fix_threshold;
        res.pi_thr = fix->pi_thr;
        res.pfer_bound = pfer_bound(q, p, fix->pi_thr);
        return res;
    }
    const double pfer = std::get<FixPfer>(target).pfer;
    if (!(pfer > 0.0) || !std::isfinite(pfer)) throw ParameterError("PFER target must be positive");
    const double minimal = q * q / static_cast<double>(p);
    if (minimal == 0.0) throw ParameterError("q = 0: the bound is zero for every threshold, nothing to calibrate");
    const double pi_thr = (1.0 + q * q / (static_cast<double>(p) * pfer)) / 2.0;
    if (pi_thr > 1.0) {
        throw InfeasibleError("PFER target " + csv::format(pfer) + " is infeasible: the smallest achievable bound is q^2/p = " + csv::format(minimal),
                              minimal);
    }
    res.mode = CalibrationMode::fix_pfer;
    res.pi_thr = pi_thr;
    res.pfer_bound = pfer;
    return res;
}

// ---------------------------------------------------------------------------
// Stability versus accuracy

struct ParetoPoint {
    std::size_t grid_index = 0;
    double lambda = 0.0;
    double phi = 0.0;
    double mse = 0.0;
    double accuracy() const noexcept { return -mse; }
    bool on_front = false;
};

struct Corollary1Record {
    double lambda_stable = 0.0;
    bool stable_nondecreasing_before = false;
    bool loss_nondecreasing_after = false;
    bool lambda_stable_on_front = false;
    /// Largest drop in stability going up to lambda_stable (0 if none).
    double max_stability_violation = 0.0;
    /// Largest drop in loss going beyond lambda_stable (0 if none).
    double max_loss_violation = 0.0;

    bool assumptions_hold() const noexcept { return stable_nondecreasing_before && loss_nondecreasing_after; }
    /// Assumptions hold but the conclusion does not.
    bool contract_violation() const noexcept { return assumptions_hold() && !lambda_stable_on_front; }
    explicit operator bool() const noexcept { return assumptions_hold(); }
};

struct ParetoAnalysis {
    std::vector<ParetoPoint> points; // usable grid points, grid order
    std::vector<std::size_t> front;  // positions in `points`
    std::optional<double> lambda_pareto;
    std::optional<Corollary1Record> corollary1;
};

inline constexpr double kMonotoneSlack = 1e-9;

/// a dominates b: at least as good in both coordinates, better in one.
inline bool dominates(const ParetoPoint& a, const ParetoPoint& b) noexcept {
    return a.phi >= b.phi && a.accuracy() >= b.accuracy() && (a.phi > b.phi || a.accuracy() > b.accuracy());
}

/// Non-dominated points by a sort-and-sweep: highest stability first, and a
/// point survives when no point of strictly higher stability is at least as
/// accurate and no point of equal stability is strictly more accurate.
inline std::vector<std::size_t> pareto_front(const std::vector<ParetoPoint>& pts) {
    std::vector<std::size_t> order(pts.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (pts[a].phi != pts[b].phi) return pts[a].phi > pts[b].phi;
        return pts[a].accuracy() > pts[b].accuracy();
    });
    std::vector<std::size_t> front;
    double best_above = -std::numeric_limits<double>::infinity();
    for (std::size_t g = 0; g < order.size();) {
        std::size_t h = g;
        while (h < order.size() && pts[order[h]].phi == pts[order[g]].phi) ++h;
        const double group_best = pts[order[g]].accuracy();
        for (std::size_t k = g; k < h; ++k) {
            const double acc = pts[order[k]].accuracy();
            if (acc == group_best && acc > best_above) front.push_back(order[k]);
        }
        best_above = std::max(best_above, group_best);
        g = h;
    }
    std::sort(front.begin(), front.end());
    return front;
}

namespace detail {

inline Corollary1Record corollary1_scan(const ParetoAnalysis& a, double lambda_stable) {
    Corollary1Record rec;
    rec.lambda_stable = lambda_stable;
    std::vector<std::size_t> asc(a.points.size());
    std::iota(asc.begin(), asc.end(), std::size_t{0});
    std::sort(asc.begin(), asc.end(), [&](std::size_t x, std::size_t y) { return a.points[x].lambda < a.points[y].lambda; });

    for (std::size_t k = 1; k < asc.size(); ++k) {
        const auto& prev = a.points[asc[k - 1]];
        const auto& cur = a.points[asc[k]];
        if (cur.lambda <= lambda_stable) {
            rec.max_stability_violation = std::max(rec.max_stability_violation, prev.phi - cur.phi);
        }
        if (prev.lambda >= lambda_stable) {
            rec.max_loss_violation = std::max(rec.max_loss_violation, prev.mse - cur.mse);
        }
    }
    rec.stable_nondecreasing_before = rec.max_stability_violation <= kMonotoneSlack;
    rec.loss_nondecreasing_after = rec.max_loss_violation <= kMonotoneSlack;

    auto it = std::find_if(a.points.begin(), a.points.end(), [&](const ParetoPoint& pt) { return pt.lambda == lambda_stable; });
    rec.lambda_stable_on_front = it != a.points.end() && it->on_front;
    return rec;
}

} // namespace detail

/// Pareto front of (stability, -MSE) over grid points with defined
/// stability. lambda_pareto maximizes stability - MSE over the front (ties
/// go to the larger lambda). When `choice` carries a lambda, the
/// monotonicity assumptions behind its Pareto optimality are also scanned.
inline ParetoAnalysis pareto_analysis(std::span<const StabilityReport> curve, const AccuracyCurve& acc, const LambdaChoice& choice = {}) {
    if (curve.size() != acc.mse.size()) throw ParameterError("stability and accuracy curves are not aligned");
    ParetoAnalysis a;
    for (std::size_t l = 0; l < curve.size(); ++l) {
        if (!curve[l].phi) continue;
        a.points.push_back({l, curve[l].lambda, *curve[l].phi, acc.mse[l], false});
    }
    if (a.points.empty()) throw ParameterError("no grid point has both a defined stability and an accuracy value");
    a.front = pareto_front(a.points);
    for (auto k : a.front) a.points[k].on_front = true;

    std::optional<std::size_t> best;
    for (auto k : a.front) {
        const auto& pt = a.points[k];
        if (!best) {
            best = k;
            continue;
        }
        const auto& cur = a.points[*best];
        const double score = pt.phi + pt.accuracy();
        const double cur_score = cur.phi + cur.accuracy();
        if (score > cur_score || (score == cur_score && pt.lambda > cur.lambda)) best = k;
    }
    a.lambda_pareto = a.points[*best].lambda;
    if (choice.lambda) a.corollary1 = detail::corollary1_scan(a, *choice.lambda);
    return a;
}

/// True when both monotonicity assumptions hold on the grid. The returned
/// record also says whether lambda_stable is on the front; an assumption
/// set that holds without that conclusion is flagged as a contract
/// violation.
inline Corollary1Record check_corollary1(const ParetoAnalysis& a, double lambda_stable) {
    return detail::corollary1_scan(a, lambda_stable);
}

} // namespace stabsel
