#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"
#include "parallel.hpp"
#include "resampling.hpp"
#include "rng.hpp"

namespace stabsel {

inline constexpr double kExcellentStability = 0.75;
inline constexpr double kPoorStability = 0.4;

enum class StabilityBand { poor, intermediate, excellent, undefined };

inline const char* to_string(StabilityBand b) {
    switch (b) {
    case StabilityBand::poor: return "poor";
    case StabilityBand::intermediate: return "intermediate";
    case StabilityBand::excellent: return "excellent";
    case StabilityBand::undefined: return "undefined";
    }
    return "undefined";
}

inline StabilityBand classify(std::optional<double> phi) {
    if (!phi) return StabilityBand::undefined;
    if (*phi >= kExcellentStability) return StabilityBand::excellent;
    if (*phi < kPoorStability) return StabilityBand::poor;
    return StabilityBand::intermediate;
}

struct StabilityReport {
    double lambda = 0.0;
    std::optional<double> phi;
    std::optional<double> ci_low;
    std::optional<double> ci_high;
    StabilityBand band = StabilityBand::undefined;
    std::size_t B = 0;
};

/// Stability of a B x p selection matrix from its column counts c_j and
/// total Q = sum c_j:
///
///     phi = 1 - (1/p) sum s_j^2 / ((q/p)(1 - q/p)),   q = Q/B,
///     s_j^2 = c_j (B - c_j) / (B (B - 1)),
///
/// which reduces to 1 - p B sum c_j (B - c_j) / ((B - 1) Q (p B - Q)).
/// Numerator and denominator are integers, so the quotient is rounded
/// once. Undefined when Q = 0 or Q = p B.
inline std::optional<double> phi_from_counts(std::uint64_t total, std::uint64_t sum_sq, std::uint64_t B, std::uint64_t p) {
    if (B < 2) throw ParameterError("stability needs at least 2 rows");
    const auto pB = static_cast<unsigned __int128>(p) * B;
    if (total == 0 || total >= pB) return std::nullopt;
    // sum c_j (B - c_j) = B Q - sum c_j^2
    const unsigned __int128 spread = static_cast<unsigned __int128>(B) * total - sum_sq;
    const unsigned __int128 num = pB * spread;
    const unsigned __int128 den = static_cast<unsigned __int128>(B - 1) * total * (pB - total);
    const __int128 diff = static_cast<__int128>(den) - static_cast<__int128>(num);
    return static_cast<double>(diff) / static_cast<double>(den);
}

inline std::optional<double> phi_from_counts(std::span<const std::uint64_t> counts, std::uint64_t B) {
    std::uint64_t total = 0, sum_sq = 0;
    for (auto c : counts) {
        total += c;
        sum_sq += c * c;
    }
    return phi_from_counts(total, sum_sq, B, counts.size());
}

/// Point estimate and band for one selection matrix. The interval is left
/// empty; see stability_curve and convergence_trace.
inline StabilityReport estimate_stability(const SelectionMatrix& m) {
    if (m.B() < 2) throw ParameterError("stability needs B >= 2, got " + std::to_string(m.B()));
    StabilityReport r;
    r.lambda = m.lambda();
    r.B = m.B();
    const auto counts = m.column_counts();
    r.phi = phi_from_counts(counts, m.B());
    r.band = classify(r.phi);
    return r;
}

// ---------------------------------------------------------------------------
// Bootstrap intervals

namespace detail {

/// Type-7 sample quantile of sorted data.
inline double quantile_sorted(const std::vector<double>& sorted, double prob) {
    const double h = (static_cast<double>(sorted.size()) - 1.0) * prob;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

/// Percentile interval from n_boot resamples (with replacement) of the
/// first t rows. Replicates with undefined stability are skipped.
inline std::pair<std::optional<double>, std::optional<double>> bootstrap_interval(const SelectionMatrix& m, std::size_t t, double level,
                                                                                  std::size_t n_boot, rng::Engine& eng) {
    std::vector<std::uint64_t> counts(m.p(), 0);
    std::vector<std::uint32_t> touched;
    std::vector<double> reps;
    reps.reserve(n_boot);
    std::uniform_int_distribution<std::size_t> pick(0, t - 1);
    for (std::size_t r = 0; r < n_boot; ++r) {
        std::uint64_t total = 0;
        for (std::size_t k = 0; k < t; ++k) {
            for (auto j : m.row(pick(eng))) {
                if (counts[j]++ == 0) touched.push_back(j);
                ++total;
            }
        }
        std::uint64_t sum_sq = 0;
        for (auto j : touched) {
            sum_sq += counts[j] * counts[j];
            counts[j] = 0;
        }
        touched.clear();
        if (auto phi = phi_from_counts(total, sum_sq, t, m.p())) reps.push_back(*phi);
    }
    if (reps.empty()) return {std::nullopt, std::nullopt};
    std::sort(reps.begin(), reps.end());
    const double alpha = 1.0 - level;
    return {quantile_sorted(reps, alpha / 2.0), quantile_sorted(reps, 1.0 - alpha / 2.0)};
}

inline void check_interval_args(double level, std::size_t n_boot) {
    if (!(level > 0.0 && level < 1.0)) throw ParameterError("confidence level must lie in (0, 1)");
    if (n_boot < 1) throw ParameterError("n_boot must be at least 1");
}

} // namespace detail

struct IntervalOptions {
    double level = 0.95;
    std::size_t n_boot = 1000;
    std::uint64_t seed = 0;
    unsigned threads = 1;
};

/// One report per matrix, in input order. Undefined points are kept and
/// flagged. With `interval` set, each defined point also gets a row
/// bootstrap percentile interval.
inline std::vector<StabilityReport> stability_curve(std::span<const SelectionMatrix> matrices,
                                                    const std::optional<IntervalOptions>& interval = std::nullopt) {
    std::vector<StabilityReport> out(matrices.size());
    if (interval) detail::check_interval_args(interval->level, interval->n_boot);
    parallel_for(matrices.size(), interval ? interval->threads : 1u, [&](std::size_t l) {
        out[l] = estimate_stability(matrices[l]);
        if (interval && out[l].phi) {
            auto eng = rng::engine(interval->seed, rng::streams::bootstrap, static_cast<std::uint64_t>(l));
            std::tie(out[l].ci_low, out[l].ci_high) =
                detail::bootstrap_interval(matrices[l], matrices[l].B(), interval->level, interval->n_boot, eng);
        }
    });
    return out;
}

// ---------------------------------------------------------------------------
// Choosing lambda

enum class ChoiceKind { stable, stable_1sd, none };

inline const char* to_string(ChoiceKind k) {
    switch (k) {
    case ChoiceKind::stable: return "stable";
    case ChoiceKind::stable_1sd: return "stable-1sd";
    case ChoiceKind::none: return "none";
    }
    return "none";
}

struct LambdaChoice {
    ChoiceKind kind = ChoiceKind::none;
    std::optional<double> lambda;
    std::optional<double> phi_at_lambda;
    /// Cutoff the stability had to reach.
    double threshold = 0.0;
};

/// Smallest lambda whose stability reaches `threshold`.
inline LambdaChoice find_lambda_stable(std::span<const StabilityReport> curve, double threshold = kExcellentStability) {
    if (curve.empty()) throw ParameterError("empty stability curve");
    LambdaChoice choice;
    choice.threshold = threshold;
    for (const auto& r : curve) {
        if (!r.phi || *r.phi < threshold) continue;
        if (!choice.lambda || r.lambda < *choice.lambda) {
            choice.kind = ChoiceKind::stable;
            choice.lambda = r.lambda;
            choice.phi_at_lambda = r.phi;
        }
    }
    return choice;
}

/// Smallest lambda whose stability is within one standard deviation
/// (denominator count-1, over the defined points) of the maximum. A slack
/// of 1e-12 absorbs rounding in max - sd.
inline LambdaChoice find_lambda_stable_1sd(std::span<const StabilityReport> curve) {
    std::vector<double> phis;
    for (const auto& r : curve) {
        if (r.phi) phis.push_back(*r.phi);
    }
    if (phis.size() < 2) throw ParameterError("need at least 2 defined stability values, have " + std::to_string(phis.size()));
    const double best = *std::max_element(phis.begin(), phis.end());
    double mean = 0.0;
    for (double v : phis) mean += v;
    mean /= static_cast<double>(phis.size());
    double ss = 0.0;
    for (double v : phis) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(phis.size() - 1));

    LambdaChoice choice;
    choice.threshold = best - sd;
    for (const auto& r : curve) {
        if (!r.phi || *r.phi < choice.threshold - 1e-12) continue;
        if (!choice.lambda || r.lambda < *choice.lambda) {
            choice.kind = ChoiceKind::stable_1sd;
            choice.lambda = r.lambda;
            choice.phi_at_lambda = r.phi;
        }
    }
    return choice;
}

/// lambda_stable when it exists, otherwise lambda_stable-1sd.
inline LambdaChoice choose_lambda(std::span<const StabilityReport> curve, double threshold = kExcellentStability) {
    auto choice = find_lambda_stable(curve, threshold);
    if (choice.kind == ChoiceKind::none) choice = find_lambda_stable_1sd(curve);
    return choice;
}

// ---------------------------------------------------------------------------
// Sequential subsampling

struct ConvergenceTrace {
    double lambda = 0.0;
    std::vector<std::size_t> t_values; // 2..B
    std::vector<std::optional<double>> phi_t;
    std::vector<std::optional<double>> ci_low_t;
    std::vector<std::optional<double>> ci_high_t;
};

/// Stability of the first t rows for t = 2..B, computed from running column
/// counts, plus a bootstrap percentile interval at each t. The interval at t
/// uses the stream (seed, t).
inline ConvergenceTrace convergence_trace(const SelectionMatrix& m, double ci_level = 0.95, std::size_t n_boot = 1000, std::uint64_t seed = 0,
                                          unsigned threads = 1) {
    if (m.B() < 2) throw ParameterError("convergence trace needs B >= 2");
    detail::check_interval_args(ci_level, n_boot);
    ConvergenceTrace trace;
    trace.lambda = m.lambda();
    const std::size_t steps = m.B() - 1;
    trace.t_values.resize(steps);
    trace.phi_t.resize(steps);
    trace.ci_low_t.resize(steps);
    trace.ci_high_t.resize(steps);

    std::vector<std::uint64_t> counts(m.p(), 0);
    std::uint64_t total = 0, sum_sq = 0;
    for (std::size_t b = 0; b < m.B(); ++b) {
        for (auto j : m.row(b)) {
            sum_sq += 2 * counts[j] + 1;
            ++counts[j];
            ++total;
        }
        if (b >= 1) {
            trace.t_values[b - 1] = b + 1;
            trace.phi_t[b - 1] = phi_from_counts(total, sum_sq, b + 1, m.p());
        }
    }

    parallel_for(steps, threads, [&](std::size_t k) {
        const std::size_t t = trace.t_values[k];
        auto eng = rng::engine(seed, rng::streams::bootstrap, static_cast<std::uint64_t>(t));
        std::tie(trace.ci_low_t[k], trace.ci_high_t[k]) = detail::bootstrap_interval(m, t, ci_level, n_boot, eng);
    });
    return trace;
}

/// Smallest t whose next `window` trace values (t included) all lie within
/// eps of phi_t. Windows must fit inside the trace; returns B otherwise.
inline std::size_t suggest_cutoff(const ConvergenceTrace& trace, std::size_t window, double eps) {
    if (window < 2) throw ParameterError("cutoff window must be at least 2");
    if (trace.t_values.empty()) throw ParameterError("empty convergence trace");
    const std::size_t count = trace.phi_t.size();
    for (std::size_t k = 0; k + window <= count; ++k) {
        if (!trace.phi_t[k]) continue;
        const double anchor = *trace.phi_t[k];
        bool ok = true;
        for (std::size_t s = k; s < k + window && ok; ++s) {
            ok = trace.phi_t[s] && std::abs(*trace.phi_t[s] - anchor) <= eps;
        }
        if (ok) return trace.t_values[k];
    }
    return trace.t_values.back();
}

} // namespace stabsel
