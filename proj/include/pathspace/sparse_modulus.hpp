#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include "pathspace/moduli.hpp"
#include "pathspace/paths.hpp"

namespace pathspace {

namespace detail {

/// Value sequence of a step path: V[k] holds on [pos[k], pos[k+1]) with
/// pos[0] = 0 and pos[J+1] = T. A value change at exactly the horizon is
/// dropped: partition cells are half-open, so x(T) is never observed.
struct ValueRuns {
    std::vector<double> pos; // pos[k] = time at which V[k] starts
    std::vector<double> V;
    double T;
};

inline ValueRuns value_runs(const StepPath& x) {
    if (!std::isfinite(x.horizon())) {
        throw std::domain_error("sparse modulus: horizon must be finite");
    }
    ValueRuns r;
    r.T = x.horizon();
    r.pos.push_back(0.0);
    r.V.push_back(x.values().front());
    for (std::size_t idx : x.jump_indices()) {
        const double t = x.breakpoints()[idx];
        if (t >= r.T) break;
        r.pos.push_back(t);
        r.V.push_back(x.values()[idx]);
    }
    return r;
}

/// Can the value indices be grouped into consecutive cells, each of
/// oscillation <= theta, by a partition of [0, T) with all gaps > delta?
/// dp[k] = least possible position of the boundary opening a cell whose
/// first visible value is V[k]. Boundaries sit either strictly inside a
/// value's time interval (both adjacent cells then see that value) or
/// exactly on a jump (the jump transition is then invisible to both cells).
/// All boundary constraints are strict lower bounds, so propagating infima
/// is sound.
inline bool sparse_feasible(const ValueRuns& r, double delta, double theta) {
    const std::size_t J1 = r.V.size(); // number of value runs = J + 1
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> dp(J1, inf);
    dp[0] = 0.0;
    for (std::size_t k = 0; k < J1; ++k) {
        if (dp[k] == inf) continue;
        const double g = dp[k];
        double mn = r.V[k], mx = r.V[k];
        for (std::size_t b = k; b < J1; ++b) {
            mn = std::min(mn, r.V[b]);
            mx = std::max(mx, r.V[b]);
            if (mx - mn > theta) break;
            if (b + 1 == J1) {
                if (g < r.T - delta) return true;
                break;
            }
            // Boundary strictly inside V[b]'s interval: next cell starts by
            // re-seeing V[b].
            if (b > k) {
                const double ng = std::max(g + delta, r.pos[b]);
                if (ng < r.pos[b + 1]) dp[b] = std::min(dp[b], ng);
            }
            // Boundary exactly on the next jump: next cell opens with V[b+1]
            // and the carried value V[b] is hidden.
            if (r.pos[b + 1] > g + delta) dp[b + 1] = std::min(dp[b + 1], r.pos[b + 1]);
        }
    }
    return false;
}

inline double total_oscillation(const std::vector<double>& V) {
    return *std::max_element(V.begin(), V.end()) - *std::min_element(V.begin(), V.end());
}

} // namespace detail

/// Sparse modulus of a step path: inf over partitions of [0, T) with all
/// gaps > delta of the max oscillation within a cell. Exact: the achievable
/// cell oscillations form a finite candidate set (differences of running
/// extrema over consecutive value runs) and feasibility at a threshold is
/// monotone, so a binary search over candidates lands on the infimum.
inline double sparse_modulus_w_prime(const StepPath& x, double delta) {
    const detail::ValueRuns runs = detail::value_runs(x);
    if (!(delta > 0.0) || !(delta < runs.T)) {
        throw std::domain_error("sparse modulus: delta outside (0, horizon)");
    }
    const std::size_t J1 = runs.V.size();
    if (J1 == 1) return 0.0;
    if (J1 <= 1500) {
        std::vector<double> candidates{0.0};
        for (std::size_t k = 0; k < J1; ++k) {
            double mn = runs.V[k], mx = runs.V[k];
            for (std::size_t b = k + 1; b < J1; ++b) {
                mn = std::min(mn, runs.V[b]);
                mx = std::max(mx, runs.V[b]);
                candidates.push_back(mx - mn);
            }
        }
        std::sort(candidates.begin(), candidates.end());
        candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
        std::size_t lo = 0, hi = candidates.size() - 1; // full oscillation is feasible
        while (lo < hi) {
            const std::size_t mid = lo + (hi - lo) / 2;
            if (detail::sparse_feasible(runs, delta, candidates[mid])) hi = mid;
            else lo = mid + 1;
        }
        return candidates[lo];
    }
    // Very many jumps: bisect the threshold instead of materializing the
    // quadratic candidate set. The result is feasible and within 1e-12
    // (absolute, relative to the total oscillation) of the infimum.
    double lo = 0.0, hi = detail::total_oscillation(runs.V);
    if (detail::sparse_feasible(runs, delta, lo)) return lo;
    const double eps = 1e-12 * std::max(1.0, hi);
    while (hi - lo > eps) {
        const double mid = 0.5 * (lo + hi);
        if (detail::sparse_feasible(runs, delta, mid)) hi = mid;
        else lo = mid;
    }
    return hi;
}

/// Sparse-modulus bounds for a continuous piecewise-linear path with
/// partition boundaries restricted to a lattice of the given pitch (knots
/// are always added as admissible boundaries).
struct SparseModulusReport {
    double value;       // lattice-constrained optimum (an upper bound)
    double lower_bound; // relaxed-gap optimum minus the quantization slack
    double upper_bound; // equals value
};

namespace detail {

inline double sparse_lattice_dp(const std::vector<double>& pts, const std::vector<double>& cmax,
                                const std::vector<double>& cmin, double gap) {
    const std::size_t P = pts.size();
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> dp(P, inf);
    dp[0] = 0.0;
    for (std::size_t i = 1; i < P; ++i) {
        double mx = -inf, mn = inf, best = inf;
        for (std::size_t j = i; j-- > 0;) {
            mx = std::max(mx, cmax[j]);
            mn = std::min(mn, cmin[j]);
            if (mx - mn >= best) break; // osc only grows as j recedes
            if (pts[i] - pts[j] > gap && dp[j] != inf) {
                best = std::min(best, std::max(dp[j], mx - mn));
            }
        }
        dp[i] = best;
    }
    return dp[P - 1];
}

} // namespace detail

inline SparseModulusReport sparse_modulus_w_prime_report(const PiecewiseLinearPath& x,
                                                         double delta, double resolution) {
    const double T = x.horizon();
    if (!(delta > 0.0) || !(delta < T)) {
        throw std::domain_error("sparse modulus: delta outside (0, horizon)");
    }
    if (!(resolution > 0.0) || !(resolution < delta)) {
        throw std::domain_error("sparse modulus: resolution outside (0, delta)");
    }
    if (T / resolution > 20000.0) {
        throw std::domain_error("sparse modulus: resolution finer than horizon/20000");
    }

    std::vector<double> pts;
    const std::size_t steps = static_cast<std::size_t>(std::floor(T / resolution));
    for (std::size_t k = 0; k <= steps; ++k) pts.push_back(static_cast<double>(k) * resolution);
    for (double kn : x.knots()) pts.push_back(kn);
    pts.push_back(T);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    while (pts.back() > T) pts.pop_back();

    // Between consecutive merged points the path is affine, so per-cell
    // extrema are endpoint values; oscillation over closed cells equals the
    // half-open convention by continuity.
    const std::size_t P = pts.size();
    std::vector<double> vals(P), cmax(P - 1), cmin(P - 1);
    for (std::size_t i = 0; i < P; ++i) vals[i] = x.eval(pts[i]);
    for (std::size_t i = 0; i + 1 < P; ++i) {
        cmax[i] = std::max(vals[i], vals[i + 1]);
        cmin[i] = std::min(vals[i], vals[i + 1]);
    }

    const double upper = detail::sparse_lattice_dp(pts, cmax, cmin, delta);
    double lower = 0.0;
    if (delta - resolution > 0.0) {
        const double relaxed = detail::sparse_lattice_dp(pts, cmax, cmin, delta - resolution);
        lower = std::max(0.0, relaxed - 2.0 * modulus(x, resolution));
    }
    lower = std::min(lower, upper);
    return SparseModulusReport{upper, lower, upper};
}

inline double sparse_modulus_w_prime(const PiecewiseLinearPath& x, double delta,
                                     double resolution) {
    return sparse_modulus_w_prime_report(x, delta, resolution).value;
}

inline double sparse_modulus_w_prime(const AnyPath& x, double delta, double resolution) {
    if (const StepPath* sp = std::get_if<StepPath>(&x)) return sparse_modulus_w_prime(*sp, delta);
    if (const PiecewiseLinearPath* pl = std::get_if<PiecewiseLinearPath>(&x)) {
        return sparse_modulus_w_prime(*pl, delta, resolution);
    }
    throw std::domain_error("sparse modulus: unsupported path kind");
}

} // namespace pathspace
