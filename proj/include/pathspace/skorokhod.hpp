#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "pathspace/metrics.hpp"
#include "pathspace/paths.hpp"

namespace pathspace {

namespace detail {

/// Jump decomposition of a step path: positions a[1..p] (strictly increasing,
/// in (0, T]) where the value actually changes, and region values X[0..p]
/// (X[i] holds between the i-th and (i+1)-th jump).
struct JumpView {
    std::vector<double> a; // a[0] = 0 sentinel; a[1..p] jump positions
    std::vector<double> X; // X[0..p] region values
    double T;

    std::size_t p() const { return a.size() - 1; }

    /// Right end of region i as a closed bound for placements inside [0, T].
    double region_hi(std::size_t i) const {
        return i + 1 < a.size() ? std::min(a[i + 1], T) : T;
    }
};

inline JumpView jump_view(const StepPath& x) {
    JumpView v;
    v.T = x.horizon();
    v.a.push_back(0.0);
    v.X.push_back(x.values().front());
    for (std::size_t idx : x.jump_indices()) {
        v.a.push_back(x.breakpoints()[idx]);
        v.X.push_back(x.values()[idx]);
    }
    return v;
}

inline void require_distance_inputs(const StepPath& x, const StepPath& y, double tol) {
    if (tol < 0.0) throw std::domain_error("skorokhod distance: negative tolerance");
    if (!(std::isfinite(x.horizon()) && x.horizon() == y.horizon())) {
        throw std::domain_error("skorokhod distance: horizons must be equal and finite");
    }
    for (double v : x.values()) {
        if (!std::isfinite(v)) throw std::domain_error("skorokhod distance: non-finite value");
    }
    for (double v : y.values()) {
        if (!std::isfinite(v)) throw std::domain_error("skorokhod distance: non-finite value");
    }
}

/// Result of the jump-alignment dynamic program: the exact distance, plus a
/// deterministic optimal alignment for witness construction. `pairs` holds
/// (time in x, time in y) for every y-jump (matched ones sit exactly on an
/// x-jump), in increasing y order.
struct AlignmentResult {
    double value = 0.0;
    std::vector<std::pair<double, double>> matched;   // (a_i, b_j) of matched jumps
    std::vector<std::pair<double, double>> placements; // (c_j, b_j) for all y-jumps
};

/// Exact Skorokhod J1 distance between step paths by dynamic programming
/// over jump interleavings. State (i, j): i x-jumps and j y-jumps processed;
/// the frontier region carries |X_i - Y_j|. Moves: skip an x-jump (free),
/// place a y-jump inside the current x-region (time cost = distance from its
/// original position to the region's closure), or match a pair of jumps at
/// the x-jump's time (time cost = time offset). Infima over open placement
/// regions are realized in the closure; coincidences are covered exactly by
/// the matched move, so the minimum over all lattice paths is the true
/// infimum over reparametrizations.
inline AlignmentResult skorokhod_alignment(const JumpView& x, const JumpView& y) {
    const std::size_t p = x.p(), q = y.p();
    const double T = x.T;
    const double inf = std::numeric_limits<double>::infinity();
    const std::size_t W = q + 1;
    auto id = [W](std::size_t i, std::size_t j) { return i * W + j; };
    auto vertex = [&](std::size_t i, std::size_t j) { return std::abs(x.X[i] - y.X[j]); };
    auto vcost = [&](std::size_t i, std::size_t j) {
        // y-jump j dropped into x-region i (closure of the open region).
        const double b = y.a[j];
        return std::max({0.0, x.a[i] - b, b - x.region_hi(i)});
    };
    auto vert_ok = [&](std::size_t i, std::size_t j) { return y.a[j] < T || i == p; };
    auto diag_ok = [&](std::size_t i, std::size_t j) {
        return (x.a[i] < T && y.a[j] < T) || (x.a[i] == T && y.a[j] == T);
    };

    std::vector<double> D((p + 1) * (q + 1), inf);
    D[id(0, 0)] = vertex(0, 0);
    for (std::size_t i = 0; i <= p; ++i) {
        for (std::size_t j = 0; j <= q; ++j) {
            if (i == 0 && j == 0) continue;
            double best = inf;
            if (i > 0) best = std::min(best, std::max(D[id(i - 1, j)], vertex(i, j)));
            if (j > 0 && vert_ok(i, j)) {
                best = std::min(best, std::max({D[id(i, j - 1)], vertex(i, j), vcost(i, j)}));
            }
            if (i > 0 && j > 0 && diag_ok(i, j)) {
                best = std::min(best, std::max({D[id(i - 1, j - 1)], vertex(i, j),
                                                std::abs(x.a[i] - y.a[j])}));
            }
            D[id(i, j)] = best;
        }
    }
    const double total = D[id(p, q)];

    // Minimum number of matched jumps over alignments achieving `total`:
    // every individual charge along an optimal lattice path is <= total.
    const std::size_t big = (p + 1) * (q + 1) + 1;
    std::vector<std::size_t> C((p + 1) * (q + 1), big);
    C[id(p, q)] = 0;
    for (std::size_t i = p + 1; i-- > 0;) {
        for (std::size_t j = q + 1; j-- > 0;) {
            if (i == p && j == q) continue;
            std::size_t best = big;
            if (i < p && vertex(i + 1, j) <= total) best = std::min(best, C[id(i + 1, j)]);
            if (j < q && vert_ok(i, j + 1) && vertex(i, j + 1) <= total &&
                vcost(i, j + 1) <= total) {
                best = std::min(best, C[id(i, j + 1)]);
            }
            if (i < p && j < q && diag_ok(i + 1, j + 1) && vertex(i + 1, j + 1) <= total &&
                std::abs(x.a[i + 1] - y.a[j + 1]) <= total) {
                if (C[id(i + 1, j + 1)] != big) best = std::min(best, C[id(i + 1, j + 1)] + 1);
            }
            C[id(i, j)] = best;
        }
    }

    // Deterministic walk: among moves consistent with the optimal value and
    // the minimal match count, prefer matching now, then an unmatched y-jump,
    // then an unmatched x-jump (earliest matched pairs win ties).
    AlignmentResult out;
    out.value = total;
    std::size_t i = 0, j = 0;
    std::size_t remaining = C[id(0, 0)];
    while (i < p || j < q) {
        if (i < p && j < q && diag_ok(i + 1, j + 1) && vertex(i + 1, j + 1) <= total &&
            std::abs(x.a[i + 1] - y.a[j + 1]) <= total && C[id(i + 1, j + 1)] != big &&
            C[id(i + 1, j + 1)] + 1 == remaining) {
            out.matched.emplace_back(x.a[i + 1], y.a[j + 1]);
            out.placements.emplace_back(x.a[i + 1], y.a[j + 1]);
            ++i, ++j;
            --remaining;
            continue;
        }
        if (j < q && vert_ok(i, j + 1) && vertex(i, j + 1) <= total && vcost(i, j + 1) <= total &&
            C[id(i, j + 1)] == remaining) {
            const double b = y.a[j + 1];
            const double c = std::clamp(b, x.a[i], x.region_hi(i));
            out.placements.emplace_back(c, b);
            ++j;
            continue;
        }
        if (i < p && vertex(i + 1, j) <= total && C[id(i + 1, j)] == remaining) {
            ++i;
            continue;
        }
        throw std::runtime_error("skorokhod distance: alignment walk lost the optimum");
    }
    return out;
}

/// Strictly increasing reparametrization through the placement pairs,
/// nudging coincident times apart; the nudges keep the witness cost within a
/// hair of the exact value.
inline std::optional<Reparametrization> witness_from_placements(
    const std::vector<std::pair<double, double>>& placements, double T) {
    std::vector<double> ks{0.0}, vs{0.0};
    const double step = T * 0x1.0p-40;
    std::size_t remaining = placements.size();
    for (const auto& [c, b] : placements) {
        --remaining;
        if (b >= T) continue; // a y-jump at the horizon is pinned to (T, T)
        const double ceiling = T - static_cast<double>(remaining + 1) * step;
        const double fixed = std::min(std::max(c, ks.back() + step), ceiling);
        if (!(fixed > ks.back()) || !(b > vs.back())) return std::nullopt;
        ks.push_back(fixed);
        vs.push_back(b);
    }
    ks.push_back(T);
    vs.push_back(T);
    try {
        return Reparametrization(std::move(ks), std::move(vs));
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

} // namespace detail

/// Exact Skorokhod J1 distance between step paths on a common finite
/// horizon: inf over increasing bijections lambda of
/// max(sup |lambda(t) - t|, sup |x(t) - y(lambda(t))|).
inline MetricReport skorokhod_distance(const StepPath& x, const StepPath& y, double tol) {
    detail::require_distance_inputs(x, y, tol);
    const detail::JumpView xv = detail::jump_view(x);
    const detail::JumpView yv = detail::jump_view(y);
    detail::AlignmentResult r = detail::skorokhod_alignment(xv, yv);
    MetricReport report = MetricReport::exact(r.value);
    report.witness = detail::witness_from_placements(r.placements, xv.T);
    return report;
}

namespace detail {

inline double log_slope_cost(const Reparametrization& lam, const StepPath& x, const StepPath& y) {
    return std::max(lam.log_slope_norm(),
                    uniform_distance(AnyPath(x), AnyPath(apply_reparam(y, lam))));
}

/// Builds the reparametrization that is linear between matched jump pairs
/// (and the endpoints); returns nullopt when a pair is incompatible with a
/// strictly increasing bijection fixing the horizon.
inline std::optional<Reparametrization> matching_reparam(
    const std::vector<std::pair<double, double>>& matched, double T) {
    std::vector<double> ks{0.0}, vs{0.0};
    for (const auto& [a, b] : matched) {
        if (a == T && b == T) continue;
        if (a >= T || b >= T) return std::nullopt;
        if (!(a > ks.back()) || !(b > vs.back())) return std::nullopt;
        ks.push_back(a);
        vs.push_back(b);
    }
    ks.push_back(T);
    vs.push_back(T);
    return Reparametrization(std::move(ks), std::move(vs));
}

} // namespace detail

/// Variant of the Skorokhod distance whose time penalty is the maximal
/// absolute log-slope of the reparametrization. Returns a certified upper
/// bound: the best candidate over reparametrizations that are linear between
/// matched jump pairs (all order-preserving matchings when that family is
/// small, otherwise the alignment chosen by the exact distance plus every
/// single-pair matching). The lower bound inverts
/// d <= max(T(e^s - 1), s) at s = true value.
inline MetricReport skorokhod_circ_distance(const StepPath& x, const StepPath& y, double tol) {
    detail::require_distance_inputs(x, y, tol);
    const detail::JumpView xv = detail::jump_view(x);
    const detail::JumpView yv = detail::jump_view(y);
    const double T = xv.T;

    double upper = std::numeric_limits<double>::infinity();
    std::optional<Reparametrization> best_rep;
    auto consider = [&](const std::optional<Reparametrization>& rep) {
        if (!rep) return;
        const double c = detail::log_slope_cost(*rep, x, y);
        if (c < upper) {
            upper = c;
            best_rep = rep;
        }
    };

    consider(Reparametrization::identity(T));

    detail::AlignmentResult aligned = detail::skorokhod_alignment(xv, yv);
    consider(detail::matching_reparam(aligned.matched, T));

    const std::size_t p = xv.p(), q = yv.p();
    std::size_t budget = 200000;
    std::vector<std::pair<double, double>> stack;
    // Depth-first enumeration of order-preserving matchings (every prefix is
    // itself a matching, so each node is evaluated).
    auto enumerate = [&](auto&& self, std::size_t i0, std::size_t j0) -> bool {
        for (std::size_t i = i0; i <= p; ++i) {
            for (std::size_t j = j0; j <= q; ++j) {
                if (budget == 0) return false;
                --budget;
                stack.emplace_back(xv.a[i], yv.a[j]);
                consider(detail::matching_reparam(stack, T));
                const bool ok = self(self, i + 1, j + 1);
                stack.pop_back();
                if (!ok) return false;
            }
        }
        return true;
    };
    const bool exhaustive = enumerate(enumerate, 1, 1);
    if (!exhaustive && p * q <= 4096) {
        for (std::size_t i = 1; i <= p; ++i) {
            for (std::size_t j = 1; j <= q; ++j) {
                consider(detail::matching_reparam({{xv.a[i], yv.a[j]}}, T));
            }
        }
    }

    const double d = aligned.value;
    const double lower = std::min({d, std::log1p(d / T), upper});
    MetricReport report;
    report.value = upper;
    report.lower_bound = lower;
    report.upper_bound = upper;
    report.witness = best_rep;
    return report;
}

} // namespace pathspace
