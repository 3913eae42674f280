#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <stdexcept>
#include <vector>

#include "pathspace/metrics.hpp"
#include "pathspace/paths.hpp"

namespace pathspace {

/// Closed observation window [lo, hi] inside a path's domain.
struct Window {
    double lo;
    double hi;

    Window(double lo_, double hi_) : lo(lo_), hi(hi_) {
        if (!(lo_ >= 0.0) || !(hi_ > lo_)) {
            throw std::domain_error("Window: need 0 <= lo < hi");
        }
    }
};

namespace detail {

/// A maximal constancy interval of a step path clipped to a window.
/// The set is [lo, hi) unless hi_attained, in which case it is [lo, hi].
struct ClippedSegment {
    double lo;
    double hi;
    bool hi_attained;
    double v;
};

inline std::vector<ClippedSegment> clipped_segments(const StepPath& x, double w0, double w1) {
    if (w0 < 0.0 || (std::isfinite(x.horizon()) && w1 > x.horizon()) || !(w0 < w1)) {
        throw std::domain_error("step segments: window outside the path domain");
    }
    const auto& bs = x.breakpoints();
    const auto& vs = x.values();
    const std::size_t n = bs.size();
    std::vector<ClippedSegment> out;
    for (std::size_t k = 0; k < n; ++k) {
        const double seg_lo = bs[k];
        const bool last = (k + 1 == n);
        const double seg_hi = last ? x.horizon() : bs[k + 1]; // may be +inf
        // The segment as a set: [seg_lo, seg_hi) for interior segments, and
        // [seg_lo, horizon] (closed) for the final one on a finite horizon.
        const double lo = std::max(seg_lo, w0);
        const double hi = std::min(seg_hi, w1);
        bool attained;
        if (last && std::isfinite(x.horizon()) && x.horizon() <= w1) {
            attained = true; // closed right end of the path domain
        } else {
            attained = (w1 < seg_hi); // window cuts strictly inside the segment
        }
        const bool nonempty = attained ? (lo <= hi) : (lo < hi);
        if (nonempty) out.push_back({lo, hi, attained, vs[k]});
    }
    return out;
}

/// Can t1 in segment i and t2 in segment j (i <= j) be chosen with
/// t2 - t1 <= delta? The gap infimum lo_j - hi_i is attained only when the
/// earlier segment contains its supremum.
inline bool pair_feasible(const std::vector<ClippedSegment>& s, std::size_t i, std::size_t j,
                          double delta) {
    if (i >= j) return true;
    const double gap = s[j].lo - s[i].hi;
    return gap < delta || (s[i].hi_attained && gap <= delta);
}

/// Range-min/max over a value array with O(1) queries (sparse table).
class RangeMinMax {
  public:
    explicit RangeMinMax(const std::vector<double>& v) {
        const std::size_t n = v.size();
        levels_ = 1;
        while ((std::size_t{1} << levels_) <= n) ++levels_;
        mins_.assign(levels_, v);
        maxs_.assign(levels_, v);
        for (std::size_t l = 1; l < levels_; ++l) {
            const std::size_t half = std::size_t{1} << (l - 1);
            for (std::size_t i = 0; i + (std::size_t{1} << l) <= n; ++i) {
                mins_[l][i] = std::min(mins_[l - 1][i], mins_[l - 1][i + half]);
                maxs_[l][i] = std::max(maxs_[l - 1][i], maxs_[l - 1][i + half]);
            }
        }
    }

    double min(std::size_t lo, std::size_t hi) const { // inclusive range
        const std::size_t l = level_for(hi - lo + 1);
        return std::min(mins_[l][lo], mins_[l][hi + 1 - (std::size_t{1} << l)]);
    }

    double max(std::size_t lo, std::size_t hi) const {
        const std::size_t l = level_for(hi - lo + 1);
        return std::max(maxs_[l][lo], maxs_[l][hi + 1 - (std::size_t{1} << l)]);
    }

  private:
    static std::size_t level_for(std::size_t len) {
        std::size_t l = 0;
        while ((std::size_t{2} << l) <= len) ++l;
        return l;
    }

    std::size_t levels_;
    std::vector<std::vector<double>> mins_;
    std::vector<std::vector<double>> maxs_;
};

} // namespace detail

/// sup of |x(t2) - x(t1)| over 0 <= t1 <= t2 <= t1 + delta (closed
/// constraint). Exact for step paths: the supremum over a pair of constancy
/// segments is their value gap, available whenever the segments come within
/// delta of each other.
inline double modulus(const StepPath& x, double delta) {
    if (!(delta > 0.0)) throw std::domain_error("modulus: delta must be positive");
    if (std::isfinite(x.horizon()) && delta > x.horizon()) {
        throw std::domain_error("modulus: delta beyond horizon");
    }
    const double w1 = std::isfinite(x.horizon()) ? x.horizon()
                                                 : x.breakpoints().back() + 1.0;
    const auto segs = detail::clipped_segments(x, 0.0, w1);
    const std::size_t n = segs.size();
    std::deque<std::size_t> maxdq, mindq;
    double best = 0.0;
    std::size_t i = 0;
    for (std::size_t j = 0; j < n; ++j) {
        while (!maxdq.empty() && segs[maxdq.back()].v <= segs[j].v) maxdq.pop_back();
        maxdq.push_back(j);
        while (!mindq.empty() && segs[mindq.back()].v >= segs[j].v) mindq.pop_back();
        mindq.push_back(j);
        while (i < j && !detail::pair_feasible(segs, i, j, delta)) ++i;
        while (maxdq.front() < i) maxdq.pop_front();
        while (mindq.front() < i) mindq.pop_front();
        best = std::max({best, segs[j].v - segs[mindq.front()].v,
                         segs[maxdq.front()].v - segs[j].v});
    }
    return best;
}

/// Exact modulus for a continuous piecewise-linear path: the optimum pins
/// each endpoint at a knot or exactly delta away from one.
inline double modulus(const PiecewiseLinearPath& x, double delta) {
    if (!(delta > 0.0) || delta > x.horizon()) {
        throw std::domain_error("modulus: delta outside (0, horizon]");
    }
    const auto& ks = x.knots();
    const auto& vs = x.values();
    const std::size_t n = ks.size();
    double best = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n && ks[j] - ks[i] <= delta; ++j) {
            best = std::max(best, std::abs(vs[j] - vs[i]));
        }
        const double up = ks[i] + delta;
        if (up <= x.horizon()) best = std::max(best, std::abs(x.eval(up) - vs[i]));
        const double dn = ks[i] - delta;
        if (dn >= 0.0) best = std::max(best, std::abs(vs[i] - x.eval(dn)));
    }
    return best;
}

inline double modulus(const AnyPath& x, double delta) {
    if (const StepPath* sp = std::get_if<StepPath>(&x)) return modulus(*sp, delta);
    if (const PiecewiseLinearPath* pl = std::get_if<PiecewiseLinearPath>(&x)) return modulus(*pl, delta);
    throw std::domain_error("modulus: unsupported path kind");
}

/// Two-sided oscillation sup min(|x(t2) - x(t)|, |x(t) - x(t1)|) over
/// t1 <= t <= t2, t2 - t1 <= delta, all inside the window. Exact for step
/// paths by a scan over segment triples: the middle segment ranges between
/// the outer pair, whose feasibility depends only on the pair.
inline double two_sided_modulus(const StepPath& x, double delta, const Window& w) {
    if (!(delta > 0.0)) throw std::domain_error("two_sided_modulus: delta must be positive");
    const auto segs = detail::clipped_segments(x, w.lo, w.hi);
    const std::size_t n = segs.size();
    if (n <= 2) {
        // With at most two value levels the smaller side of every triple is 0.
        return 0.0;
    }
    std::vector<double> vals(n);
    for (std::size_t k = 0; k < n; ++k) vals[k] = segs[k].v;
    const detail::RangeMinMax rmq(vals);

    // imin[j]: least i that can serve as the left end of a feasible pair.
    std::vector<std::size_t> imin(n);
    {
        std::size_t i = 0;
        for (std::size_t j = 0; j < n; ++j) {
            while (i < j && !detail::pair_feasible(segs, i, j, delta)) ++i;
            imin[j] = i;
        }
    }

    double best = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t j = k; j < n && imin[j] <= k; ++j) {
            const double right = std::abs(vals[j] - vals[k]);
            if (right <= best) continue; // min(left, right) cannot beat best
            const std::size_t lo = imin[j];
            const double left =
                std::max(vals[k] - rmq.min(lo, k), rmq.max(lo, k) - vals[k]);
            best = std::max(best, std::min(left, right));
        }
    }
    return best;
}

namespace detail {

/// One linear piece of the "nearest time at level z" profile around a knot.
/// Covers z in (z_lo, z_hi]; the crossing time is affine in z along the
/// original path segment (tA, vA) -> (tB, vB).
struct ReachPiece {
    double z_lo, z_hi;
    double tA, vA, tB, vB;

    double time_at(double z) const { return tA + (z - vA) * (tB - tA) / (vB - vA); }
};

/// Reach profiles for the valley term of the two-sided oscillation of a
/// continuous path: how far one must travel from knot u, to the left and to
/// the right, to regain level z.
inline std::vector<ReachPiece> left_reach(const std::vector<double>& ks,
                                          const std::vector<double>& vs, std::size_t u) {
    std::vector<ReachPiece> out;
    double running = vs[u];
    for (std::size_t i = u; i-- > 0;) {
        if (vs[i] > running) {
            out.push_back({running, vs[i], ks[i], vs[i], ks[i + 1], vs[i + 1]});
            running = vs[i];
        }
    }
    return out;
}

inline std::vector<ReachPiece> right_reach(const std::vector<double>& ks,
                                           const std::vector<double>& vs, std::size_t u) {
    std::vector<ReachPiece> out;
    double running = vs[u];
    for (std::size_t i = u + 1; i < ks.size(); ++i) {
        if (vs[i] > running) {
            out.push_back({running, vs[i], ks[i - 1], vs[i - 1], ks[i], vs[i]});
            running = vs[i];
        }
    }
    return out;
}

/// Largest z such that the path reaches level z within delta on both sides of
/// knot u (including u itself at level x(u)). The gap between the two reach
/// times is nondecreasing in z, so the scan walks the merged piece lists
/// upward and stops at the first crossing of delta.
inline double valley_height(const std::vector<double>& ks, const std::vector<double>& vs,
                            std::size_t u, double delta) {
    const auto lp = left_reach(ks, vs, u);
    const auto rp = right_reach(ks, vs, u);
    double z = vs[u];
    double zstar = vs[u];
    std::size_t li = 0, ri = 0;
    double L = ks[u], R = ks[u];
    while (li < lp.size() || ri < rp.size()) {
        // Active pieces covering z just above the current level.
        const ReachPiece* l = (li < lp.size() && lp[li].z_hi > z) ? &lp[li] : nullptr;
        const ReachPiece* r = (ri < rp.size() && rp[ri].z_hi > z) ? &rp[ri] : nullptr;
        if (li < lp.size() && !l && lp[li].z_hi <= z) { ++li; continue; }
        if (ri < rp.size() && !r && rp[ri].z_hi <= z) { ++ri; continue; }
        // One side exhausted: z cannot grow further on both sides.
        if ((li >= lp.size() && !l) || (ri >= rp.size() && !r)) break;

        const double z_b = std::min(l ? l->z_hi : rp[ri].z_hi, r ? r->z_hi : lp[li].z_hi);
        const double Lb = l ? l->time_at(z_b) : L;
        const double Rb = r ? r->time_at(z_b) : R;
        if (Rb - Lb <= delta) {
            zstar = z_b;
            z = z_b;
            L = Lb;
            R = Rb;
            if (l && l->z_hi == z_b) ++li;
            if (r && r->z_hi == z_b) ++ri;
            continue;
        }
        // The crossing gap(z*) = delta lies inside this z-interval.
        const double La = l ? l->time_at(z) : L;
        const double Ra = r ? r->time_at(z) : R;
        const double gap_a = Ra - La;
        if (gap_a > delta) break; // discontinuous jump above delta at z
        const double gap_b = Rb - Lb;
        if (gap_b > gap_a) {
            zstar = z + (delta - gap_a) * (z_b - z) / (gap_b - gap_a);
        } else {
            zstar = z_b;
        }
        break;
    }
    return zstar;
}

} // namespace detail

/// Exact two-sided oscillation for a continuous piecewise-linear path.
/// Decomposes as the maximum of a chord term (half the plain modulus) and
/// valley/peak terms: the deepest dip below (rise above) two flanking levels
/// reachable within a delta window.
inline double two_sided_modulus(const PiecewiseLinearPath& x, double delta, const Window& w) {
    if (!(delta > 0.0)) throw std::domain_error("two_sided_modulus: delta must be positive");
    if (w.hi > x.horizon()) throw std::domain_error("two_sided_modulus: window beyond horizon");
    PiecewiseLinearPath clipped = x;
    if (w.lo > 0.0 || w.hi < x.horizon()) {
        // Shift the window to the origin: restrict from the right, then
        // rebuild from the left cut.
        PiecewiseLinearPath right = x.restrict(w.hi);
        std::vector<double> ks, vs;
        ks.push_back(0.0);
        vs.push_back(right.eval(w.lo));
        for (std::size_t i = 0; i < right.knots().size(); ++i) {
            if (right.knots()[i] > w.lo) {
                ks.push_back(right.knots()[i] - w.lo);
                vs.push_back(right.values()[i]);
            }
        }
        clipped = PiecewiseLinearPath(std::move(ks), std::move(vs));
    }

    const auto& ks = clipped.knots();
    const auto& vs = clipped.values();
    double best = modulus(clipped, std::min(delta, clipped.horizon())) * 0.5;
    std::vector<double> neg(vs.size());
    for (std::size_t i = 0; i < vs.size(); ++i) neg[i] = -vs[i];
    for (std::size_t u = 1; u + 1 < ks.size(); ++u) {
        best = std::max(best, detail::valley_height(ks, vs, u, delta) - vs[u]);
        best = std::max(best, detail::valley_height(ks, neg, u, delta) - neg[u]);
    }
    return best;
}

inline double two_sided_modulus(const StepPath& x, double delta) {
    if (!std::isfinite(x.horizon())) {
        throw std::domain_error("two_sided_modulus: infinite horizon requires an explicit window");
    }
    return two_sided_modulus(x, delta, Window(0.0, x.horizon()));
}

inline double two_sided_modulus(const PiecewiseLinearPath& x, double delta) {
    return two_sided_modulus(x, delta, Window(0.0, x.horizon()));
}

inline double two_sided_modulus(const AnyPath& x, double delta) {
    if (const StepPath* sp = std::get_if<StepPath>(&x)) return two_sided_modulus(*sp, delta);
    if (const PiecewiseLinearPath* pl = std::get_if<PiecewiseLinearPath>(&x)) {
        return two_sided_modulus(*pl, delta);
    }
    throw std::domain_error("two_sided_modulus: unsupported path kind");
}

/// sup |x(t)| over a window; exact via events and left limits.
inline double sup_abs(const AnyPath& x, const Window& w) {
    const double hz = path_horizon(x);
    if (std::isfinite(hz) && w.hi > hz) throw std::domain_error("sup_abs: window beyond horizon");
    std::vector<double> events;
    if (const StepPath* sp = std::get_if<StepPath>(&x)) {
        events = sp->breakpoints();
    } else if (const PiecewiseLinearPath* pl = std::get_if<PiecewiseLinearPath>(&x)) {
        events = pl->knots();
    } else {
        const TaperedStepPath& tp = std::get<TaperedStepPath>(x);
        events = tp.base().breakpoints();
        if (tp.profile().m() - 1.0 > 0.0) events.push_back(tp.profile().m() - 1.0);
    }
    double best = std::max(std::abs(path_eval(x, w.lo)), std::abs(path_eval(x, w.hi)));
    for (double e : events) {
        if (e <= w.lo || e >= w.hi) continue;
        best = std::max({best, std::abs(path_eval(x, e)), std::abs(detail::left_value(x, e))});
    }
    return best;
}

inline double sup_abs(const AnyPath& x) {
    const double hz = path_horizon(x);
    if (!std::isfinite(hz)) {
        const StepPath& sp = std::get<StepPath>(x);
        double best = 0.0;
        for (double v : sp.values()) best = std::max(best, std::abs(v));
        return best;
    }
    return sup_abs(x, Window(0.0, hz));
}

/// (|x(delta) - x(0)|, |x(penultimate knot) - x(T - delta)|, sup |x|):
/// the boundary-behaviour statistics paired with the two-sided oscillation.
struct EndpointStats {
    double initial_increment;
    double penultimate_increment;
    double sup_norm;
};

inline EndpointStats endpoint_statistics(const AnyPath& x, double delta) {
    const double T = path_horizon(x);
    if (!std::isfinite(T)) {
        throw std::domain_error("endpoint_statistics: horizon must be finite");
    }
    if (!(delta > 0.0) || !(delta < T)) {
        throw std::domain_error("endpoint_statistics: delta outside (0, horizon)");
    }
    const std::vector<double>* grid = nullptr;
    if (const StepPath* sp = std::get_if<StepPath>(&x)) grid = &sp->breakpoints();
    else if (const PiecewiseLinearPath* pl = std::get_if<PiecewiseLinearPath>(&x)) grid = &pl->knots();
    else grid = &std::get<TaperedStepPath>(x).base().breakpoints();
    const double penult = grid->size() >= 2 ? (*grid)[grid->size() - 2] : grid->front();

    EndpointStats out;
    out.initial_increment = std::abs(path_eval(x, delta) - path_eval(x, 0.0));
    out.penultimate_increment = std::abs(path_eval(x, penult) - path_eval(x, T - delta));
    out.sup_norm = sup_abs(x);
    return out;
}

} // namespace pathspace
