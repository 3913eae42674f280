#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "pathspace/paths.hpp"

namespace pathspace {

/// Result of a metric evaluation. Exact computations report
/// lower_bound == value == upper_bound; bounded computations bracket the true
/// quantity and set value to the certified side. The witness, when present,
/// is the time change achieving (or approaching) the reported value.
struct MetricReport {
    double value = 0.0;
    double lower_bound = 0.0;
    double upper_bound = 0.0;
    std::optional<Reparametrization> witness;

    static MetricReport exact(double v) { return MetricReport{v, v, v, std::nullopt}; }
};

namespace detail {

/// Event times at which a path can change its affine behaviour. Between
/// consecutive events every supported path kind is affine, so suprema of
/// pairwise differences are attained at events or at their left limits.
inline std::vector<double> path_events(const AnyPath& p) {
    std::vector<double> ev;
    if (const StepPath* sp = std::get_if<StepPath>(&p)) {
        ev = sp->breakpoints();
        if (!sp->infinite_horizon()) ev.push_back(sp->horizon());
    } else if (const PiecewiseLinearPath* pl = std::get_if<PiecewiseLinearPath>(&p)) {
        ev = pl->knots();
    } else {
        const TaperedStepPath& tp = std::get<TaperedStepPath>(p);
        const double h = tp.horizon();
        for (double b : tp.base().breakpoints()) {
            if (b <= h) ev.push_back(b);
        }
        const double m = tp.profile().m();
        if (m - 1.0 > 0.0 && m - 1.0 < h) ev.push_back(m - 1.0);
        ev.push_back(h);
    }
    return ev;
}

inline double left_value(const AnyPath& p, double t) {
    if (const StepPath* sp = std::get_if<StepPath>(&p)) return sp->left_limit(t);
    if (const PiecewiseLinearPath* pl = std::get_if<PiecewiseLinearPath>(&p)) return pl->eval(t);
    return std::get<TaperedStepPath>(p).left_limit(t);
}

} // namespace detail

/// Sup-norm distance between two paths over their common domain [0, T]
/// (or [0, inf) for two frozen-tail step paths). Exact: both paths are affine
/// between the merged event times, so the supremum is attained at an event or
/// at an event's left limit.
inline double uniform_distance(const AnyPath& x, const AnyPath& y) {
    const double hx = path_horizon(x);
    const double hy = path_horizon(y);
    if (hx != hy) {
        throw std::domain_error("uniform_distance: horizons must agree");
    }
    std::vector<double> events = detail::path_events(x);
    {
        std::vector<double> ey = detail::path_events(y);
        events.insert(events.end(), ey.begin(), ey.end());
    }
    std::sort(events.begin(), events.end());
    events.erase(std::unique(events.begin(), events.end()), events.end());

    double best = 0.0;
    for (double e : events) {
        best = std::max(best, std::abs(path_eval(x, e) - path_eval(y, e)));
        if (e > 0.0) {
            best = std::max(best, std::abs(detail::left_value(x, e) - detail::left_value(y, e)));
        }
    }
    return best;
}

inline double uniform_distance(const StepPath& x, const StepPath& y) {
    return uniform_distance(AnyPath(x), AnyPath(y));
}

inline double uniform_distance(const PiecewiseLinearPath& x, const PiecewiseLinearPath& y) {
    return uniform_distance(AnyPath(x), AnyPath(y));
}

} // namespace pathspace
