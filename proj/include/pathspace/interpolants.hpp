#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include "pathspace/moduli.hpp"
#include "pathspace/paths.hpp"

namespace pathspace {

/// Barycentric weights of t within its cell of the dyadic grid with
/// d = 2^level cells on [0, 1]: a = d((floor(td)+1)/d - t), b = d(t - floor(td)/d).
/// Scaling by a power of two is exact, so b is the exact fractional part of
/// t*d and a + b evaluates to exactly 1.
struct InterpolationWeights {
    double t;
    double a;
    double b;
    int level;
};

inline InterpolationWeights interpolation_weights(double t, int level) {
    if (!(t >= 0.0) || !(t <= 1.0)) {
        throw std::domain_error("interpolation_weights: t outside [0, 1]");
    }
    if (level < 0 || level > 40) {
        throw std::domain_error("interpolation_weights: level outside [0, 40]");
    }
    const double u = std::ldexp(t, level); // t * 2^level, exact
    const double d = std::ldexp(1.0, level);
    double k = std::floor(u);
    if (k >= d) k = d; // t == 1: the formula degenerates to the last grid value
    const double b = (k >= d) ? 0.0 : u - k;
    return InterpolationWeights{t, 1.0 - b, b, level};
}

/// A finite time series viewed as an infinite one: indices 1..n return the
/// stored values, every later index returns 0.
class PaddedTimeSeries {
  public:
    explicit PaddedTimeSeries(std::vector<double> y) : y_(std::move(y)) {}

    std::size_t length() const { return y_.size(); }

    /// 1-based lookup; indices beyond the stored range give 0.
    double at(std::size_t index) const {
        return (index >= 1 && index <= y_.size()) ? y_[index - 1] : 0.0;
    }

  private:
    std::vector<double> y_;
};

inline PaddedTimeSeries pad_time_series(std::vector<double> y) {
    return PaddedTimeSeries(std::move(y));
}

/// Piecewise-linear path on the grid {k/d} of [0, 1] through the d+1 given
/// values; a single value yields the constant path.
inline PiecewiseLinearPath linear_interpolant(const std::vector<double>& z) {
    if (z.empty()) throw std::invalid_argument("linear_interpolant: empty value vector");
    if (z.size() == 1) return PiecewiseLinearPath({0.0, 1.0}, {z[0], z[0]});
    const double d = static_cast<double>(z.size() - 1);
    std::vector<double> ks(z.size());
    for (std::size_t k = 0; k < z.size(); ++k) ks[k] = static_cast<double>(k) / d;
    ks.back() = 1.0;
    return PiecewiseLinearPath(std::move(ks), z);
}

/// Step path on the grid {k/d} of [0, 1]: value z_k on [k/d, (k+1)/d), and
/// z_d at t = 1 (the floor formula gives d at the right endpoint).
inline StepPath step_interpolant(const std::vector<double>& z) {
    if (z.empty()) throw std::invalid_argument("step_interpolant: empty value vector");
    if (z.size() == 1) return StepPath({0.0}, {z[0]}, 1.0);
    const double d = static_cast<double>(z.size() - 1);
    std::vector<double> bs(z.size());
    for (std::size_t k = 0; k < z.size(); ++k) bs[k] = static_cast<double>(k) / d;
    bs.back() = 1.0;
    return StepPath(std::move(bs), z, 1.0);
}

/// Step path on the level-n dyadic grid of [0, n], frozen at the final value
/// on (n, infinity). The value vector must have n * 2^n + 1 entries.
inline StepPath halfline_step_interpolant(const std::vector<double>& z, int n) {
    if (n < 0 || n > 30) {
        throw std::domain_error("halfline_step_interpolant: level outside [0, 30]");
    }
    const std::size_t cells = static_cast<std::size_t>(n) << n;
    if (z.size() != cells + 1) {
        throw std::domain_error("halfline_step_interpolant: need n * 2^n + 1 values");
    }
    const double d = std::ldexp(1.0, n);
    std::vector<double> bs(z.size());
    for (std::size_t k = 0; k < z.size(); ++k) bs[k] = static_cast<double>(k) / d;
    return StepPath(std::move(bs), z, kInfiniteHorizon);
}

/// Restriction of a path to [0, t]. A tapered path restricted into its flat
/// region collapses back to a plain step path.
inline AnyPath restrict(const AnyPath& x, double t) {
    if (!(t > 0.0)) throw std::domain_error("restrict: t must be positive");
    const double h = path_horizon(x);
    if (std::isfinite(h) && t > h) throw std::domain_error("restrict: t beyond horizon");
    if (const StepPath* sp = std::get_if<StepPath>(&x)) return sp->restrict(t);
    if (const PiecewiseLinearPath* pl = std::get_if<PiecewiseLinearPath>(&x)) {
        return pl->restrict(t);
    }
    const TaperedStepPath& tp = std::get<TaperedStepPath>(x);
    if (t <= tp.profile().m() - 1.0) return tp.base().restrict(t);
    return tp.restrict(t);
}

/// psi_m x: the path faded out by the profile g_m, exact in product form.
/// Defined for step paths only; the base must reach m.
inline TaperedStepPath taper(const StepPath& x, double m) {
    if (!(m >= 1.0) || std::floor(m) != m) {
        throw std::domain_error("taper: m must be an integer >= 1");
    }
    return TaperedStepPath(x, TaperProfile(m));
}

inline TaperedStepPath taper(const AnyPath& x, double m) {
    if (const StepPath* sp = std::get_if<StepPath>(&x)) return taper(*sp, m);
    throw std::domain_error("taper: only step paths can be tapered exactly");
}

/// Both sides of the grid-snap identities for the step interpolant of z on
/// [0, 1]: the windowed two-sided oscillation and the windowed sup over
/// [0, T] coincide with the same statistics over [0, floor(T*d)/d], because
/// the interpolant is frozen between the snapped point and T.
struct GridSnapCheck {
    double two_sided_full;
    double two_sided_snapped;
    double sup_full;
    double sup_snapped;
};

inline GridSnapCheck grid_snap_sup_identity_check(const std::vector<double>& z, double T,
                                                  double delta) {
    if (!(delta > 0.0) || !(delta < T) || !(T <= 1.0)) {
        throw std::domain_error("grid_snap_sup_identity_check: need 0 < delta < T <= 1");
    }
    const StepPath path = step_interpolant(z);
    const double d = static_cast<double>(z.size() == 1 ? 1 : z.size() - 1);
    const double snapT = std::floor(T * d) / d;

    GridSnapCheck out;
    out.two_sided_full = two_sided_modulus(path, delta, Window(0.0, T));
    out.sup_full = sup_abs(AnyPath(path), Window(0.0, T));
    if (snapT > 0.0) {
        out.two_sided_snapped = two_sided_modulus(path, delta, Window(0.0, snapT));
        out.sup_snapped = sup_abs(AnyPath(path), Window(0.0, snapT));
    } else {
        // Degenerate snapped window {0}: no admissible triple, sup at t = 0.
        out.two_sided_snapped = 0.0;
        out.sup_snapped = std::abs(path.eval(0.0));
    }
    return out;
}

} // namespace pathspace
