#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace pathspace {

inline constexpr double kInfiniteHorizon = std::numeric_limits<double>::infinity();

namespace detail {

inline void require(bool cond, const char* msg) {
    if (!cond) throw std::domain_error(msg);
}

inline void require_strictly_increasing(const std::vector<double>& ts, const char* what) {
    for (std::size_t i = 1; i < ts.size(); ++i) {
        if (!(ts[i - 1] < ts[i])) {
            throw std::invalid_argument(std::string(what) + ": times must be strictly increasing");
        }
    }
}

} // namespace detail

/// Dyadic grid on [0, T]: points k/2^n for 0 <= k <= floor(T*2^n), plus T
/// itself when T is not on the lattice. Spacing is exactly 2^-n except
/// possibly the final cell.
class DyadicGrid {
  public:
    DyadicGrid(int level, double horizon) : level_(level), horizon_(horizon) {
        if (level < 0 || level > 40) throw std::domain_error("DyadicGrid: level must be in [0, 40]");
        if (!(horizon > 0.0) || !std::isfinite(horizon)) {
            throw std::domain_error("DyadicGrid: horizon must be positive and finite");
        }
    }

    int level() const { return level_; }
    double horizon() const { return horizon_; }

    /// 2^-n, exact in double.
    double pitch() const { return std::ldexp(1.0, -level_); }

    std::size_t point_count() const {
        const double scaled = std::ldexp(horizon_, level_); // exact
        const double full = std::floor(scaled);
        const std::size_t k = static_cast<std::size_t>(full);
        return (full == scaled) ? k + 1 : k + 2;
    }

    std::vector<double> points() const {
        const double scaled = std::ldexp(horizon_, level_);
        const double full = std::floor(scaled);
        const std::size_t k = static_cast<std::size_t>(full);
        std::vector<double> out;
        out.reserve(k + 2);
        for (std::size_t i = 0; i <= k; ++i) {
            out.push_back(std::ldexp(static_cast<double>(i), -level_));
        }
        if (full != scaled) out.push_back(horizon_);
        return out;
    }

  private:
    int level_;
    double horizon_;
};

/// Right-continuous step path on [0, T] (or [0, inf) with the final value
/// frozen past the last breakpoint). Breakpoints are strictly increasing and
/// start at 0; values carry one entry per breakpoint.
class StepPath {
  public:
    StepPath(std::vector<double> breakpoints, std::vector<double> values,
             double horizon = 1.0)
        : breakpoints_(std::move(breakpoints)), values_(std::move(values)), horizon_(horizon) {
        if (breakpoints_.empty() || breakpoints_.front() != 0.0) {
            throw std::invalid_argument("StepPath: breakpoints must start at 0");
        }
        detail::require_strictly_increasing(breakpoints_, "StepPath");
        if (values_.size() != breakpoints_.size()) {
            throw std::invalid_argument("StepPath: one value per breakpoint required");
        }
        if (std::isfinite(horizon_)) {
            if (!(horizon_ > 0.0)) throw std::invalid_argument("StepPath: horizon must be positive");
            if (breakpoints_.back() > horizon_) {
                throw std::invalid_argument("StepPath: breakpoints must not exceed the horizon");
            }
        }
    }

    const std::vector<double>& breakpoints() const { return breakpoints_; }
    const std::vector<double>& values() const { return values_; }
    double horizon() const { return horizon_; }
    bool infinite_horizon() const { return !std::isfinite(horizon_); }

    /// x(t): value of the last breakpoint <= t (right-continuous evaluation).
    double eval(double t) const {
        check_domain(t);
        return values_[segment_index(t)];
    }

    /// x(t-): value just before t. Requires 0 < t <= horizon.
    double left_limit(double t) const {
        if (!(t > 0.0)) throw std::domain_error("StepPath::left_limit: t must be positive");
        if (std::isfinite(horizon_) && t > horizon_) {
            throw std::domain_error("StepPath::left_limit: t beyond horizon");
        }
        // Last breakpoint strictly below t.
        const auto it = std::lower_bound(breakpoints_.begin(), breakpoints_.end(), t);
        const std::size_t idx = static_cast<std::size_t>(it - breakpoints_.begin());
        return values_[idx - 1]; // idx >= 1 because breakpoints_[0] == 0 < t
    }

    /// Merges consecutive equal values so every interior breakpoint carries a
    /// genuine jump. Metric code may rely on this canonical form.
    StepPath normalize() const {
        std::vector<double> bs{breakpoints_.front()};
        std::vector<double> vs{values_.front()};
        for (std::size_t i = 1; i < values_.size(); ++i) {
            if (values_[i] != vs.back()) {
                bs.push_back(breakpoints_[i]);
                vs.push_back(values_[i]);
            }
        }
        return StepPath(std::move(bs), std::move(vs), horizon_);
    }

    /// Restriction r_t: drops breakpoints beyond t, new horizon t.
    StepPath restrict(double t) const {
        if (!(t > 0.0)) throw std::domain_error("StepPath::restrict: t must be positive");
        if (std::isfinite(horizon_) && t > horizon_) {
            throw std::domain_error("StepPath::restrict: t beyond horizon");
        }
        std::vector<double> bs, vs;
        for (std::size_t i = 0; i < breakpoints_.size() && breakpoints_[i] <= t; ++i) {
            bs.push_back(breakpoints_[i]);
            vs.push_back(values_[i]);
        }
        return StepPath(std::move(bs), std::move(vs), t);
    }

    /// Indices of breakpoints whose value actually changes (size of jump != 0).
    std::vector<std::size_t> jump_indices() const {
        std::vector<std::size_t> out;
        for (std::size_t i = 1; i < values_.size(); ++i) {
            if (values_[i] != values_[i - 1]) out.push_back(i);
        }
        return out;
    }

  private:
    void check_domain(double t) const {
        if (t < 0.0 || (std::isfinite(horizon_) && t > horizon_) || std::isnan(t)) {
            throw std::domain_error("StepPath::eval: t outside [0, horizon]");
        }
    }

    std::size_t segment_index(double t) const {
        const auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), t);
        return static_cast<std::size_t>(it - breakpoints_.begin()) - 1;
    }

    std::vector<double> breakpoints_;
    std::vector<double> values_;
    double horizon_;
};

/// Continuous piecewise-linear path on [0, T]. Knots span the full domain:
/// first knot 0, last knot T.
class PiecewiseLinearPath {
  public:
    PiecewiseLinearPath(std::vector<double> knots, std::vector<double> values)
        : knots_(std::move(knots)), values_(std::move(values)) {
        if (knots_.size() < 2) {
            // A constant path is represented with two knots {0, T}.
            throw std::invalid_argument("PiecewiseLinearPath: at least two knots required");
        }
        if (knots_.front() != 0.0) throw std::invalid_argument("PiecewiseLinearPath: first knot must be 0");
        detail::require_strictly_increasing(knots_, "PiecewiseLinearPath");
        if (values_.size() != knots_.size()) {
            throw std::invalid_argument("PiecewiseLinearPath: one value per knot required");
        }
    }

    const std::vector<double>& knots() const { return knots_; }
    const std::vector<double>& values() const { return values_; }
    double horizon() const { return knots_.back(); }

    /// Evaluation by convex combination of the two surrounding knot values.
    /// Exact at knots.
    double eval(double t) const {
        if (t < 0.0 || t > horizon() || std::isnan(t)) {
            throw std::domain_error("PiecewiseLinearPath::eval: t outside [0, horizon]");
        }
        const auto it = std::lower_bound(knots_.begin(), knots_.end(), t);
        std::size_t hi = static_cast<std::size_t>(it - knots_.begin());
        if (hi < knots_.size() && knots_[hi] == t) return values_[hi];
        const std::size_t lo = hi - 1;
        const double b = (t - knots_[lo]) / (knots_[hi] - knots_[lo]);
        const double a = 1.0 - b;
        return a * values_[lo] + b * values_[hi];
    }

    /// Restriction to [0, t]: cuts the final cell at t (inserting the
    /// interpolated value) so the result is again a full-domain path.
    PiecewiseLinearPath restrict(double t) const {
        if (!(t > 0.0) || t > horizon()) {
            throw std::domain_error("PiecewiseLinearPath::restrict: t outside (0, horizon]");
        }
        std::vector<double> ks, vs;
        for (std::size_t i = 0; i < knots_.size() && knots_[i] < t; ++i) {
            ks.push_back(knots_[i]);
            vs.push_back(values_[i]);
        }
        ks.push_back(t);
        vs.push_back(eval(t));
        return PiecewiseLinearPath(std::move(ks), std::move(vs));
    }

  private:
    std::vector<double> knots_;
    std::vector<double> values_;
};

/// Strictly increasing piecewise-linear time change of [0, T] onto itself:
/// lambda(knots[i]) = images[i], with lambda(0) = 0 and lambda(T) = T.
class Reparametrization {
  public:
    Reparametrization(std::vector<double> knots, std::vector<double> images)
        : knots_(std::move(knots)), images_(std::move(images)) {
        if (knots_.size() != images_.size() || knots_.size() < 2) {
            throw std::invalid_argument("Reparametrization: need matching knot/image lists (>= 2)");
        }
        detail::require_strictly_increasing(knots_, "Reparametrization knots");
        detail::require_strictly_increasing(images_, "Reparametrization images");
        if (knots_.front() != 0.0 || images_.front() != 0.0) {
            throw std::invalid_argument("Reparametrization: must fix 0");
        }
        if (knots_.back() != images_.back()) {
            throw std::invalid_argument("Reparametrization: must map [0,T] onto itself");
        }
    }

    static Reparametrization identity(double horizon) {
        return Reparametrization({0.0, horizon}, {0.0, horizon});
    }

    const std::vector<double>& knots() const { return knots_; }
    const std::vector<double>& images() const { return images_; }
    double horizon() const { return knots_.back(); }

    double eval(double t) const { return piecewise_eval(knots_, images_, t); }

    /// Inverse time change (swap knots and images). Exposed for testing and
    /// for mapping jump times through lambda^{-1}; production metric code
    /// only consumes it internally.
    Reparametrization inverse() const { return Reparametrization(images_, knots_); }

    /// sup_t |lambda(t) - t|, attained at a knot.
    double max_time_distortion() const {
        double m = 0.0;
        for (std::size_t i = 0; i < knots_.size(); ++i) {
            m = std::max(m, std::abs(images_[i] - knots_[i]));
        }
        return m;
    }

    /// ||lambda||° = sup over s<t of |log((lambda t - lambda s)/(t - s))|.
    /// For a piecewise-linear time change this is the largest |log slope|
    /// over segments (chord slopes are convex combinations of segment slopes).
    double log_slope_norm() const {
        double m = 0.0;
        for (std::size_t i = 1; i < knots_.size(); ++i) {
            const double slope = (images_[i] - images_[i - 1]) / (knots_[i] - knots_[i - 1]);
            m = std::max(m, std::abs(std::log(slope)));
        }
        return m;
    }

  private:
    static double piecewise_eval(const std::vector<double>& xs, const std::vector<double>& ys, double t) {
        if (t < xs.front() || t > xs.back() || std::isnan(t)) {
            throw std::domain_error("Reparametrization: t outside [0, horizon]");
        }
        const auto it = std::lower_bound(xs.begin(), xs.end(), t);
        std::size_t hi = static_cast<std::size_t>(it - xs.begin());
        if (hi < xs.size() && xs[hi] == t) return ys[hi];
        const std::size_t lo = hi - 1;
        // Identity segments are mapped exactly (no rounding through the ratio).
        if (xs[lo] == ys[lo] && xs[hi] == ys[hi]) return t;
        const double b = (t - xs[lo]) / (xs[hi] - xs[lo]);
        return (1.0 - b) * ys[lo] + b * ys[hi];
    }

    std::vector<double> knots_;
    std::vector<double> images_;
};

/// Fade-out profile g_m: 1 on [0, m-1], affine down to 0 at m, 0 beyond.
class TaperProfile {
  public:
    explicit TaperProfile(double m) : m_(m) {
        if (!(m >= 1.0) || !std::isfinite(m)) {
            throw std::domain_error("TaperProfile: m must satisfy m >= 1");
        }
    }

    double m() const { return m_; }

    double eval(double t) const {
        if (t < 0.0 || std::isnan(t)) throw std::domain_error("TaperProfile: t must be >= 0");
        if (t <= m_ - 1.0) return 1.0;
        if (t >= m_) return 0.0;
        return m_ - t;
    }

  private:
    double m_;
};

/// Step path multiplied by a taper profile, kept in product form so the ramp
/// section [m-1, m] stays exact (piecewise linear between jumps) instead of
/// being resampled onto a grid.
class TaperedStepPath {
  public:
    TaperedStepPath(StepPath base, TaperProfile profile)
        : base_(base.infinite_horizon() || base.horizon() > profile.m()
                    ? base.restrict(profile.m())
                    : std::move(base)),
          profile_(profile),
          horizon_(profile.m()) {
        if (!base_.infinite_horizon() && base_.horizon() < profile_.m()) {
            throw std::domain_error("TaperedStepPath: base horizon shorter than taper width");
        }
    }

    const StepPath& base() const { return base_; }
    const TaperProfile& profile() const { return profile_; }
    double horizon() const { return horizon_; }

    /// Restriction to [0, t]; keeps the product form (profile unchanged).
    TaperedStepPath restrict(double t) const {
        if (!(t > 0.0) || t > horizon_) {
            throw std::domain_error("TaperedStepPath::restrict: t outside (0, horizon]");
        }
        TaperedStepPath out = *this;
        out.horizon_ = t;
        return out;
    }

    double eval(double t) const {
        if (t < 0.0 || t > horizon() || std::isnan(t)) {
            throw std::domain_error("TaperedStepPath::eval: t outside [0, m]");
        }
        return profile_.eval(t) * base_.eval(t);
    }

    double left_limit(double t) const {
        if (!(t > 0.0) || t > horizon()) {
            throw std::domain_error("TaperedStepPath::left_limit: t outside (0, m]");
        }
        return profile_.eval(t) * base_.left_limit(t);
    }

  private:
    StepPath base_;
    TaperProfile profile_;
    double horizon_;
};

/// Variant used by serialization and the command-line front end.
using AnyPath = std::variant<StepPath, PiecewiseLinearPath, TaperedStepPath>;

inline double path_horizon(const AnyPath& p) {
    return std::visit([](const auto& x) { return x.horizon(); }, p);
}

inline double path_eval(const AnyPath& p, double t) {
    return std::visit([t](const auto& x) { return x.eval(t); }, p);
}

/// x o lambda for a step path: jump times map through lambda^{-1}, values are
/// unchanged, so the result is exactly representable.
inline StepPath apply_reparam(const StepPath& x, const Reparametrization& lambda) {
    if (x.infinite_horizon() || x.horizon() != lambda.horizon()) {
        throw std::domain_error("apply_reparam: path and time-change horizons must agree");
    }
    const Reparametrization inv = lambda.inverse();
    std::vector<double> bs, vs;
    bs.reserve(x.breakpoints().size());
    for (std::size_t i = 0; i < x.breakpoints().size(); ++i) {
        bs.push_back(i == 0 ? 0.0 : inv.eval(x.breakpoints()[i]));
        vs.push_back(x.values()[i]);
    }
    return StepPath(std::move(bs), std::move(vs), x.horizon());
}

/// y o lambda for a piecewise-linear path: knots are the union of lambda's
/// knots and the lambda^{-1}-images of y's knots; values are y at the mapped
/// times (taken from y's own knot values where possible to avoid rounding).
inline PiecewiseLinearPath apply_reparam(const PiecewiseLinearPath& y, const Reparametrization& lambda) {
    if (y.horizon() != lambda.horizon()) {
        throw std::domain_error("apply_reparam: path and time-change horizons must agree");
    }
    const Reparametrization inv = lambda.inverse();
    struct Pt {
        double t;
        int priority; // 0: image of a y-knot (exact value), 1: lambda knot
        double v;
    };
    std::vector<Pt> pts;
    pts.reserve(y.knots().size() + lambda.knots().size());
    for (std::size_t i = 0; i < y.knots().size(); ++i) {
        pts.push_back({inv.eval(y.knots()[i]), 0, y.values()[i]});
    }
    for (double s : lambda.knots()) {
        pts.push_back({s, 1, y.eval(lambda.eval(s))});
    }
    std::sort(pts.begin(), pts.end(), [](const Pt& a, const Pt& b) {
        return a.t != b.t ? a.t < b.t : a.priority < b.priority;
    });
    std::vector<double> ks, vs;
    for (const Pt& p : pts) {
        if (!ks.empty() && p.t == ks.back()) continue; // y-knot images take precedence at ties
        ks.push_back(p.t);
        vs.push_back(p.v);
    }
    ks.front() = 0.0;
    return PiecewiseLinearPath(std::move(ks), std::move(vs));
}

} // namespace pathspace
