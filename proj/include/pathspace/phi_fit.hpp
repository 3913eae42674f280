#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "pathspace/discrete_measure.hpp"
#include "pathspace/empirical_fdd.hpp"
#include "pathspace/max_flow.hpp"
#include "pathspace/prokhorov.hpp"
#include "pathspace/rng.hpp"

namespace pathspace {

/// A member of the approximating family: a finitely supported law on R^k.
struct PhiMember {
    DiscreteMeasure measure;
};

/// Result of a fit attempt. `achieved` is the estimated Prokhorov distance of
/// the returned member to the target law (candidate vs fresh reference
/// empirical measures); `margin` is the bootstrap 95th-percentile excess over
/// that estimate (computed only on the certification track, 0 otherwise).
/// A failed fit is reported here rather than thrown: callers flag and go on.
struct FitOutcome {
    PhiMember member;
    double achieved = 1.0;
    double margin = 0.0;
    bool certified = false;
    std::size_t support = 0;
};

namespace detail {

/// Deduplicated weighted point set with integer unit masses (total 2^48).
struct WeightedCloud {
    std::size_t dim = 0;
    std::vector<double> flat;           // count() * dim, unique atoms
    std::vector<std::int64_t> units;    // sums to kUnitScale
    std::size_t count() const { return units.size(); }
    std::span<const double> atom(std::size_t i) const {
        return std::span<const double>(flat.data() + i * dim, dim);
    }
};

/// Groups equal rows of a sample block and assigns largest-remainder units.
inline WeightedCloud cloud_from_rows(const double* data, std::size_t rows, std::size_t dim) {
    if (rows == 0 || dim == 0) throw std::domain_error("cloud_from_rows: empty sample block");
    std::vector<std::uint32_t> order(rows);
    for (std::size_t i = 0; i < rows; ++i) order[i] = static_cast<std::uint32_t>(i);
    auto row_less = [&](std::uint32_t a, std::uint32_t b) {
        const double* ra = data + static_cast<std::size_t>(a) * dim;
        const double* rb = data + static_cast<std::size_t>(b) * dim;
        for (std::size_t d = 0; d < dim; ++d) {
            if (ra[d] < rb[d]) return true;
            if (ra[d] > rb[d]) return false;
        }
        return a < b;
    };
    std::sort(order.begin(), order.end(), row_less);
    WeightedCloud c;
    c.dim = dim;
    std::vector<double> counts;
    for (std::size_t pos = 0; pos < rows; ++pos) {
        const double* r = data + static_cast<std::size_t>(order[pos]) * dim;
        const bool same = pos > 0 &&
            std::equal(r, r + dim, data + static_cast<std::size_t>(order[pos - 1]) * dim);
        if (same) {
            counts.back() += 1.0;
        } else {
            c.flat.insert(c.flat.end(), r, r + dim);
            counts.push_back(1.0);
        }
    }
    c.units = weight_units(counts);
    return c;
}

/// Same grouping for rows that carry explicit weights instead of unit counts.
inline WeightedCloud cloud_from_weighted_rows(const double* data, const std::vector<double>& w,
                                              std::size_t rows, std::size_t dim) {
    if (rows == 0 || dim == 0 || w.size() != rows) {
        throw std::domain_error("cloud_from_weighted_rows: shape mismatch");
    }
    std::vector<std::uint32_t> order(rows);
    for (std::size_t i = 0; i < rows; ++i) order[i] = static_cast<std::uint32_t>(i);
    auto row_less = [&](std::uint32_t a, std::uint32_t b) {
        const double* ra = data + static_cast<std::size_t>(a) * dim;
        const double* rb = data + static_cast<std::size_t>(b) * dim;
        for (std::size_t d = 0; d < dim; ++d) {
            if (ra[d] < rb[d]) return true;
            if (ra[d] > rb[d]) return false;
        }
        return a < b;
    };
    std::sort(order.begin(), order.end(), row_less);
    WeightedCloud c;
    c.dim = dim;
    std::vector<double> sums;
    for (std::size_t pos = 0; pos < rows; ++pos) {
        const double* r = data + static_cast<std::size_t>(order[pos]) * dim;
        const bool same = pos > 0 &&
            std::equal(r, r + dim, data + static_cast<std::size_t>(order[pos - 1]) * dim);
        if (same) {
            sums.back() += w[order[pos]];
        } else {
            c.flat.insert(c.flat.end(), r, r + dim);
            sums.push_back(w[order[pos]]);
        }
    }
    c.units = weight_units(sums);
    return c;
}

inline WeightedCloud cloud_from_measure(const DiscreteMeasure& mu) {
    WeightedCloud c;
    c.dim = mu.dim();
    c.flat.reserve(mu.size() * mu.dim());
    for (std::size_t i = 0; i < mu.size(); ++i) {
        auto a = mu.atom(i);
        c.flat.insert(c.flat.end(), a.begin(), a.end());
    }
    c.units = weight_units(mu.weights());
    return c;
}

/// All atom pairs within distance `cap`, ascending by distance. Distances are
/// kept as floats: the cache backs estimation paths only.
struct PairCache {
    struct Edge {
        float d;
        std::uint32_t a, b;
    };
    double cap = 0.0;
    std::size_t na = 0, nb = 0;
    std::vector<Edge> edges;
};

inline PairCache build_pair_cache(const WeightedCloud& a, const WeightedCloud& b, Norm norm, double cap) {
    if (a.dim != b.dim) throw std::domain_error("build_pair_cache: dimension mismatch");
    PairCache c;
    c.cap = cap;
    c.na = a.count();
    c.nb = b.count();
    const double cap2 = cap * cap;
    for (std::size_t i = 0; i < a.count(); ++i) {
        const double* pa = a.flat.data() + i * a.dim;
        for (std::size_t j = 0; j < b.count(); ++j) {
            const double* pb = b.flat.data() + j * b.dim;
            double dist;
            if (norm == Norm::sup) {
                double best = 0.0;
                for (std::size_t d = 0; d < a.dim; ++d) {
                    const double diff = std::abs(pa[d] - pb[d]);
                    if (diff > best) {
                        best = diff;
                        if (best > cap) break;
                    }
                }
                if (best > cap) continue;
                dist = best;
            } else {
                double ss = 0.0;
                for (std::size_t d = 0; d < a.dim; ++d) {
                    const double diff = pa[d] - pb[d];
                    ss += diff * diff;
                    if (ss > cap2) break;
                }
                if (ss > cap2) continue;
                dist = std::sqrt(ss);
            }
            c.edges.push_back(PairCache::Edge{static_cast<float>(dist),
                                              static_cast<std::uint32_t>(i),
                                              static_cast<std::uint32_t>(j)});
        }
    }
    std::sort(c.edges.begin(), c.edges.end(), [](const PairCache::Edge& x, const PairCache::Edge& y) {
        if (x.d != y.d) return x.d < y.d;
        if (x.a != y.a) return x.a < y.a;
        return x.b < y.b;
    });
    return c;
}

/// Estimated Prokhorov distance using only the cached pairs; nullopt when
/// even the full cache cannot move 1 - cap of the mass (the true value then
/// exceeds the cache cap). Deterministic bisection to cap * 2^-iters.
inline std::optional<double> rho_from_cache(const PairCache& c, const std::vector<std::int64_t>& au,
                                            const std::vector<std::int64_t>& bu, int iters = 24) {
    if (au.size() != c.na || bu.size() != c.nb) {
        throw std::domain_error("rho_from_cache: unit vectors do not match cache shape");
    }
    auto feasible = [&](double eps) {
        if (eps >= 1.0) return true;
        const std::int64_t need = feasible_flow_threshold(eps);
        MaxFlow net(c.na + c.nb + 2);
        const std::size_t src = 0, snk = c.na + c.nb + 1;
        for (std::size_t i = 0; i < c.na; ++i) net.add_edge(src, 1 + i, au[i]);
        for (std::size_t j = 0; j < c.nb; ++j) net.add_edge(1 + c.na + j, snk, bu[j]);
        for (const auto& e : c.edges) {
            if (static_cast<double>(e.d) > eps) break;
            net.add_edge(1 + e.a, 1 + c.na + e.b, kUnitScale);
        }
        return net.run(src, snk, need) >= need;
    };
    if (!feasible(c.cap)) return std::nullopt;
    if (feasible(0.0)) return 0.0;
    double lo = 0.0, hi = c.cap;
    for (int it = 0; it < iters; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (feasible(mid)) hi = mid;
        else lo = mid;
    }
    return hi;
}

/// One ascending feasibility pass over a pair cache.  Edges only ever get
/// added and MaxFlow augments incrementally, so across all probes of one pass
/// each edge and each unit of flow is paid for exactly once.  Probes must not
/// decrease.
class RhoSweep {
  public:
    RhoSweep(const PairCache& c, const std::vector<std::int64_t>& au,
             const std::vector<std::int64_t>& bu)
        : c_(c), net_(c.na + c.nb + 2), snk_(c.na + c.nb + 1) {
        for (std::size_t i = 0; i < c.na; ++i) net_.add_edge(0, 1 + i, au[i]);
        for (std::size_t j = 0; j < c.nb; ++j) net_.add_edge(1 + c.na + j, snk_, bu[j]);
    }

    bool feasible(double eps) {
        if (eps >= 1.0) return true;
        while (next_ < c_.edges.size() && static_cast<double>(c_.edges[next_].d) <= eps) {
            net_.add_edge(1 + c_.edges[next_].a, 1 + c_.na + c_.edges[next_].b, kUnitScale);
            ++next_;
        }
        const std::int64_t need = feasible_flow_threshold(eps);
        return net_.run(0, snk_, need) >= need;
    }

  private:
    const PairCache& c_;
    MaxFlow net_;
    std::size_t snk_;
    std::size_t next_ = 0;
};

/// Upper bound on the cached Prokhorov estimate, tuned for bootstrap resamples
/// where only the upper quantiles of the resampled values are consumed.
/// Values at or below `floor_eps` are censored up to it: when the floor is the
/// point estimate itself, any resample landing below it contributes zero to
/// the margin either way, so the quantile excess over the estimate is
/// unchanged.  Values beyond the cache cap are censored down to the cap,
/// matching what rho_from_cache can resolve.  One ascending ladder per
/// resample (ratio 2^(1/12), under 6% per rung) lets a single incremental
/// network absorb the whole transport once instead of once per bisection
/// probe.
inline double rho_upper_sweep(const PairCache& c, const std::vector<std::int64_t>& au,
                              const std::vector<std::int64_t>& bu, double floor_eps) {
    if (au.size() != c.na || bu.size() != c.nb) {
        throw std::domain_error("rho_upper_sweep: unit vectors do not match cache shape");
    }
    constexpr double kRung = 1.0594630943592953; // 2^(1/12)
    RhoSweep sweep(c, au, bu);
    if (sweep.feasible(0.0)) return 0.0;
    double eps = std::clamp(floor_eps, c.cap * 0x1p-20, c.cap);
    for (;;) {
        if (sweep.feasible(eps)) return eps;
        if (eps >= c.cap) return c.cap;
        eps = std::min(c.cap, eps * kRung);
    }
}

/// Multinomial resample of a cloud's mass: `draws` categorical draws over the
/// unit masses, re-quantized to 2^48 total units.
inline std::vector<std::int64_t> multinomial_units(const WeightedCloud& c, std::size_t draws, Rng& rng) {
    std::vector<std::int64_t> cum(c.count());
    std::int64_t running = 0;
    for (std::size_t i = 0; i < c.count(); ++i) {
        running += c.units[i];
        cum[i] = running;
    }
    std::vector<double> counts(c.count(), 0.0);
    for (std::size_t d = 0; d < draws; ++d) {
        const std::int64_t r = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(running)));
        const std::size_t idx = static_cast<std::size_t>(
            std::upper_bound(cum.begin(), cum.end(), r) - cum.begin());
        counts[idx] += 1.0;
    }
    return weight_units(counts);
}

} // namespace detail

/// Fits a finitely supported law to the target sample by the two-sample
/// protocol: the candidate is the empirical measure of the first M target
/// rows, judged against a fresh reference built from the next 4M rows, with a
/// 200-resample bootstrap margin at the 95th percentile. M doubles until
/// estimate + margin < eps or the support budget is exhausted; exhaustion is
/// reported in the outcome (never thrown), carrying the final estimate.
inline FitOutcome fit_phi(const EmpiricalFdd& target, double eps, std::size_t budget,
                          std::uint64_t seed = 0, Norm norm = Norm::sup) {
    if (!(eps > 0.0)) throw std::domain_error("fit_phi: eps must be positive");
    if (budget == 0) throw std::domain_error("fit_phi: budget must be positive");
    const std::size_t n_rows = target.rows();
    const std::size_t m_max = std::min(budget, n_rows / 5);
    if (m_max == 0) {
        throw std::domain_error("fit_phi: target needs at least 5 rows to split candidate from reference");
    }

    std::vector<std::size_t> ladder;
    for (std::size_t m = std::min<std::size_t>(32, m_max);; m = std::min(m * 2, m_max)) {
        ladder.push_back(m);
        if (m == m_max) break;
    }

    constexpr int kResamples = 200;
    const std::size_t dim = target.dim();
    for (std::size_t step = 0; step < ladder.size(); ++step) {
        const std::size_t m = ladder[step];
        const bool last = (step + 1 == ladder.size());
        const detail::WeightedCloud cand = detail::cloud_from_rows(target.samples().data(), m, dim);
        const detail::WeightedCloud ref =
            detail::cloud_from_rows(target.samples().data() + m * dim, 4 * m, dim);

        double cap = std::min(1.0, eps);
        detail::PairCache cache = detail::build_pair_cache(cand, ref, norm, cap);
        std::optional<double> rho = detail::rho_from_cache(cache, cand.units, ref.units);
        while (!rho && cap < 1.0) {
            // Over the certification radius: only the final step needs the
            // honest value, intermediate steps escalate immediately.
            if (!last) break;
            cap = std::min(1.0, cap * 2.0);
            cache = detail::build_pair_cache(cand, ref, norm, cap);
            rho = detail::rho_from_cache(cache, cand.units, ref.units);
        }

        std::vector<std::vector<double>> atoms(m);
        std::vector<double> weights(m, 1.0 / static_cast<double>(m));
        for (std::size_t i = 0; i < m; ++i) {
            auto r = target.row(i);
            atoms[i].assign(r.begin(), r.end());
        }
        FitOutcome out{PhiMember{DiscreteMeasure(std::move(atoms), std::move(weights))},
                       rho.value_or(1.0), 0.0, false, m};

        if (rho && *rho < eps) {
            std::vector<double> boot(kResamples);
            for (int r = 0; r < kResamples; ++r) {
                Rng rng(seed, static_cast<std::uint64_t>(step) * kResamples + static_cast<std::uint64_t>(r));
                const auto cu = detail::multinomial_units(cand, m, rng);
                const auto ru = detail::multinomial_units(ref, 4 * m, rng);
                boot[r] = detail::rho_upper_sweep(cache, cu, ru, *rho);
            }
            std::sort(boot.begin(), boot.end());
            const double q95 = boot[static_cast<std::size_t>(kResamples * 95 / 100) - 1];
            out.margin = std::max(0.0, q95 - *rho);
            out.certified = (*rho + out.margin < eps);
        }
        if (out.certified || last) return out;
    }
    throw std::logic_error("fit_phi: support ladder was empty");
}

} // namespace pathspace
