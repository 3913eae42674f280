#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <numeric>
#include <span>
#include <stdexcept>
#include <tuple>
#include <utility>
#include <vector>

#include "pathspace/discrete_measure.hpp"
#include "pathspace/max_flow.hpp"

namespace pathspace {

namespace detail {

/// Probability masses are handled as integer units of 2^-48 so that flow
/// feasibility is decided in exact integer arithmetic. Dyadic weights of
/// denominator up to 2^48 convert without any rounding at all.
inline constexpr std::int64_t kUnitScale = std::int64_t(1) << 48;

/// Largest-remainder rounding of the normalized weights onto `total` integer
/// units; the result always sums to `total` exactly. Deterministic: ties on
/// the remainder break toward the lower index.
inline std::vector<std::int64_t> weight_units(const std::vector<double>& w, std::int64_t total = kUnitScale) {
    const double sum = std::accumulate(w.begin(), w.end(), 0.0);
    if (!(sum > 0.0)) throw std::domain_error("weight_units: weights must have positive sum");
    std::vector<std::int64_t> units(w.size());
    std::vector<std::pair<double, std::size_t>> remainders(w.size());
    std::int64_t assigned = 0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double exact = w[i] / sum * static_cast<double>(total);
        double base = std::floor(exact);
        if (base < 0.0) base = 0.0;
        if (base > static_cast<double>(total)) base = static_cast<double>(total);
        units[i] = static_cast<std::int64_t>(base);
        assigned += units[i];
        remainders[i] = {exact - base, i};
    }
    std::int64_t deficit = total - assigned;
    std::sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    for (std::size_t r = 0; deficit > 0 && r < remainders.size(); ++r, --deficit) {
        units[remainders[r].second] += 1;
    }
    if (deficit != 0) {
        // Rounding drift can only leave a surplus when floats misbehave; shave
        // it off the largest entries so the exact-total contract holds.
        std::vector<std::size_t> order(units.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (units[a] != units[b]) return units[a] > units[b];
            return a < b;
        });
        for (std::size_t r = 0; deficit < 0 && r < order.size(); ++r) {
            const std::int64_t cut = std::min(-deficit, units[order[r]]);
            units[order[r]] -= cut;
            deficit += cut;
        }
    }
    return units;
}

/// Smallest integer flow L (in 2^-48 units) whose deficit satisfies the
/// Prokhorov mass condition at eps: (kUnitScale - L) * 2^-48 <= eps. All
/// comparisons are exact, so this is the true integer threshold.
inline std::int64_t feasible_flow_threshold(double eps) {
    if (!(eps >= 0.0)) throw std::domain_error("feasible_flow_threshold: eps must be nonnegative");
    std::int64_t lo = 0;
    std::int64_t hi = kUnitScale;
    auto ok = [&](std::int64_t flow) {
        return static_cast<double>(kUnitScale - flow) * 0x1p-48 <= eps;
    };
    if (ok(lo)) return lo;
    while (hi - lo > 1) {
        const std::int64_t mid = lo + (hi - lo) / 2;
        if (ok(mid)) hi = mid;
        else lo = mid;
    }
    return hi;
}

/// Maximum transportable mass between two weighted point sets on the line
/// when only pairs within eps may be matched. Atoms must be ascending (the
/// canonical DiscreteMeasure order). Greedy leftmost matching is optimal for
/// such interval-structured transport problems. Optionally records the
/// matched (i, j, units) triples.
struct LineTake {
    std::size_t from, to;
    std::int64_t units;
};

inline std::int64_t line_transport_flow(const std::vector<double>& xs, const std::vector<std::int64_t>& xu,
                                        const std::vector<double>& ys, const std::vector<std::int64_t>& yu,
                                        double eps, std::vector<LineTake>* takes = nullptr) {
    std::int64_t flow = 0;
    std::size_t i = 0;
    std::int64_t avail = xs.empty() ? 0 : xu[0];
    for (std::size_t j = 0; j < ys.size(); ++j) {
        std::int64_t need = yu[j];
        while (i < xs.size() && xs[i] < ys[j] && std::abs(ys[j] - xs[i]) > eps) {
            ++i;
            if (i < xs.size()) avail = xu[i];
        }
        while (need > 0 && i < xs.size()) {
            if (xs[i] > ys[j] && std::abs(xs[i] - ys[j]) > eps) break;
            const std::int64_t take = std::min(need, avail);
            if (take > 0) {
                flow += take;
                need -= take;
                avail -= take;
                if (takes) takes->push_back(LineTake{i, j, take});
            }
            if (avail == 0) {
                ++i;
                if (i < xs.size()) avail = xu[i];
            } else {
                break;  // need exhausted
            }
        }
    }
    return flow;
}

} // namespace detail

/// One transported-mass entry of a coupling; indices refer to the canonical
/// atom order of the two measures.
struct CouplingEntry {
    std::size_t from;
    std::size_t to;
    double mass;
};

/// Witness for a Prokhorov distance value: a (possibly partial-order
/// completed) transport plan in which all but at most `epsilon` mass moves
/// between atoms at distance at most `epsilon`.
class CouplingCertificate {
  public:
    CouplingCertificate(std::vector<CouplingEntry> flow, double epsilon)
        : flow_(std::move(flow)), epsilon_(epsilon) {}

    const std::vector<CouplingEntry>& flow() const { return flow_; }
    double epsilon() const { return epsilon_; }

    /// Re-checks the certificate against the two measures from scratch,
    /// independently of whatever solver produced it. Throws on violation.
    void validate(const DiscreteMeasure& mu, const DiscreteMeasure& nu, Norm norm = Norm::sup) const {
        std::vector<double> row(mu.size(), 0.0), col(nu.size(), 0.0);
        double far_mass = 0.0;
        for (const auto& e : flow_) {
            if (e.from >= mu.size() || e.to >= nu.size()) {
                throw std::domain_error("CouplingCertificate::validate: atom index out of range");
            }
            if (!(e.mass >= 0.0) || !std::isfinite(e.mass)) {
                throw std::domain_error("CouplingCertificate::validate: entry mass must be nonnegative");
            }
            row[e.from] += e.mass;
            col[e.to] += e.mass;
            if (atom_distance(mu.atom(e.from), nu.atom(e.to), norm) > epsilon_) far_mass += e.mass;
        }
        for (std::size_t i = 0; i < mu.size(); ++i) {
            if (std::abs(row[i] - mu.weight(i)) > 1e-10) {
                throw std::domain_error("CouplingCertificate::validate: row sums do not match source weights");
            }
        }
        for (std::size_t j = 0; j < nu.size(); ++j) {
            if (std::abs(col[j] - nu.weight(j)) > 1e-10) {
                throw std::domain_error("CouplingCertificate::validate: column sums do not match target weights");
            }
        }
        if (far_mass > epsilon_ + 1e-10) {
            throw std::domain_error("CouplingCertificate::validate: too much mass moved beyond epsilon");
        }
    }

  private:
    std::vector<CouplingEntry> flow_;
    double epsilon_;
};

struct ProkhorovResult {
    double rho;
    CouplingCertificate certificate;
};

namespace detail {

/// Shared state for the bipartite feasibility tests: node layout is
/// source, mu atoms, nu atoms, sink.
struct TransportGraph {
    const DiscreteMeasure& mu;
    const DiscreteMeasure& nu;
    Norm norm;
    const std::vector<std::int64_t>& mu_units;
    const std::vector<std::int64_t>& nu_units;

    /// Max transportable units when only atom pairs within eps are linked.
    /// Stops early once `limit` units are routed. When `edge_ids` is given it
    /// receives (i, j, edge) triples for flow extraction.
    std::int64_t flow_at(double eps, std::int64_t limit,
                         std::vector<std::tuple<std::size_t, std::size_t, std::size_t>>* edge_ids = nullptr,
                         MaxFlow** out_net = nullptr, std::unique_ptr<MaxFlow>* holder = nullptr) const {
        const std::size_t n = mu.size(), m = nu.size();
        auto net = std::make_unique<MaxFlow>(n + m + 2);
        const std::size_t src = 0, snk = n + m + 1;
        for (std::size_t i = 0; i < n; ++i) net->add_edge(src, 1 + i, mu_units[i]);
        for (std::size_t j = 0; j < m; ++j) net->add_edge(1 + n + j, snk, nu_units[j]);
        for (std::size_t i = 0; i < n; ++i) {
            auto a = mu.atom(i);
            for (std::size_t j = 0; j < m; ++j) {
                if (atom_distance(a, nu.atom(j), norm) <= eps) {
                    const std::size_t id = net->add_edge(1 + i, 1 + n + j, kUnitScale);
                    if (edge_ids) edge_ids->emplace_back(i, j, id);
                }
            }
        }
        const std::int64_t flow = net->run(src, snk, limit);
        if (out_net && holder) {
            *holder = std::move(net);
            *out_net = holder->get();
        }
        return flow;
    }
};

/// Builds the certificate for distance value eps: extract the maxflow
/// coupling on pairs within eps, then complete the (at most eps) untransported
/// remainder pairing leftovers in canonical order.
inline CouplingCertificate certificate_at(const TransportGraph& g, double eps) {
    std::vector<std::tuple<std::size_t, std::size_t, std::size_t>> edge_ids;
    std::unique_ptr<MaxFlow> holder;
    MaxFlow* net = nullptr;
    (void)g.flow_at(eps, std::numeric_limits<std::int64_t>::max(), &edge_ids, &net, &holder);
    std::vector<std::int64_t> row_left(g.mu_units), col_left(g.nu_units);
    std::vector<CouplingEntry> entries;
    for (const auto& [i, j, id] : edge_ids) {
        const std::int64_t f = net->flow_on(id);
        if (f > 0) {
            entries.push_back(CouplingEntry{i, j, static_cast<double>(f) * 0x1p-48});
            row_left[i] -= f;
            col_left[j] -= f;
        }
    }
    std::size_t i = 0, j = 0;
    while (i < row_left.size() && j < col_left.size()) {
        if (row_left[i] == 0) { ++i; continue; }
        if (col_left[j] == 0) { ++j; continue; }
        const std::int64_t take = std::min(row_left[i], col_left[j]);
        entries.push_back(CouplingEntry{i, j, static_cast<double>(take) * 0x1p-48});
        row_left[i] -= take;
        col_left[j] -= take;
    }
    return CouplingCertificate(std::move(entries), eps);
}

inline CouplingCertificate line_certificate_at(const std::vector<double>& xs, const std::vector<std::int64_t>& xu,
                                               const std::vector<double>& ys, const std::vector<std::int64_t>& yu,
                                               double eps) {
    std::vector<LineTake> takes;
    (void)line_transport_flow(xs, xu, ys, yu, eps, &takes);
    std::vector<std::int64_t> row_left(xu), col_left(yu);
    std::vector<CouplingEntry> entries;
    for (const auto& t : takes) {
        entries.push_back(CouplingEntry{t.from, t.to, static_cast<double>(t.units) * 0x1p-48});
        row_left[t.from] -= t.units;
        col_left[t.to] -= t.units;
    }
    std::size_t i = 0, j = 0;
    while (i < row_left.size() && j < col_left.size()) {
        if (row_left[i] == 0) { ++i; continue; }
        if (col_left[j] == 0) { ++j; continue; }
        const std::int64_t take = std::min(row_left[i], col_left[j]);
        entries.push_back(CouplingEntry{i, j, static_cast<double>(take) * 0x1p-48});
        row_left[i] -= take;
        col_left[j] -= take;
    }
    return CouplingCertificate(std::move(entries), eps);
}

inline constexpr std::size_t kExactCandidatePairLimit = 4u << 20;  // sort-all-distances cutoff

} // namespace detail

/// Prokhorov distance between finitely supported measures, with a coupling
/// witness. Feasibility of a radius eps is decided by maximum flow on the
/// bipartite graph linking atom pairs within eps (transportable mass must
/// reach 1 - eps); the infimum is located by monotone search over the
/// critical radii {pairwise distances} and the deficit crossings between
/// them. Instances beyond the sort-all-pairs cutoff fall back to a
/// deterministic 60-step bisection whose result brackets the infimum to
/// below 1e-15; the one-dimensional case replaces the flow solver with an
/// exact greedy line-transport sweep.
inline ProkhorovResult prokhorov_distance(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                          Norm norm = Norm::sup) {
    if (mu.dim() != nu.dim()) throw std::domain_error("prokhorov_distance: dimension mismatch");
    const std::size_t n = mu.size(), m = nu.size();
    const std::vector<std::int64_t> mu_units = detail::weight_units(mu.weights());
    const std::vector<std::int64_t> nu_units = detail::weight_units(nu.weights());

    if (mu.dim() == 1) {
        std::vector<double> xs(n), ys(m);
        for (std::size_t i = 0; i < n; ++i) xs[i] = mu.atom(i)[0];
        for (std::size_t j = 0; j < m; ++j) ys[j] = nu.atom(j)[0];
        auto deficit_of = [&](double eps) {
            const std::int64_t flow = detail::line_transport_flow(xs, mu_units, ys, nu_units, eps);
            return static_cast<double>(detail::kUnitScale - flow) * 0x1p-48;
        };
        auto feasible = [&](double eps) { return deficit_of(eps) <= eps; };
        if (feasible(0.0)) {
            return ProkhorovResult{0.0, detail::line_certificate_at(xs, mu_units, ys, nu_units, 0.0)};
        }
        double lo = 0.0, hi = 1.0;
        for (int it = 0; it < 60; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (feasible(mid)) hi = mid;
            else lo = mid;
        }
        // Exact finish: walk the critical radii inside the bracket. On each
        // interval with a fixed pair set the minimal feasible radius is the
        // deficit itself, valid when it precedes the next pairwise distance.
        auto next_distance_above = [&](double v) {
            double best = std::numeric_limits<double>::infinity();
            auto probe = [&](std::ptrdiff_t anchor, double y) {
                for (std::ptrdiff_t k = anchor - 4; k <= anchor + 4; ++k) {
                    if (k < 0 || k >= static_cast<std::ptrdiff_t>(xs.size())) continue;
                    const double d = std::abs(xs[static_cast<std::size_t>(k)] - y);
                    if (d > v) best = std::min(best, d);
                }
            };
            for (double y : ys) {
                probe(std::lower_bound(xs.begin(), xs.end(), y - v) - xs.begin(), y);
                probe(std::lower_bound(xs.begin(), xs.end(), y + v) - xs.begin(), y);
            }
            return best;
        };
        double at = lo;
        double rho = hi;
        for (int guard = 0; guard < 64; ++guard) {
            const double deficit = deficit_of(at);
            const double next = next_distance_above(at);
            if (deficit < next) {
                rho = std::max(at, deficit);
                break;
            }
            at = next;
        }
        rho = std::min(std::max(rho, lo), hi);
        return ProkhorovResult{rho, detail::line_certificate_at(xs, mu_units, ys, nu_units, rho)};
    }

    detail::TransportGraph graph{mu, nu, norm, mu_units, nu_units};
    const std::size_t pairs = n * m;

    if (pairs <= detail::kExactCandidatePairLimit) {
        std::vector<double> cand;
        cand.reserve(pairs + 1);
        cand.push_back(0.0);
        for (std::size_t i = 0; i < n; ++i) {
            auto a = mu.atom(i);
            for (std::size_t j = 0; j < m; ++j) cand.push_back(atom_distance(a, nu.atom(j), norm));
        }
        std::sort(cand.begin(), cand.end());
        cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
        auto deficit_at = [&](std::size_t k) {
            const std::int64_t flow = graph.flow_at(cand[k], std::numeric_limits<std::int64_t>::max());
            return static_cast<double>(detail::kUnitScale - flow) * 0x1p-48;
        };
        // Q(k): the interval [cand[k], cand[k+1]) contains a feasible radius,
        // i.e. the deficit at cand[k] lies strictly below the next critical
        // radius. Q is monotone, so the first true index carries the infimum.
        auto q = [&](std::size_t k, double* deficit_out) {
            const double deficit = deficit_at(k);
            if (deficit_out) *deficit_out = deficit;
            const double next = (k + 1 < cand.size()) ? cand[k + 1] : std::numeric_limits<double>::infinity();
            return deficit < next;
        };
        std::size_t lo = 0, hi = cand.size() - 1;
        if (!q(lo, nullptr)) {
            while (hi - lo > 1) {
                const std::size_t mid = lo + (hi - lo) / 2;
                if (q(mid, nullptr)) hi = mid;
                else lo = mid;
            }
        } else {
            hi = lo;
        }
        double deficit = 0.0;
        (void)q(hi, &deficit);
        const double rho = std::max(cand[hi], deficit);
        return ProkhorovResult{rho, detail::certificate_at(graph, rho)};
    }

    auto feasible = [&](double eps) {
        if (eps >= 1.0) return true;
        const std::int64_t need = detail::feasible_flow_threshold(eps);
        return graph.flow_at(eps, need) >= need;
    };
    if (feasible(0.0)) return ProkhorovResult{0.0, detail::certificate_at(graph, 0.0)};
    double hi = 1.0 / 64.0;
    while (hi < 1.0 && !feasible(hi)) hi = std::min(1.0, hi * 2.0);
    double lo = (hi <= 1.0 / 64.0) ? 0.0 : hi / 2.0;
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (feasible(mid)) hi = mid;
        else lo = mid;
    }
    return ProkhorovResult{hi, detail::certificate_at(graph, hi)};
}

/// Ground-truth Prokhorov distance by exhausting the defining two-sided mass
/// condition over every subset of the (deduplicated) union support. Only for
/// small instances; the flow solver is verified against this.
inline double prokhorov_oracle(const DiscreteMeasure& mu, const DiscreteMeasure& nu, Norm norm = Norm::sup) {
    if (mu.dim() != nu.dim()) throw std::domain_error("prokhorov_oracle: dimension mismatch");
    if (mu.size() + nu.size() > 14) {
        throw std::domain_error("prokhorov_oracle: combined support larger than 14 atoms");
    }

    std::vector<std::vector<double>> points;
    std::vector<double> mu_mass, nu_mass;
    auto add_point = [&](std::span<const double> a, double wmu, double wnu) {
        std::vector<double> p(a.begin(), a.end());
        for (std::size_t k = 0; k < points.size(); ++k) {
            if (points[k] == p) {
                mu_mass[k] += wmu;
                nu_mass[k] += wnu;
                return;
            }
        }
        points.push_back(std::move(p));
        mu_mass.push_back(wmu);
        nu_mass.push_back(wnu);
    };
    for (std::size_t i = 0; i < mu.size(); ++i) add_point(mu.atom(i), mu.weight(i), 0.0);
    for (std::size_t j = 0; j < nu.size(); ++j) add_point(nu.atom(j), 0.0, nu.weight(j));

    const std::size_t p = points.size();
    std::vector<std::vector<double>> dist(p, std::vector<double>(p));
    for (std::size_t a = 0; a < p; ++a) {
        for (std::size_t b = 0; b < p; ++b) {
            dist[a][b] = atom_distance(std::span<const double>(points[a]),
                                       std::span<const double>(points[b]), norm);
        }
    }

    const std::size_t nmask = std::size_t{1} << p;
    std::vector<double> mu_of(nmask, 0.0), nu_of(nmask, 0.0);
    // dist_to_set[mask * p + q] = min distance from point q to the subset mask
    std::vector<double> dist_to_set(nmask * p, std::numeric_limits<double>::infinity());
    for (std::size_t mask = 1; mask < nmask; ++mask) {
        const std::size_t lb = mask & (~mask + 1);
        const std::size_t idx = static_cast<std::size_t>(std::countr_zero(mask));
        const std::size_t rest = mask ^ lb;
        mu_of[mask] = mu_of[rest] + mu_mass[idx];
        nu_of[mask] = nu_of[rest] + nu_mass[idx];
        for (std::size_t q2 = 0; q2 < p; ++q2) {
            dist_to_set[mask * p + q2] = std::min(dist_to_set[rest * p + q2], dist[idx][q2]);
        }
    }

    // Minimal eps with alpha(A) <= beta(A^eps) + eps, scanning the intervals
    // between consecutive enlargement radii of A.
    std::vector<std::pair<double, double>> reach;  // (radius, beta mass at that radius)
    auto one_sided = [&](double alpha_mass, const std::vector<double>& beta, const double* dts) {
        reach.clear();
        for (std::size_t q2 = 0; q2 < p; ++q2) {
            if (beta[q2] > 0.0) reach.emplace_back(dts[q2], beta[q2]);
        }
        std::sort(reach.begin(), reach.end());
        double best = std::numeric_limits<double>::infinity();
        double cum = 0.0;
        double left = 0.0;
        std::size_t t = 0;
        while (true) {
            while (t < reach.size() && reach[t].first <= left) cum += reach[t++].second;
            const double right = (t < reach.size()) ? reach[t].first
                                                    : std::numeric_limits<double>::infinity();
            const double cand = std::max(left, alpha_mass - cum);
            if (cand < right) best = std::min(best, cand);
            if (t >= reach.size()) break;
            left = right;
        }
        return best;
    };

    double rho = 0.0;
    for (std::size_t mask = 1; mask < nmask; ++mask) {
        const double* dts = dist_to_set.data() + mask * p;
        rho = std::max(rho, one_sided(mu_of[mask], nu_mass, dts));
        rho = std::max(rho, one_sided(nu_of[mask], mu_mass, dts));
    }
    return rho;
}

} // namespace pathspace
