#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "pathspace/discrete_measure.hpp"
#include "pathspace/empirical_fdd.hpp"
#include "pathspace/interpolants.hpp"
#include "pathspace/moduli.hpp"
#include "pathspace/paths.hpp"
#include "pathspace/prokhorov.hpp"

namespace pathspace {

/// The three path spaces the experiments run in: continuous paths on [0, 1],
/// cadlag paths on [0, 1], and cadlag paths on the half line (observed
/// through a finite restriction).
enum class SpaceKind { c01, d01, dinf };

inline std::string space_kind_name(SpaceKind k) {
    switch (k) {
        case SpaceKind::c01: return "C01";
        case SpaceKind::d01: return "D01";
        case SpaceKind::dinf: return "Dinf";
    }
    throw std::domain_error("space_kind_name: unknown kind");
}

inline SpaceKind space_kind_from_name(const std::string& s) {
    if (s == "C01" || s == "c01") return SpaceKind::c01;
    if (s == "D01" || s == "d01") return SpaceKind::d01;
    if (s == "Dinf" || s == "dinf") return SpaceKind::dinf;
    throw std::invalid_argument("space_kind_from_name: unknown space '" + s + "'");
}

/// Closeness of the laws of the window-delta path statistics, one row per
/// dyadic delta = 2^-m, m = 1 .. level-1. Each entry is the Prokhorov
/// distance between the statistic's law under the fitted member and its
/// empirical law under a fresh target sample.
struct StatisticRow {
    double delta = 0.0;
    double modulus_rho = 0.0;
    double two_sided_rho = 0.0;
    double sup_rho = 0.0;
    double endpoint_rho = 0.0;
};

struct ClosenessReport {
    std::vector<StatisticRow> rows;
    double max_rho = 0.0;
};

namespace detail {

/// Interpolates one grid-value vector into the space's canonical path. For
/// the half-line space the path is then cut at the restriction point so that
/// every statistic below runs on a finite window.
inline AnyPath statistic_path(SpaceKind kind, const std::vector<double>& z, int level,
                              double dinf_restrict) {
    switch (kind) {
        case SpaceKind::c01: return AnyPath(linear_interpolant(z));
        case SpaceKind::d01: return AnyPath(step_interpolant(z));
        case SpaceKind::dinf:
            return restrict(AnyPath(halfline_step_interpolant(z, level)), dinf_restrict);
    }
    throw std::domain_error("statistic_path: unknown kind");
}

inline DiscreteMeasure one_dim_measure(const std::vector<double>& values,
                                       const std::vector<double>& weights) {
    std::vector<std::vector<double>> atoms(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) atoms[i] = {values[i]};
    return DiscreteMeasure(std::move(atoms), weights);
}

/// Prokhorov distance between the pushforward laws of one scalar statistic.
inline double statistic_rho(const std::vector<double>& member_values,
                            const std::vector<double>& member_weights,
                            const std::vector<double>& target_values,
                            const std::vector<double>& target_weights) {
    return prokhorov_distance(one_dim_measure(member_values, member_weights),
                              one_dim_measure(target_values, target_weights))
        .rho;
}

} // namespace detail

/// Compares the fitted member against a fresh target sample through the laws
/// of the derived statistics: modulus of continuity, two-sided oscillation,
/// sup norm, and the boundary increments, at every dyadic delta down to
/// 2^-(level-1). Both laws are exact pushforwards of finitely many paths, so
/// each entry reduces to a one-dimensional Prokhorov distance.
inline ClosenessReport derived_statistic_closeness(const DiscreteMeasure& member,
                                                   const EmpiricalFdd& target, int level,
                                                   SpaceKind kind,
                                                   double dinf_restrict = 1.5 + 0x1p-20) {
    if (member.dim() != target.dim()) {
        throw std::domain_error(
            "derived_statistic_closeness: member and target live on different grids");
    }
    if (level < 2 || level > 30) {
        throw std::domain_error("derived_statistic_closeness: level outside [2, 30]");
    }
    if (kind == SpaceKind::dinf && !(dinf_restrict > 0.0 && dinf_restrict <= level)) {
        throw std::domain_error(
            "derived_statistic_closeness: restriction point outside (0, level]");
    }

    std::vector<AnyPath> member_paths;
    member_paths.reserve(member.size());
    for (std::size_t i = 0; i < member.size(); ++i) {
        auto a = member.atom(i);
        member_paths.push_back(
            detail::statistic_path(kind, std::vector<double>(a.begin(), a.end()), level, dinf_restrict));
    }
    std::vector<AnyPath> target_paths;
    target_paths.reserve(target.rows());
    for (std::size_t i = 0; i < target.rows(); ++i) {
        auto r = target.row(i);
        target_paths.push_back(
            detail::statistic_path(kind, std::vector<double>(r.begin(), r.end()), level, dinf_restrict));
    }

    const std::vector<double> member_w = member.weights();
    const std::vector<double> target_w(target.rows(), 1.0 / static_cast<double>(target.rows()));

    auto sups = [](const std::vector<AnyPath>& ps) {
        std::vector<double> v(ps.size());
        for (std::size_t i = 0; i < ps.size(); ++i) v[i] = sup_abs(ps[i]);
        return v;
    };
    const std::vector<double> member_sup = sups(member_paths);
    const std::vector<double> target_sup = sups(target_paths);
    const double sup_rho = detail::statistic_rho(member_sup, member_w, target_sup, target_w);

    ClosenessReport report;
    report.max_rho = sup_rho;
    for (int m = 1; m < level; ++m) {
        const double delta = std::ldexp(1.0, -m);
        StatisticRow row;
        row.delta = delta;
        row.sup_rho = sup_rho;

        std::vector<double> mod_m(member_paths.size()), two_m(member_paths.size());
        std::vector<double> ini_m(member_paths.size()), pen_m(member_paths.size());
        for (std::size_t i = 0; i < member_paths.size(); ++i) {
            mod_m[i] = modulus(member_paths[i], delta);
            two_m[i] = two_sided_modulus(member_paths[i], delta);
            const EndpointStats es = endpoint_statistics(member_paths[i], delta);
            ini_m[i] = es.initial_increment;
            pen_m[i] = es.penultimate_increment;
        }
        std::vector<double> mod_t(target_paths.size()), two_t(target_paths.size());
        std::vector<double> ini_t(target_paths.size()), pen_t(target_paths.size());
        for (std::size_t i = 0; i < target_paths.size(); ++i) {
            mod_t[i] = modulus(target_paths[i], delta);
            two_t[i] = two_sided_modulus(target_paths[i], delta);
            const EndpointStats es = endpoint_statistics(target_paths[i], delta);
            ini_t[i] = es.initial_increment;
            pen_t[i] = es.penultimate_increment;
        }

        row.modulus_rho = detail::statistic_rho(mod_m, member_w, mod_t, target_w);
        row.two_sided_rho = detail::statistic_rho(two_m, member_w, two_t, target_w);
        row.endpoint_rho =
            std::max({detail::statistic_rho(ini_m, member_w, ini_t, target_w),
                      detail::statistic_rho(pen_m, member_w, pen_t, target_w),
                      sup_rho});
        report.max_rho = std::max({report.max_rho, row.modulus_rho, row.two_sided_rho,
                                   row.endpoint_rho});
        report.rows.push_back(row);
    }
    return report;
}

} // namespace pathspace
