#pragma once

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <future>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "pathspace/discrete_measure.hpp"
#include "pathspace/empirical_fdd.hpp"
#include "pathspace/paths.hpp"
#include "pathspace/phi_fit.hpp"
#include "pathspace/prokhorov.hpp"
#include "pathspace/rng.hpp"
#include "pathspace/samplers.hpp"
#include "pathspace/statistic_closeness.hpp"

namespace pathspace {

/// One experiment: fit a finitely supported law to the target process on each
/// level's dyadic grid, then measure how the approximant's probe-time law and
/// derived-statistic laws track the target as the level grows.
struct ExperimentConfig {
    ProcessSampler target = brownian_sampler(0);
    SpaceKind space = SpaceKind::c01;
    std::vector<int> levels;             // strictly increasing, each >= 2
    std::vector<double> fdd_times;       // probe times for the headline distance
    int replicas = 1;                    // independent fits per level; the median one is reported
    std::uint64_t seed = 0;
    std::size_t fit_budget = 2048;       // support cap for the fitter
    std::vector<double> eps_schedule;    // per-level fit target; empty means 1/level
    bool timing = false;                 // false keeps reports bit-reproducible
    double dinf_restrict = 1.5 + 0x1p-20; // half-line space: observe paths on [0, z]
};

/// One report line: probe-law closeness (repeated down the level's block) and
/// the statistic-law closeness at one dyadic delta.
struct ReportRow {
    int level = 0;
    std::string probe_set;
    double rho_hat = 0.0;
    double rho_boot_hi = 0.0;
    double delta_m = 0.0;
    double modulus_rho = 0.0;
    double two_sided_rho = 0.0;
    double sup_rho = 0.0;
    double endpoint_rho = 0.0; // JSON-only column
    std::size_t fit_support = 0;
    long long millis = 0;
    bool flagged = false;      // JSON-only column: the level's fit missed its target

    bool operator==(const ReportRow&) const = default;
};

struct ConvergenceReport {
    std::vector<ReportRow> rows;

    bool operator==(const ConvergenceReport&) const = default;
};

inline bool any_flagged(const ConvergenceReport& r) {
    return std::any_of(r.rows.begin(), r.rows.end(),
                       [](const ReportRow& row) { return row.flagged; });
}

inline void validate_experiment_config(const ExperimentConfig& cfg) {
    if (cfg.levels.empty()) throw std::domain_error("ExperimentConfig: levels must be nonempty");
    for (std::size_t i = 0; i < cfg.levels.size(); ++i) {
        if (cfg.levels[i] < 2 || cfg.levels[i] > 30) {
            throw std::domain_error("ExperimentConfig: levels must lie in [2, 30]");
        }
        if (i > 0 && cfg.levels[i] <= cfg.levels[i - 1]) {
            throw std::domain_error("ExperimentConfig: levels must be strictly increasing");
        }
    }
    if (cfg.fdd_times.empty()) throw std::domain_error("ExperimentConfig: fdd_times must be nonempty");
    const double probe_max = (cfg.space == SpaceKind::dinf) ? cfg.dinf_restrict : 1.0;
    for (std::size_t i = 0; i < cfg.fdd_times.size(); ++i) {
        const double t = cfg.fdd_times[i];
        if (!std::isfinite(t) || t < 0.0 || t > probe_max) {
            throw std::domain_error("ExperimentConfig: probe times must lie in the observed window");
        }
        if (i > 0 && t <= cfg.fdd_times[i - 1]) {
            throw std::domain_error("ExperimentConfig: probe times must be strictly increasing");
        }
    }
    if (cfg.replicas < 1 || cfg.replicas > 64) {
        throw std::domain_error("ExperimentConfig: replicas must lie in [1, 64]");
    }
    if (cfg.fit_budget == 0) throw std::domain_error("ExperimentConfig: fit_budget must be positive");
    if (!cfg.eps_schedule.empty()) {
        if (cfg.eps_schedule.size() != cfg.levels.size()) {
            throw std::domain_error("ExperimentConfig: eps_schedule must match levels");
        }
        for (double e : cfg.eps_schedule) {
            if (!(e > 0.0) || !std::isfinite(e)) {
                throw std::domain_error("ExperimentConfig: eps_schedule entries must be positive");
            }
        }
    }
    if (cfg.space == SpaceKind::dinf) {
        if (!(cfg.dinf_restrict > 0.0) || !(cfg.dinf_restrict <= cfg.levels.front())) {
            throw std::domain_error(
                "ExperimentConfig: dinf_restrict must lie in (0, smallest level]");
        }
    }
}

/// Sampling grid for one level: the level-n dyadic grid of [0, 1], or of
/// [0, n] for the half-line space.
inline std::vector<double> level_grid_times(SpaceKind space, int level) {
    if (level < 0 || level > 30) throw std::domain_error("level_grid_times: level outside [0, 30]");
    const double d = std::ldexp(1.0, level);
    const std::size_t cells = (space == SpaceKind::dinf)
                                  ? (static_cast<std::size_t>(level) << level)
                                  : (std::size_t{1} << level);
    std::vector<double> t(cells + 1);
    for (std::size_t k = 0; k <= cells; ++k) t[k] = static_cast<double>(k) / d;
    return t;
}

namespace detail {

inline constexpr int kProbeResamples = 48;
inline constexpr std::size_t kStatsRows = 2048;

/// Shortest round-trip decimal form; keeps reports byte-stable across runs.
inline std::string format_double(double v) { return shortest_double(v); }

inline std::string probe_label(const std::vector<double>& times) {
    std::string s;
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (i > 0) s += ';';
        s += format_double(times[i]);
    }
    return s;
}

struct LevelRunResult {
    int level = 0;
    int replica = 0;
    double rho_hat = 1.0;
    std::vector<ReportRow> rows;
};

/// Derived-stream layout: every sample drawn by a (level, replica) task comes
/// from seed mix(mix(config seed, target seed), (level*64 + replica)*8 + purpose)
/// with purposes 0 = fit sample, 1 = probe reference, 2 = statistic sample,
/// 3 = fit bootstrap, 4 = probe bootstrap. Tasks never share streams, so the
/// parallel schedule cannot affect the report.
inline LevelRunResult run_level_replica(const ExperimentConfig& cfg, std::size_t level_pos,
                                        int replica) {
    const auto t_start = std::chrono::steady_clock::now();
    const int level = cfg.levels[level_pos];
    const double eps = cfg.eps_schedule.empty() ? 1.0 / static_cast<double>(level)
                                                : cfg.eps_schedule[level_pos];
    const std::uint64_t base = mix_seed(cfg.seed, cfg.target.seed);
    auto stream = [&](int purpose) {
        return (static_cast<std::uint64_t>(level) * 64 + static_cast<std::uint64_t>(replica)) * 8 +
               static_cast<std::uint64_t>(purpose);
    };
    auto sampler_for = [&](int purpose) {
        ProcessSampler s = cfg.target;
        s.seed = mix_seed(base, stream(purpose));
        return s;
    };

    const std::vector<double> grid = level_grid_times(cfg.space, level);
    const EmpiricalFdd fit_sample = sample_fdd(sampler_for(0), grid, 5 * cfg.fit_budget);
    const FitOutcome fit = fit_phi(fit_sample, eps, cfg.fit_budget, mix_seed(base, stream(3)));

    // Headline distance: the fitted member's law at the probe times is an
    // exact pushforward (every atom runs through the space's interpolant),
    // compared against a large fresh reference sample of the target.
    const DiscreteMeasure& member = fit.member.measure;
    const std::size_t n_probes = cfg.fdd_times.size();
    std::vector<double> probe_flat(member.size() * n_probes);
    for (std::size_t i = 0; i < member.size(); ++i) {
        auto a = member.atom(i);
        const AnyPath path = statistic_path(cfg.space, std::vector<double>(a.begin(), a.end()),
                                            level, cfg.dinf_restrict);
        for (std::size_t p = 0; p < n_probes; ++p) {
            probe_flat[i * n_probes + p] = path_eval(path, cfg.fdd_times[p]);
        }
    }
    const WeightedCloud member_cloud =
        cloud_from_weighted_rows(probe_flat.data(), member.weights(), member.size(), n_probes);

    const std::size_t ref_rows = std::max<std::size_t>(10 * fit.support, 10000);
    const EmpiricalFdd ref = sample_fdd(sampler_for(1), cfg.fdd_times, ref_rows);
    const WeightedCloud ref_cloud = cloud_from_rows(ref.samples().data(), ref_rows, n_probes);

    // Cap ladder: rebuild the near-pair cache at doubling radius until the
    // distance fits inside it (radius 1 always does).
    double cap = 1.0 / 64.0;
    PairCache cache = build_pair_cache(member_cloud, ref_cloud, Norm::sup, cap);
    std::optional<double> rho = rho_from_cache(cache, member_cloud.units, ref_cloud.units);
    while (!rho) {
        cap = std::min(1.0, cap * 2.0);
        cache = build_pair_cache(member_cloud, ref_cloud, Norm::sup, cap);
        rho = rho_from_cache(cache, member_cloud.units, ref_cloud.units);
    }
    const double rho_hat = *rho;

    // Bootstrap the reference side only: the member's probe law is exact, all
    // estimation noise lives in the reference sample.
    const double boot_cap = std::min(1.0, std::max(2.0 * rho_hat, rho_hat + 0.05));
    if (boot_cap > cache.cap) {
        cache = build_pair_cache(member_cloud, ref_cloud, Norm::sup, boot_cap);
    }
    std::vector<double> boot(kProbeResamples);
    for (int r = 0; r < kProbeResamples; ++r) {
        Rng rng(mix_seed(base, stream(4)), static_cast<std::uint64_t>(r));
        const auto ru = multinomial_units(ref_cloud, ref_rows, rng);
        boot[static_cast<std::size_t>(r)] =
            rho_upper_sweep(cache, member_cloud.units, ru, rho_hat);
    }
    std::sort(boot.begin(), boot.end());
    const double q95 = boot[boot.size() * 95 / 100 - 1];
    const double rho_boot_hi = std::max(rho_hat, q95);

    const EmpiricalFdd stats_sample = sample_fdd(sampler_for(2), grid, kStatsRows);
    const ClosenessReport closeness =
        derived_statistic_closeness(member, stats_sample, level, cfg.space, cfg.dinf_restrict);

    const auto t_end = std::chrono::steady_clock::now();
    const long long millis =
        cfg.timing
            ? std::chrono::duration_cast<std::chrono::milliseconds>(t_end - t_start).count()
            : 0;

    LevelRunResult out;
    out.level = level;
    out.replica = replica;
    out.rho_hat = rho_hat;
    const std::string label = probe_label(cfg.fdd_times);
    for (const StatisticRow& s : closeness.rows) {
        ReportRow row;
        row.level = level;
        row.probe_set = label;
        row.rho_hat = rho_hat;
        row.rho_boot_hi = rho_boot_hi;
        row.delta_m = s.delta;
        row.modulus_rho = s.modulus_rho;
        row.two_sided_rho = s.two_sided_rho;
        row.sup_rho = s.sup_rho;
        row.endpoint_rho = s.endpoint_rho;
        row.fit_support = fit.support;
        row.millis = millis;
        row.flagged = !fit.certified;
        out.rows.push_back(std::move(row));
    }
    return out;
}

} // namespace detail

/// Runs every (level, replica) cell in parallel on derived seeds and merges
/// deterministically: per level, the replica with the median headline
/// distance (ties to the lower replica id) makes it into the report. A level
/// whose fit misses its target is flagged, never dropped.
inline ConvergenceReport run_experiment(const ExperimentConfig& cfg) {
    validate_experiment_config(cfg);
    std::vector<std::vector<std::future<detail::LevelRunResult>>> futures(cfg.levels.size());
    for (std::size_t li = 0; li < cfg.levels.size(); ++li) {
        for (int r = 0; r < cfg.replicas; ++r) {
            futures[li].push_back(std::async(std::launch::async, [&cfg, li, r] {
                return detail::run_level_replica(cfg, li, r);
            }));
        }
    }
    ConvergenceReport report;
    for (auto& level_futures : futures) {
        std::vector<detail::LevelRunResult> runs;
        runs.reserve(level_futures.size());
        for (auto& f : level_futures) runs.push_back(f.get());
        std::sort(runs.begin(), runs.end(),
                  [](const detail::LevelRunResult& a, const detail::LevelRunResult& b) {
                      if (a.rho_hat != b.rho_hat) return a.rho_hat < b.rho_hat;
                      return a.replica < b.replica;
                  });
        const detail::LevelRunResult& median = runs[(runs.size() - 1) / 2];
        report.rows.insert(report.rows.end(), median.rows.begin(), median.rows.end());
    }
    return report;
}

inline std::string report_to_csv(const ConvergenceReport& r) {
    if (r.rows.empty()) throw std::domain_error("report_to_csv: empty report");
    std::string out =
        "level,probe_set,rho_hat,rho_boot_hi,delta_m,modulus_rho,two_sided_rho,sup_rho,"
        "fit_support,millis\n";
    for (const ReportRow& row : r.rows) {
        out += std::to_string(row.level);
        out += ',';
        out += row.probe_set;
        out += ',';
        out += detail::format_double(row.rho_hat);
        out += ',';
        out += detail::format_double(row.rho_boot_hi);
        out += ',';
        out += detail::format_double(row.delta_m);
        out += ',';
        out += detail::format_double(row.modulus_rho);
        out += ',';
        out += detail::format_double(row.two_sided_rho);
        out += ',';
        out += detail::format_double(row.sup_rho);
        out += ',';
        out += std::to_string(row.fit_support);
        out += ',';
        out += std::to_string(row.millis);
        out += '\n';
    }
    return out;
}

inline nlohmann::json report_to_json(const ConvergenceReport& r) {
    if (r.rows.empty()) throw std::domain_error("report_to_json: empty report");
    nlohmann::json rows = nlohmann::json::array();
    for (const ReportRow& row : r.rows) {
        rows.push_back({{"level", row.level},
                        {"probe_set", row.probe_set},
                        {"rho_hat", row.rho_hat},
                        {"rho_boot_hi", row.rho_boot_hi},
                        {"delta_m", row.delta_m},
                        {"modulus_rho", row.modulus_rho},
                        {"two_sided_rho", row.two_sided_rho},
                        {"sup_rho", row.sup_rho},
                        {"endpoint_rho", row.endpoint_rho},
                        {"fit_support", row.fit_support},
                        {"millis", row.millis},
                        {"flagged", row.flagged}});
    }
    return nlohmann::json{{"rows", std::move(rows)}};
}

inline ConvergenceReport report_from_json(const nlohmann::json& j) {
    ConvergenceReport r;
    for (const auto& e : j.at("rows")) {
        ReportRow row;
        row.level = e.at("level").get<int>();
        row.probe_set = e.at("probe_set").get<std::string>();
        row.rho_hat = e.at("rho_hat").get<double>();
        row.rho_boot_hi = e.at("rho_boot_hi").get<double>();
        row.delta_m = e.at("delta_m").get<double>();
        row.modulus_rho = e.at("modulus_rho").get<double>();
        row.two_sided_rho = e.at("two_sided_rho").get<double>();
        row.sup_rho = e.at("sup_rho").get<double>();
        row.endpoint_rho = e.at("endpoint_rho").get<double>();
        row.fit_support = e.at("fit_support").get<std::size_t>();
        row.millis = e.at("millis").get<long long>();
        row.flagged = e.at("flagged").get<bool>();
        r.rows.push_back(std::move(row));
    }
    if (r.rows.empty()) throw std::domain_error("report_from_json: empty report");
    return r;
}

/// Writes text to a file, surfacing the path on failure.
inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_text_file: cannot open '" + path + "'");
    out << text;
    out.flush();
    if (!out.good()) throw std::runtime_error("write_text_file: write failed for '" + path + "'");
}

inline ProcessSampler sampler_from_json(const nlohmann::json& j) {
    const std::string process = j.at("process").get<std::string>();
    const std::uint64_t seed = j.value("seed", std::uint64_t{0});
    if (process == "brownian") return brownian_sampler(seed);
    if (process == "poisson") return poisson_sampler(j.value("rate", 1.0), seed);
    if (process == "compound-poisson") {
        return compound_poisson_sampler(j.value("rate", 1.0), j.value("jump_mean", 0.0),
                                        j.value("jump_sd", 1.0), seed);
    }
    if (process == "deterministic") {
        StepPath path(j.at("breakpoints").get<std::vector<double>>(),
                      j.at("values").get<std::vector<double>>(),
                      j.value("horizon", kInfiniteHorizon));
        return deterministic_sampler(std::move(path), seed);
    }
    throw std::invalid_argument("sampler_from_json: unknown process '" + process + "'");
}

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
    ExperimentConfig cfg;
    cfg.target = sampler_from_json(j.at("target"));
    cfg.space = space_kind_from_name(j.at("space").get<std::string>());
    cfg.levels = j.at("levels").get<std::vector<int>>();
    cfg.fdd_times = j.at("fdd_times").get<std::vector<double>>();
    cfg.replicas = j.value("replicas", 1);
    cfg.seed = j.value("seed", std::uint64_t{0});
    cfg.fit_budget = j.value("fit_budget", std::size_t{2048});
    if (j.contains("eps_schedule")) {
        cfg.eps_schedule = j.at("eps_schedule").get<std::vector<double>>();
    }
    cfg.timing = j.value("timing", false);
    cfg.dinf_restrict = j.value("dinf_restrict", 1.5 + 0x1p-20);
    validate_experiment_config(cfg);
    return cfg;
}

} // namespace pathspace
