#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pathspace/empirical_fdd.hpp"
#include "pathspace/paths.hpp"
#include "pathspace/rng.hpp"

namespace pathspace {

enum class ProcessKind { brownian, poisson, compound_poisson, deterministic_step };

/// Specification of a reference process to draw finite-dimensional samples
/// from. Each draw row uses its own derived RNG stream, so row i is the same
/// regardless of how many rows are requested: prefixes of a sample are stable.
struct ProcessSampler {
    ProcessKind kind = ProcessKind::brownian;
    std::uint64_t seed = 0;
    double rate = 1.0;        // arrival intensity (poisson / compound_poisson)
    double jump_mean = 0.0;   // compound_poisson jump law: gaussian
    double jump_sd = 1.0;
    std::optional<StepPath> path;  // deterministic_step

    double horizon() const {
        return kind == ProcessKind::deterministic_step ? path->horizon() : kInfiniteHorizon;
    }

    std::string id() const {
        switch (kind) {
            case ProcessKind::brownian: return "brownian";
            case ProcessKind::poisson: return "poisson";
            case ProcessKind::compound_poisson: return "compound-poisson";
            case ProcessKind::deterministic_step: return "deterministic";
        }
        return "unknown";
    }

    /// Same process, different RNG stream; for parallel replicas.
    ProcessSampler reseeded(std::uint64_t stream) const {
        ProcessSampler out = *this;
        out.seed = mix_seed(seed, stream);
        return out;
    }
};

inline ProcessSampler brownian_sampler(std::uint64_t seed) {
    ProcessSampler s;
    s.seed = seed;
    return s;
}

inline ProcessSampler poisson_sampler(double rate, std::uint64_t seed) {
    if (!(rate > 0.0) || !std::isfinite(rate)) throw std::domain_error("poisson_sampler: rate must be positive");
    ProcessSampler s;
    s.kind = ProcessKind::poisson;
    s.seed = seed;
    s.rate = rate;
    return s;
}

inline ProcessSampler compound_poisson_sampler(double rate, double jump_mean, double jump_sd,
                                               std::uint64_t seed) {
    if (!(rate > 0.0) || !std::isfinite(rate)) {
        throw std::domain_error("compound_poisson_sampler: rate must be positive");
    }
    if (!(jump_sd >= 0.0) || !std::isfinite(jump_sd) || !std::isfinite(jump_mean)) {
        throw std::domain_error("compound_poisson_sampler: jump law parameters must be finite, sd >= 0");
    }
    ProcessSampler s;
    s.kind = ProcessKind::compound_poisson;
    s.seed = seed;
    s.rate = rate;
    s.jump_mean = jump_mean;
    s.jump_sd = jump_sd;
    return s;
}

inline ProcessSampler deterministic_sampler(StepPath path, std::uint64_t seed = 0) {
    ProcessSampler s;
    s.kind = ProcessKind::deterministic_step;
    s.seed = seed;
    s.path = std::move(path);
    return s;
}

/// Draws N independent rows of (X_{t_1}, ..., X_{t_k}). Brownian rows use
/// exact Gaussian increment synthesis between consecutive times; Poisson and
/// compound-Poisson rows use exact counts per increment (a compound increment
/// with K arrivals is drawn as one Gaussian with mean K*jump_mean and
/// variance K*jump_sd^2, which is the exact conditional law).
inline EmpiricalFdd sample_fdd(const ProcessSampler& s, const std::vector<double>& times, std::size_t n_rows) {
    if (n_rows == 0) throw std::domain_error("sample_fdd: at least one row required");
    if (times.empty()) throw std::domain_error("sample_fdd: at least one time required");
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (!(times[i] >= 0.0) || !std::isfinite(times[i])) {
            throw std::domain_error("sample_fdd: times must be finite and nonnegative");
        }
        if (i > 0 && !(times[i - 1] < times[i])) {
            throw std::domain_error("sample_fdd: times must be strictly increasing");
        }
        if (times[i] > s.horizon()) throw std::domain_error("sample_fdd: time beyond sampler horizon");
    }

    const std::size_t k = times.size();
    std::vector<double> samples(n_rows * k);
    for (std::size_t i = 0; i < n_rows; ++i) {
        double* row = samples.data() + i * k;
        switch (s.kind) {
            case ProcessKind::deterministic_step: {
                for (std::size_t j = 0; j < k; ++j) row[j] = s.path->eval(times[j]);
                break;
            }
            case ProcessKind::brownian: {
                Rng rng(s.seed, i);
                double t_prev = 0.0, v = 0.0;
                for (std::size_t j = 0; j < k; ++j) {
                    const double dt = times[j] - t_prev;
                    if (dt > 0.0) v += std::sqrt(dt) * rng.gaussian();
                    t_prev = times[j];
                    row[j] = v;
                }
                break;
            }
            case ProcessKind::poisson: {
                Rng rng(s.seed, i);
                double t_prev = 0.0;
                double v = 0.0;
                for (std::size_t j = 0; j < k; ++j) {
                    const double dt = times[j] - t_prev;
                    if (dt > 0.0) v += static_cast<double>(rng.poisson(s.rate * dt));
                    t_prev = times[j];
                    row[j] = v;
                }
                break;
            }
            case ProcessKind::compound_poisson: {
                Rng rng(s.seed, i);
                double t_prev = 0.0;
                double v = 0.0;
                for (std::size_t j = 0; j < k; ++j) {
                    const double dt = times[j] - t_prev;
                    if (dt > 0.0) {
                        const std::uint64_t arrivals = rng.poisson(s.rate * dt);
                        if (arrivals > 0) {
                            const double kd = static_cast<double>(arrivals);
                            v += kd * s.jump_mean + std::sqrt(kd) * s.jump_sd * rng.gaussian();
                        }
                    }
                    t_prev = times[j];
                    row[j] = v;
                }
                break;
            }
        }
    }
    return EmpiricalFdd(times, std::move(samples), s.id());
}

} // namespace pathspace
