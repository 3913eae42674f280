// pathspace command-line front end.
//
// Subcommands mirror the library modules one-to-one:
//   metric      path-space distances and moduli on serialized paths
//   prokhorov   exact Prokhorov distance between finitely supported measures
//   approx      dyadic interpolants of a value grid, with taper/restriction
//   sample      finite-dimensional distributions of the stock processes
//   experiment  the full convergence study driven by a JSON config
//
// Every subcommand reads and writes plain files (JSON paths, CSV measures and
// samples) so runs can be scripted and diffed. Errors print one line on
// stderr and exit 1; the experiment runner exits 2 when any report row is
// flagged.

#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "pathspace/discrete_measure.hpp"
#include "pathspace/empirical_fdd.hpp"
#include "pathspace/experiment.hpp"
#include "pathspace/interpolants.hpp"
#include "pathspace/metrics.hpp"
#include "pathspace/moduli.hpp"
#include "pathspace/path_io.hpp"
#include "pathspace/paths.hpp"
#include "pathspace/prokhorov.hpp"
#include "pathspace/samplers.hpp"
#include "pathspace/skorokhod.hpp"
#include "pathspace/sparse_modulus.hpp"

namespace {

using namespace pathspace;

std::string read_text_file(const std::string& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + file + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

/// Numbers separated by whitespace, commas, or newlines; used for --values.
std::vector<double> load_numbers(const std::string& file) {
    std::string text = read_text_file(file);
    for (char& c : text) {
        if (c == ',' || c == ';') c = ' ';
    }
    std::istringstream in(text);
    std::vector<double> out;
    double v = 0.0;
    while (in >> v) out.push_back(v);
    if (!in.eof()) throw std::runtime_error("'" + file + "': non-numeric token in values file");
    if (out.empty()) throw std::runtime_error("'" + file + "': no values found");
    return out;
}

DiscreteMeasure load_measure(const std::string& file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot open '" + file + "'");
    return measure_from_csv(in);
}

StepPath require_step(const AnyPath& p, const char* which) {
    if (const StepPath* sp = std::get_if<StepPath>(&p)) return *sp;
    throw std::domain_error(std::string("metric: --") + which +
                            " must be a step path for the Skorokhod kinds");
}

void emit(const nlohmann::json& j) { std::cout << j.dump() << "\n"; }

int run_metric(const std::string& kind, const std::string& x_file, const std::string& y_file,
               std::optional<double> delta, double tol) {
    const AnyPath x = load_path(x_file);
    auto need_delta = [&]() -> double {
        if (!delta) throw std::domain_error("metric: --delta is required for kind '" + kind + "'");
        return *delta;
    };
    auto need_y = [&]() -> AnyPath {
        if (y_file.empty()) throw std::domain_error("metric: --y is required for kind '" + kind + "'");
        return load_path(y_file);
    };

    MetricReport rep;
    if (kind == "uniform") {
        rep = MetricReport::exact(uniform_distance(x, need_y()));
    } else if (kind == "d") {
        rep = skorokhod_distance(require_step(x, "x"), require_step(need_y(), "y"), tol);
    } else if (kind == "dcirc") {
        rep = skorokhod_circ_distance(require_step(x, "x"), require_step(need_y(), "y"), tol);
    } else if (kind == "modulus") {
        rep = MetricReport::exact(modulus(x, need_delta()));
    } else if (kind == "two-sided") {
        rep = MetricReport::exact(two_sided_modulus(x, need_delta()));
    } else if (kind == "wprime") {
        const double d = need_delta();
        if (const PiecewiseLinearPath* pl = std::get_if<PiecewiseLinearPath>(&x)) {
            const SparseModulusReport r = sparse_modulus_w_prime_report(*pl, d, tol);
            rep = MetricReport{r.value, r.lower_bound, r.upper_bound, std::nullopt};
        } else {
            rep = MetricReport::exact(sparse_modulus_w_prime(x, d, tol));
        }
    } else {
        throw std::domain_error("metric: unknown kind '" + kind + "'");
    }
    emit({{"value", rep.value}, {"lower_bound", rep.lower_bound}, {"upper_bound", rep.upper_bound}});
    return 0;
}

int run_prokhorov(const std::string& mu_file, const std::string& nu_file, bool oracle) {
    const DiscreteMeasure mu = load_measure(mu_file);
    const DiscreteMeasure nu = load_measure(nu_file);
    const ProkhorovResult res = prokhorov_distance(mu, nu);
    res.certificate.validate(mu, nu, Norm::sup);
    nlohmann::json out{{"rho", res.rho}, {"epsilon_certificate", res.certificate.epsilon()}};
    if (oracle) {
        const double truth = prokhorov_oracle(mu, nu);
        out["oracle"] = truth;
        if (std::abs(truth - res.rho) > 1e-9) {
            std::cerr << "pathspace: prokhorov solver disagrees with the enumeration oracle ("
                      << res.rho << " vs " << truth << ")\n";
            emit(out);
            return 1;
        }
    }
    emit(out);
    return 0;
}

int run_approx(const std::string& kind, int level, const std::string& values_file,
               std::optional<double> taper_m, std::optional<double> restrict_t,
               const std::string& out_file) {
    const std::vector<double> z = load_numbers(values_file);
    auto build = [&]() -> AnyPath {
        if (kind == "pl" || kind == "step") {
            if (level < 0 || level > 30) {
                throw std::domain_error("approx: --level must lie in [0, 30]");
            }
            const std::size_t expect = (std::size_t{1} << level) + 1;
            if (z.size() != expect) {
                throw std::domain_error("approx: kind '" + kind + "' at level " +
                                        std::to_string(level) + " needs " + std::to_string(expect) +
                                        " values, got " + std::to_string(z.size()));
            }
            if (kind == "pl") return AnyPath{linear_interpolant(z)};
            return AnyPath{step_interpolant(z)};
        }
        if (kind == "halfline") return AnyPath{halfline_step_interpolant(z, level)};
        throw std::domain_error("approx: unknown kind '" + kind + "'");
    };
    AnyPath path = build();
    // Flags compose in this order; a taper after a restriction cannot work
    // (tapering needs the whole half line), and restricting past the taper
    // horizon is rejected by restrict itself.
    if (taper_m) path = AnyPath{taper(path, *taper_m)};
    if (restrict_t) path = restrict(path, *restrict_t);
    const std::string text = to_json(path);
    if (out_file.empty()) {
        std::cout << text << "\n";
    } else {
        save_path(path, out_file);
    }
    return 0;
}

int run_sample(const std::string& process, const std::vector<double>& times, std::size_t n,
               std::uint64_t seed, double rate, double jump_mean, double jump_sd,
               const std::string& out_file) {
    ProcessSampler sampler = brownian_sampler(seed);
    if (process == "brownian") {
        // already built
    } else if (process == "poisson") {
        sampler = poisson_sampler(rate, seed);
    } else if (process == "compound-poisson") {
        sampler = compound_poisson_sampler(rate, jump_mean, jump_sd, seed);
    } else {
        throw std::domain_error("sample: unknown process '" + process + "'");
    }
    const EmpiricalFdd fdd = sample_fdd(sampler, times, n);
    if (out_file.empty()) {
        fdd_to_csv(fdd, std::cout);
    } else {
        std::ofstream out(out_file, std::ios::binary);
        if (!out) throw std::runtime_error("cannot open '" + out_file + "'");
        fdd_to_csv(fdd, out);
    }
    return 0;
}

int run_experiment_cmd(const std::string& config_file, const std::string& out_file,
                       const std::string& json_file) {
    const nlohmann::json j = nlohmann::json::parse(read_text_file(config_file));
    const ExperimentConfig cfg = config_from_json(j);
    const ConvergenceReport report = run_experiment(cfg);
    write_text_file(out_file, report_to_csv(report));
    if (!json_file.empty()) {
        write_text_file(json_file, report_to_json(report).dump(2) + "\n");
    }
    return any_flagged(report) ? 2 : 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"pathspace: Prokhorov-metric fitting, path-space metrics, and "
                 "convergence experiments for stochastic process approximants"};
    app.require_subcommand(1);

    // metric
    std::string m_kind, m_x, m_y;
    std::optional<double> m_delta;
    double m_tol = 1e-3;
    CLI::App* metric_cmd = app.add_subcommand(
        "metric", "Evaluate a path metric or modulus; prints {value, lower_bound, upper_bound}");
    metric_cmd->add_option("--kind", m_kind, "uniform|d|dcirc|wprime|modulus|two-sided")->required();
    metric_cmd->add_option("--x", m_x, "first path (JSON file)")->required();
    metric_cmd->add_option("--y", m_y, "second path (JSON file); pairwise kinds only");
    metric_cmd->add_option("--delta", m_delta, "gap parameter for the modulus kinds");
    metric_cmd->add_option("--tol", m_tol,
                           "Skorokhod search tolerance / w' lattice resolution (default 1e-3)");

    // prokhorov
    std::string p_mu, p_nu;
    bool p_oracle = false;
    CLI::App* prokhorov_cmd = app.add_subcommand(
        "prokhorov", "Exact Prokhorov distance between w,x1..xk CSV measures");
    prokhorov_cmd->add_option("--mu", p_mu, "first measure (CSV file)")->required();
    prokhorov_cmd->add_option("--nu", p_nu, "second measure (CSV file)")->required();
    prokhorov_cmd->add_flag("--oracle", p_oracle,
                            "cross-check against the subset-enumeration oracle (<= 14 atoms)");

    // approx
    std::string a_kind, a_values, a_out;
    int a_level = 0;
    std::optional<double> a_taper, a_restrict;
    CLI::App* approx_cmd = app.add_subcommand(
        "approx", "Build a dyadic interpolant of a value grid; prints path JSON");
    approx_cmd->add_option("--kind", a_kind, "pl|step|halfline")->required();
    approx_cmd->add_option("--level", a_level, "dyadic level n")->required();
    approx_cmd->add_option("--values", a_values, "file of grid values (whitespace/comma separated)")
        ->required();
    approx_cmd->add_option("--taper", a_taper, "taper to [0, m]: identity on [0, m-1], 0 at m");
    approx_cmd->add_option("--restrict", a_restrict, "restrict the domain to [0, t] (after taper)");
    approx_cmd->add_option("--out", a_out, "write the path JSON here instead of stdout");

    // sample
    std::string s_process = "brownian", s_out;
    std::vector<double> s_times;
    std::size_t s_n = 10000;
    std::uint64_t s_seed = 0;
    double s_rate = 1.0, s_jump_mean = 0.0, s_jump_sd = 1.0;
    CLI::App* sample_cmd = app.add_subcommand(
        "sample", "Draw finite-dimensional samples of a stock process; writes CSV");
    sample_cmd->add_option("--process", s_process, "brownian|poisson|compound-poisson");
    sample_cmd->add_option("--times", s_times, "sampling times, comma separated")
        ->required()
        ->delimiter(',');
    sample_cmd->add_option("--n", s_n, "number of rows (default 10000)");
    sample_cmd->add_option("--seed", s_seed, "RNG seed (default 0)");
    sample_cmd->add_option("--rate", s_rate, "jump rate for the Poisson kinds (default 1)");
    sample_cmd->add_option("--jump-mean", s_jump_mean, "compound-Poisson jump mean (default 0)");
    sample_cmd->add_option("--jump-sd", s_jump_sd, "compound-Poisson jump sd (default 1)");
    sample_cmd->add_option("--out", s_out, "output CSV file (default stdout)");

    // experiment
    std::string e_config, e_out, e_json;
    CLI::App* experiment_cmd = app.add_subcommand(
        "experiment", "Run a convergence experiment from a JSON config; writes the report CSV");
    experiment_cmd->add_option("--config", e_config, "experiment config (JSON file)")->required();
    experiment_cmd->add_option("--out", e_out, "report CSV file")->required();
    experiment_cmd->add_option("--json", e_json, "also write the full JSON report here");

    CLI11_PARSE(app, argc, argv);

    try {
        if (metric_cmd->parsed()) return run_metric(m_kind, m_x, m_y, m_delta, m_tol);
        if (prokhorov_cmd->parsed()) return run_prokhorov(p_mu, p_nu, p_oracle);
        if (approx_cmd->parsed()) {
            return run_approx(a_kind, a_level, a_values, a_taper, a_restrict, a_out);
        }
        if (sample_cmd->parsed()) {
            return run_sample(s_process, s_times, s_n, s_seed, s_rate, s_jump_mean, s_jump_sd, s_out);
        }
        if (experiment_cmd->parsed()) return run_experiment_cmd(e_config, e_out, e_json);
    } catch (const std::exception& e) {
        std::cerr << "pathspace: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
