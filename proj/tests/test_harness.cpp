#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <string>
#include <variant>
#include <vector>

#include "pathspace/experiment.hpp"

using namespace pathspace;

namespace {

ExperimentConfig constant_config() {
    ExperimentConfig cfg;
    cfg.target = deterministic_sampler(StepPath({0.0}, {2.0}, kInfiniteHorizon));
    cfg.space = SpaceKind::c01;
    cfg.levels = {2, 3};
    cfg.fdd_times = {0.3, 0.7};
    cfg.seed = 5;
    cfg.fit_budget = 16;
    return cfg;
}

ReportRow sample_row() {
    ReportRow row;
    row.level = 4;
    row.probe_set = "0.3;0.7";
    row.rho_hat = 0.125;
    row.rho_boot_hi = 0.25;
    row.delta_m = 0.5;
    row.modulus_rho = 0.0625;
    row.two_sided_rho = 0.03125;
    row.sup_rho = 0.015625;
    row.endpoint_rho = 0.1 + 0.2;
    row.fit_support = 32;
    row.millis = 0;
    row.flagged = true;
    return row;
}

} // namespace

TEST_CASE("a constant target is matched perfectly at every level") {
    const ConvergenceReport rep = run_experiment(constant_config());
    REQUIRE(rep.rows.size() == 3); // one delta row at level 2, two at level 3
    CHECK(rep.rows[0].level == 2);
    CHECK(rep.rows[0].delta_m == 0.5);
    CHECK(rep.rows[1].level == 3);
    CHECK(rep.rows[1].delta_m == 0.5);
    CHECK(rep.rows[2].level == 3);
    CHECK(rep.rows[2].delta_m == 0.25);
    for (const ReportRow& row : rep.rows) {
        CHECK(row.probe_set == "0.3;0.7");
        CHECK(row.rho_hat == 0.0);
        CHECK(row.rho_boot_hi == 0.0);
        CHECK(row.modulus_rho == 0.0);
        CHECK(row.two_sided_rho == 0.0);
        CHECK(row.sup_rho == 0.0);
        CHECK(row.endpoint_rho == 0.0);
        CHECK(row.fit_support >= 1);
        CHECK(row.millis == 0);
        CHECK_FALSE(row.flagged);
    }
    CHECK_FALSE(any_flagged(rep));
}

TEST_CASE("report rows render to CSV with a fixed header") {
    ConvergenceReport rep;
    rep.rows.push_back(sample_row());
    const std::string csv = report_to_csv(rep);
    const std::string header =
        "level,probe_set,rho_hat,rho_boot_hi,delta_m,modulus_rho,two_sided_rho,sup_rho,"
        "fit_support,millis\n";
    REQUIRE(csv.substr(0, header.size()) == header);
    CHECK(csv.find("endpoint_rho") == std::string::npos);
    CHECK(csv.find("flagged") == std::string::npos);

    std::size_t lines = 0;
    for (char c : csv) {
        if (c == '\n') ++lines;
    }
    CHECK(lines == 2);
    CHECK(csv.find("4,0.3;0.7,0.125,0.25,0.5,0.0625,0.03125,0.015625,32,0") != std::string::npos);

    CHECK_THROWS_AS(report_to_csv(ConvergenceReport{}), std::domain_error);
}

TEST_CASE("reports survive a JSON round trip") {
    ConvergenceReport rep;
    rep.rows.push_back(sample_row());
    ReportRow second = sample_row();
    second.level = 5;
    second.flagged = false;
    second.rho_hat = 0.0078125;
    rep.rows.push_back(second);

    const ConvergenceReport back = report_from_json(report_to_json(rep));
    CHECK(back == rep);

    CHECK_THROWS_AS(report_to_json(ConvergenceReport{}), std::domain_error);
    CHECK_THROWS_AS(report_from_json(nlohmann::json{{"rows", nlohmann::json::array()}}),
                    std::domain_error);
}

TEST_CASE("experiments are bit-reproducible") {
    const ConvergenceReport a = run_experiment(constant_config());
    const ConvergenceReport b = run_experiment(constant_config());
    CHECK(a == b);

    ExperimentConfig jumps;
    jumps.target = poisson_sampler(2.0, 1);
    jumps.space = SpaceKind::d01;
    jumps.levels = {2, 3};
    jumps.fdd_times = {0.3, 0.7};
    jumps.seed = 9;
    jumps.fit_budget = 64;
    const ConvergenceReport c = run_experiment(jumps);
    const ConvergenceReport d = run_experiment(jumps);
    CHECK(c == d);
    CHECK(report_to_csv(c) == report_to_csv(d));

    // Sanity for a stochastic target: probabilities stay probabilities.
    for (const ReportRow& row : c.rows) {
        CHECK(row.rho_hat >= 0.0);
        CHECK(row.rho_hat <= 1.0);
        CHECK(row.rho_boot_hi >= row.rho_hat);
        CHECK(row.rho_boot_hi <= 1.0);
        CHECK(row.modulus_rho >= 0.0);
        CHECK(row.modulus_rho <= 1.0);
        CHECK(row.two_sided_rho >= 0.0);
        CHECK(row.sup_rho >= 0.0);
        CHECK(row.millis == 0);
        CHECK(row.fit_support >= 1);
    }
}

TEST_CASE("config validation rejects each malformed field") {
    const ExperimentConfig good = constant_config();
    validate_experiment_config(good);

    ExperimentConfig cfg = good;
    cfg.levels = {};
    CHECK_THROWS_AS(validate_experiment_config(cfg), std::domain_error);
    cfg = good;
    cfg.levels = {1, 3};
    CHECK_THROWS_AS(validate_experiment_config(cfg), std::domain_error);
    cfg = good;
    cfg.levels = {2, 31};
    CHECK_THROWS_AS(validate_experiment_config(cfg), std::domain_error);
    cfg = good;
    cfg.levels = {3, 3};
    CHECK_THROWS_AS(validate_experiment_config(cfg), std::domain_error);

    cfg = good;
    cfg.fdd_times = {};
    CHECK_THROWS_AS(validate_experiment_config(cfg), std::domain_error);
    cfg = good;
    cfg.fdd_times = {0.5, 0.5};
    CHECK_THROWS_AS(validate_experiment_config(cfg), std::domain_error);
    cfg = good;
    cfg.fdd_times = {-0.1, 0.5};
    CHECK_THROWS_AS(validate_experiment_config(cfg), std::domain_error);
    cfg = good;
    cfg.fdd_times = {1.5};
    CHECK_THROWS_AS(validate_experiment_config(cfg), std::domain_error);

    cfg = good;
    cfg.replicas = 0;
    CHECK_THROWS_AS(validate_experiment_config(cfg), std::domain_error);
    cfg = good;
    cfg.replicas = 65;
    CHECK_THROWS_AS(validate_experiment_config(cfg), std::domain_error);

    cfg = good;
    cfg.fit_budget = 0;
    CHECK_THROWS_AS(validate_experiment_config(cfg), std::domain_error);

    cfg = good;
    cfg.eps_schedule = {0.5};
    CHECK_THROWS_AS(validate_experiment_config(cfg), std::domain_error);
    cfg = good;
    cfg.eps_schedule = {0.5, 0.0};
    CHECK_THROWS_AS(validate_experiment_config(cfg), std::domain_error);

    cfg = good;
    cfg.space = SpaceKind::dinf;
    cfg.levels = {3, 4};
    cfg.fdd_times = {0.3, 0.7};
    cfg.dinf_restrict = 5.0;
    CHECK_THROWS_AS(validate_experiment_config(cfg), std::domain_error);
    cfg.dinf_restrict = -1.0;
    CHECK_THROWS_AS(validate_experiment_config(cfg), std::domain_error);
    cfg.dinf_restrict = 1.5;
    validate_experiment_config(cfg);
    cfg.fdd_times = {0.3, 1.6};
    CHECK_THROWS_AS(validate_experiment_config(cfg), std::domain_error);
}

TEST_CASE("each space interpolates grid rows into its own path kind") {
    const std::vector<double> z{0.0, 1.0, 0.5, 0.25, 2.0};
    const AnyPath continuous = detail::statistic_path(SpaceKind::c01, z, 2, 1.5);
    CHECK(std::holds_alternative<PiecewiseLinearPath>(continuous));
    const AnyPath cadlag = detail::statistic_path(SpaceKind::d01, z, 2, 1.5);
    CHECK(std::holds_alternative<StepPath>(cadlag));

    const std::vector<double> zh(9, 1.0);
    const AnyPath halfline = detail::statistic_path(SpaceKind::dinf, zh, 2, 1.5);
    CHECK(path_horizon(halfline) == 1.5);
}

TEST_CASE("sampling grids match their space") {
    const std::vector<double> unit = level_grid_times(SpaceKind::c01, 2);
    CHECK(unit == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
    CHECK(level_grid_times(SpaceKind::d01, 2) == unit);

    const std::vector<double> half = level_grid_times(SpaceKind::dinf, 2);
    REQUIRE(half.size() == 9);
    CHECK(half.front() == 0.0);
    CHECK(half[1] == 0.25);
    CHECK(half.back() == 2.0);

    CHECK_THROWS_AS(level_grid_times(SpaceKind::c01, 31), std::domain_error);
}

TEST_CASE("report numbers use shortest round-trip formatting") {
    CHECK(detail::format_double(0.3) == "0.3");
    CHECK(detail::format_double(0.25) == "0.25");
    CHECK(detail::probe_label({0.3, 0.7}) == "0.3;0.7");
    CHECK(detail::probe_label({0.5}) == "0.5");
}

TEST_CASE("samplers parse from JSON") {
    const ProcessSampler p = sampler_from_json(
        nlohmann::json{{"process", "poisson"}, {"rate", 2.0}, {"seed", 3}});
    CHECK(p.id() == "poisson");
    CHECK(sample_fdd(p, {1.0}, 8).samples() ==
          sample_fdd(poisson_sampler(2.0, 3), {1.0}, 8).samples());

    const ProcessSampler det = sampler_from_json(nlohmann::json{
        {"process", "deterministic"}, {"breakpoints", {0.0, 0.5}}, {"values", {1.0, 2.0}}});
    CHECK(det.id() == "deterministic");
    CHECK(std::isinf(det.horizon()));

    const ProcessSampler cp = sampler_from_json(nlohmann::json{{"process", "compound-poisson"},
                                                               {"rate", 2.0},
                                                               {"jump_mean", 0.0},
                                                               {"jump_sd", 1.0},
                                                               {"seed", 1}});
    CHECK(cp.id() == "compound-poisson");

    CHECK_THROWS_AS(sampler_from_json(nlohmann::json{{"process", "levy"}}),
                    std::invalid_argument);
}

TEST_CASE("experiment configs parse from JSON") {
    const nlohmann::json j{{"target", {{"process", "brownian"}, {"seed", 1}}},
                           {"space", "C01"},
                           {"levels", {2, 3}},
                           {"fdd_times", {0.3, 0.7}},
                           {"replicas", 2},
                           {"seed", 5},
                           {"fit_budget", 128},
                           {"eps_schedule", {0.5, 0.4}},
                           {"timing", false}};
    const ExperimentConfig cfg = config_from_json(j);
    CHECK(cfg.target.id() == "brownian");
    CHECK(cfg.space == SpaceKind::c01);
    CHECK(cfg.levels == std::vector<int>{2, 3});
    CHECK(cfg.fdd_times == std::vector<double>{0.3, 0.7});
    CHECK(cfg.replicas == 2);
    CHECK(cfg.seed == 5);
    CHECK(cfg.fit_budget == 128);
    CHECK(cfg.eps_schedule == std::vector<double>{0.5, 0.4});
    CHECK_FALSE(cfg.timing);

    nlohmann::json bad = j;
    bad["space"] = "w01";
    CHECK_THROWS_AS(config_from_json(bad), std::invalid_argument);

    nlohmann::json invalid = j;
    invalid["levels"] = {1};
    CHECK_THROWS_AS(config_from_json(invalid), std::domain_error);

    nlohmann::json missing = j;
    missing.erase("target");
    CHECK_THROWS(config_from_json(missing));
}
