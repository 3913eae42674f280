#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <string>
#include <vector>

#include "pathspace/path_io.hpp"
#include "pathspace/paths.hpp"
#include "pathspace/rng.hpp"

using namespace pathspace;

namespace {

/// Random step path with breakpoints on the 1/64 lattice, for invariant sweeps.
StepPath random_step_path(Rng& rng) {
    std::vector<double> bs{0.0};
    for (int k = 1; k < 64; ++k) {
        if (rng.u01() < 0.15) bs.push_back(static_cast<double>(k) / 64.0);
    }
    std::vector<double> vs;
    vs.reserve(bs.size());
    for (std::size_t i = 0; i < bs.size(); ++i) vs.push_back(2.0 * rng.u01() - 1.0);
    return StepPath(std::move(bs), std::move(vs), 1.0);
}

} // namespace

TEST_CASE("step path evaluation is right-continuous at breakpoints") {
    const StepPath x({0.0, 0.5}, {1.0, 2.0}, 1.0);
    CHECK(x.eval(0.5) == 2.0);
    CHECK(x.eval(0.49) == 1.0);
    CHECK(x.eval(0.0) == 1.0);
    CHECK(x.eval(1.0) == 2.0);
}

TEST_CASE("piecewise linear evaluation interpolates between knots") {
    const PiecewiseLinearPath x({0.0, 1.0}, {0.0, 1.0});
    CHECK(x.eval(0.25) == 0.25);
    CHECK(x.eval(0.0) == 0.0);
    CHECK(x.eval(1.0) == 1.0);
}

TEST_CASE("step path left limits") {
    const StepPath x({0.0, 0.5}, {1.0, 2.0}, 1.0);
    CHECK(x.left_limit(0.5) == 1.0);
    CHECK(x.left_limit(0.7) == 2.0);
    const StepPath c({0.0}, {3.0}, 1.0);
    CHECK(c.left_limit(1.0) == 3.0);
    CHECK_THROWS_AS(x.left_limit(0.0), std::domain_error);
    CHECK_THROWS_AS(x.left_limit(1.5), std::domain_error);
}

TEST_CASE("evaluation outside the domain is rejected") {
    const StepPath x({0.0, 0.5}, {1.0, 2.0}, 1.0);
    CHECK_THROWS_AS(x.eval(-0.1), std::domain_error);
    CHECK_THROWS_AS(x.eval(1.1), std::domain_error);
    const PiecewiseLinearPath p({0.0, 1.0}, {0.0, 1.0});
    CHECK_THROWS_AS(p.eval(-0.1), std::domain_error);
    CHECK_THROWS_AS(p.eval(1.1), std::domain_error);
}

TEST_CASE("construction validates breakpoints and values") {
    CHECK_THROWS_AS(StepPath({0.5}, {1.0}, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(StepPath({0.0, 0.5, 0.5}, {1.0, 2.0, 3.0}, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(StepPath({0.0, 0.5}, {1.0}, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(StepPath({0.0, 0.5}, {1.0, 2.0}, 0.4), std::invalid_argument);
    CHECK_THROWS_AS(PiecewiseLinearPath({0.0}, {1.0}), std::invalid_argument);
    CHECK_THROWS_AS(PiecewiseLinearPath({0.1, 1.0}, {0.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(PiecewiseLinearPath({0.0, 1.0}, {0.0}), std::invalid_argument);
}

TEST_CASE("normalize merges duplicate consecutive values") {
    const StepPath x({0.0, 0.25, 0.5}, {1.0, 1.0, 2.0}, 1.0);
    const StepPath n = x.normalize();
    CHECK(n.breakpoints() == std::vector<double>{0.0, 0.5});
    CHECK(n.values() == std::vector<double>{1.0, 2.0});
    CHECK(n.horizon() == 1.0);
    CHECK(n.jump_indices().size() == 1);
}

TEST_CASE("dyadic grid points and pitch") {
    const DyadicGrid g(2, 1.0);
    CHECK(g.pitch() == 0.25);
    CHECK(g.points() == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
    CHECK(g.point_count() == 5);

    const DyadicGrid off(2, 0.9);
    CHECK(off.points() == std::vector<double>{0.0, 0.25, 0.5, 0.75, 0.9});
    CHECK_THROWS_AS(DyadicGrid(-1, 1.0), std::domain_error);
    CHECK_THROWS_AS(DyadicGrid(2, 0.0), std::domain_error);
}

TEST_CASE("reparametrization validation and basic maps") {
    CHECK_THROWS_AS(Reparametrization({0.1, 1.0}, {0.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(Reparametrization({0.0, 1.0}, {0.0, 0.9}), std::invalid_argument);
    CHECK_THROWS_AS(Reparametrization({0.0, 0.5, 0.4, 1.0}, {0.0, 0.3, 0.6, 1.0}),
                    std::invalid_argument);

    const Reparametrization id = Reparametrization::identity(1.0);
    CHECK(id.eval(0.37) == 0.37);
    CHECK(id.max_time_distortion() == 0.0);
    CHECK(id.log_slope_norm() == 0.0);

    const Reparametrization lam({0.0, 0.4, 1.0}, {0.0, 0.5, 1.0});
    CHECK(lam.eval(0.4) == 0.5);
    CHECK(lam.max_time_distortion() == Catch::Approx(0.1).margin(1e-15));
    CHECK(lam.inverse().eval(0.5) == 0.4);
}

TEST_CASE("identity reparametrization leaves paths unchanged") {
    const Reparametrization id = Reparametrization::identity(1.0);

    const StepPath x({0.0, 0.25, 0.7}, {0.0, 1.5, -2.0}, 1.0);
    const StepPath xi = apply_reparam(x, id);
    CHECK(xi.breakpoints() == x.breakpoints());
    CHECK(xi.values() == x.values());

    const PiecewiseLinearPath p({0.0, 0.3, 1.0}, {0.0, 0.7, 0.2});
    const PiecewiseLinearPath pi = apply_reparam(p, id);
    for (int k = 0; k <= 100; ++k) {
        const double t = static_cast<double>(k) / 100.0;
        CHECK(pi.eval(t) == Catch::Approx(p.eval(t)).margin(1e-15));
    }
}

TEST_CASE("jump times relocate through the inverse time change") {
    // x has its jump at 0.5; lambda maps 0.4 -> 0.5, so x(lambda(t)) jumps at 0.4.
    const StepPath x({0.0, 0.5}, {0.0, 1.0}, 1.0);
    const Reparametrization lam({0.0, 0.4, 1.0}, {0.0, 0.5, 1.0});
    const StepPath moved = apply_reparam(x, lam);
    CHECK(moved.breakpoints() == std::vector<double>{0.0, 0.4});
    CHECK(moved.values() == std::vector<double>{0.0, 1.0});
}

TEST_CASE("piecewise linear composition picks up the time-change knots") {
    // Identity path through lambda with knots {0, 0.5, 1} -> {0, 0.25, 1}
    // gives the piecewise-linear path through (0.5, 0.25).
    const PiecewiseLinearPath ident({0.0, 1.0}, {0.0, 1.0});
    const Reparametrization lam({0.0, 0.5, 1.0}, {0.0, 0.25, 1.0});
    const PiecewiseLinearPath composed = apply_reparam(ident, lam);
    CHECK(composed.eval(0.5) == 0.25);
    CHECK(composed.eval(0.0) == 0.0);
    CHECK(composed.eval(1.0) == 1.0);
    bool has_half = false;
    for (double k : composed.knots()) has_half = has_half || (k == 0.5);
    CHECK(has_half);
}

TEST_CASE("horizon mismatch between path and time change is rejected") {
    const StepPath x({0.0, 0.5}, {0.0, 1.0}, 2.0);
    const Reparametrization lam = Reparametrization::identity(1.0);
    CHECK_THROWS_AS(apply_reparam(x, lam), std::domain_error);
}

TEST_CASE("step evaluation equals its right limit") {
    Rng rng(2024);
    for (int rep = 0; rep < 50; ++rep) {
        const StepPath x = random_step_path(rng);
        for (double b : x.breakpoints()) {
            for (int k = 10; k <= 20; ++k) {
                const double h = std::ldexp(1.0, -k);
                if (b + h > 1.0) continue;
                // Lattice gaps are at least 1/64 > h, so t + h stays in the segment.
                CHECK(x.eval(b + h) == x.eval(b));
            }
        }
    }
}

TEST_CASE("reparametrization round trip recovers the path") {
    const Reparametrization lam({0.0, 0.25, 1.0}, {0.0, 0.5, 1.0});
    Rng rng(77);
    for (int rep = 0; rep < 20; ++rep) {
        const StepPath x = random_step_path(rng);
        const StepPath rt = apply_reparam(apply_reparam(x, lam), lam.inverse());
        for (int k = 0; k < 1000; ++k) {
            const double t = static_cast<double>(k) / 999.0;
            CHECK(std::abs(rt.eval(t) - x.eval(t)) <= 1e-12);
        }
    }

    const PiecewiseLinearPath p({0.0, 0.3, 1.0}, {0.0, 0.7, 0.2});
    const PiecewiseLinearPath prt = apply_reparam(apply_reparam(p, lam), lam.inverse());
    for (int k = 0; k < 1000; ++k) {
        const double t = static_cast<double>(k) / 999.0;
        CHECK(std::abs(prt.eval(t) - p.eval(t)) <= 1e-12);
    }
}

TEST_CASE("taper profile shape") {
    const TaperProfile g(2.0);
    CHECK(g.eval(0.0) == 1.0);
    CHECK(g.eval(1.0) == 1.0);
    CHECK(g.eval(1.5) == 0.5);
    CHECK(g.eval(2.0) == 0.0);
    CHECK(g.eval(3.0) == 0.0);
    CHECK_THROWS_AS(TaperProfile(0.5), std::domain_error);
    CHECK_THROWS_AS(g.eval(-0.1), std::domain_error);
}

TEST_CASE("tapered step path evaluates the product form") {
    const StepPath base({0.0, 0.5, 1.25}, {1.0, 2.0, 4.0}, kInfiniteHorizon);
    const TaperedStepPath tp(base, TaperProfile(2.0));
    CHECK(tp.horizon() == 2.0);
    CHECK(tp.eval(0.75) == 2.0);           // profile 1, base 2
    CHECK(tp.eval(1.5) == 0.5 * 4.0);      // profile 0.5, base 4
    CHECK(tp.eval(2.0) == 0.0);
    CHECK(tp.left_limit(0.5) == 1.0);
    const TaperedStepPath cut = tp.restrict(1.5);
    CHECK(cut.horizon() == 1.5);
    CHECK(cut.eval(1.5) == 2.0);
    CHECK_THROWS_AS(tp.eval(2.5), std::domain_error);
}

TEST_CASE("path JSON round trips exactly") {
    // Finite-horizon step path with a value that needs all 17 digits.
    const StepPath x({0.0, 0.5}, {0.1 + 0.2, 2.0}, 1.5);
    const std::string sx = to_json(AnyPath(x));
    const AnyPath rx = path_from_json_text(sx);
    const StepPath& rxs = std::get<StepPath>(rx);
    CHECK(rxs.breakpoints() == x.breakpoints());
    CHECK(rxs.values() == x.values());
    CHECK(rxs.horizon() == x.horizon());

    // Half-line step path: horizon serialized as the string "inf".
    const StepPath half({0.0, 1.0}, {0.0, 3.0}, kInfiniteHorizon);
    const std::string sh = to_json(AnyPath(half));
    CHECK(sh.find("\"horizon\":\"inf\"") != std::string::npos);
    const StepPath rhs = std::get<StepPath>(path_from_json_text(sh));
    CHECK(rhs.infinite_horizon());
    CHECK(rhs.values() == half.values());

    // Piecewise-linear path.
    const PiecewiseLinearPath p({0.0, 0.3, 1.0}, {0.0, 0.7, 0.2});
    const PiecewiseLinearPath rp =
        std::get<PiecewiseLinearPath>(path_from_json_text(to_json(AnyPath(p))));
    CHECK(rp.knots() == p.knots());
    CHECK(rp.values() == p.values());

    // Tapered path: extension kind with the base path nested inside.
    const TaperedStepPath tp(half, TaperProfile(2.0));
    const std::string st = to_json(AnyPath(tp));
    CHECK(st.find("\"kind\":\"tapered\"") != std::string::npos);
    const TaperedStepPath rt = std::get<TaperedStepPath>(path_from_json_text(st));
    for (int k = 0; k <= 40; ++k) {
        const double t = static_cast<double>(k) / 20.0;
        CHECK(rt.eval(t) == tp.eval(t));
    }
}

TEST_CASE("malformed path JSON is rejected") {
    CHECK_THROWS_AS(path_from_json_text("{\"kind\":\"spline\",\"knots\":[0],\"values\":[0]}"),
                    std::runtime_error);
    CHECK_THROWS_AS(path_from_json_text("[1,2,3]"), std::runtime_error);
    CHECK_THROWS_AS(
        path_from_json_text("{\"kind\":\"pl\",\"horizon\":2,\"knots\":[0,1],\"values\":[0,1]}"),
        std::runtime_error);
}
