#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "fixtures.hpp"
#include "terrace/pde_sim.hpp"

using namespace terrace;
using Catch::Approx;

namespace {

TerraceFunction terrace_function(const ReactionSpec& spec, double gap = 1.0) {
    return make_terrace_function(spec, build_terrace(spec, Tolerances{}), gap);
}

// Example A front in closed form, support [0, pi/2].
double phi_a(double z) {
    if (z <= 0.0) return 1.0;
    if (z >= std::numbers::pi / 2) return 0.0;
    return 0.5 + 0.5 * std::cos(2.0 * z);
}

double sup_after_shift(const PdeResult& r, double shift) {
    double worst = 0.0;
    for (std::size_t i = 0; i < r.x.size(); ++i) {
        worst = std::max(worst, std::abs(r.snapshots.back().u[i] - phi_a(r.x[i] - shift)));
    }
    return worst;
}

}  // namespace

TEST_CASE("stable constants are steady", "[pde_sim]") {
    const auto b = fixtures::example_b();
    for (Scheme scheme : {Scheme::ExplicitEuler, Scheme::SplitImplicit}) {
        PdeConfig cfg;
        cfg.x_min = -1.0;
        cfg.x_max = 1.0;
        cfg.dx = 0.02;
        cfg.t_final = 0.5;
        cfg.scheme = scheme;
        cfg.ic = TableIC{{{-1.0, 0.5}, {1.0, 0.5}}};
        const auto r = simulate(b, cfg);
        for (double v : r.snapshots.back().u) CHECK(v == 0.5);
    }
}

TEST_CASE("explicit scheme enforces the CFL bound", "[pde_sim]") {
    PdeConfig cfg;
    cfg.scheme = Scheme::ExplicitEuler;
    cfg.dx = 0.01;
    cfg.dt = 0.5 * cfg.dx * cfg.dx;  // above 0.4 dx^2 / 2
    CHECK_THROWS_WITH(simulate(fixtures::example_a(), cfg), Catch::Matchers::StartsWith("StabilityViolation"));
    cfg.dt = 0.0;
    CHECK(cfg.effective_dt() == Approx(0.4 * 1e-4 / 2));
}

TEST_CASE("configuration errors", "[pde_sim]") {
    const auto a = fixtures::example_a();
    PdeConfig cfg;
    cfg.x_max = cfg.x_min;
    CHECK_THROWS_WITH(simulate(a, cfg), Catch::Matchers::StartsWith("InvalidArgument"));
    cfg = PdeConfig{};
    cfg.ic = TableIC{{{0.0, 1.0}, {0.0, 0.0}}};
    CHECK_THROWS_WITH(simulate(a, cfg), Catch::Matchers::StartsWith("InvalidArgument"));
    cfg = PdeConfig{};
    cfg.ic = TableIC{{{0.0, 20.0}, {1.0, 20.0}}};
    CHECK_THROWS_WITH(simulate(a, cfg), Catch::Matchers::StartsWith("BlowUp"));
}

TEST_CASE("both schemes keep the example A front in place", "[pde_sim]") {
    const auto a = fixtures::example_a();
    const auto tf = terrace_function(a);
    for (Scheme scheme : {Scheme::ExplicitEuler, Scheme::SplitImplicit}) {
        PdeConfig cfg;
        cfg.x_min = -2.0;
        cfg.x_max = 3.5;
        cfg.dx = 0.01;
        cfg.t_final = 0.5;
        cfg.scheme = scheme;
        cfg.snapshot_interval = 0.1;
        cfg.ic = TerraceSnapshotIC{tf};
        const auto r = simulate(a, cfg);
        INFO(to_string(scheme));
        CHECK(r.snapshots.size() == 6);
        CHECK(residual_vs_terrace(r, tf) <= 1e-2);
    }
}

TEST_CASE("example A snapshot run stays on the stationary profile", "[pde_sim]") {
    const auto a = fixtures::example_a();
    const auto tf = terrace_function(a);
    PdeConfig cfg;
    cfg.x_min = -2.0;
    cfg.x_max = 3.5;
    cfg.dx = 2e-3;
    cfg.t_final = 1.0;
    cfg.ic = TerraceSnapshotIC{tf};
    const auto r = simulate(a, cfg);
    double worst = 0.0;
    for (std::size_t i = 0; i < r.x.size(); ++i) worst = std::max(worst, std::abs(r.snapshots.back().u[i] - phi_a(r.x[i])));
    CHECK(worst <= 5e-3);
}

TEST_CASE("example A step converges to the compact front and does not move", "[pde_sim]") {
    const auto a = fixtures::example_a();
    PdeConfig cfg;
    cfg.x_min = -5.0;
    cfg.x_max = 5.0;
    cfg.dx = 2e-3;
    cfg.t_final = 20.0;
    cfg.snapshot_interval = 0.5;
    cfg.ic = StepIC{0.0, 1.0, 0.0};
    const auto r = simulate(a, cfg);

    // optimal shift: coarse scan, then golden-section refinement
    double best = -2.0;
    for (double s = -2.0; s <= 1.0; s += 0.01) {
        if (sup_after_shift(r, s) < sup_after_shift(r, best)) best = s;
    }
    double lo = best - 0.01, hi = best + 0.01;
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    for (int it = 0; it < 40; ++it) {
        const double m1 = hi - g * (hi - lo), m2 = lo + g * (hi - lo);
        if (sup_after_shift(r, m1) < sup_after_shift(r, m2)) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    CHECK(sup_after_shift(r, 0.5 * (lo + hi)) <= 1e-2);

    const auto fit = measure_front_speed(r, 0.5, 10.0, 20.0);
    CHECK(std::abs(fit.speed) <= 5e-3);
    CHECK(fit.r2 >= 0.0);
    CHECK(fit.r2 <= 1.0);
}

TEST_CASE("example C fronts separate at the computed speeds on a coarse grid", "[pde_sim]") {
    const auto c = fixtures::example_c();
    const auto t = build_terrace(c, Tolerances{});
    PdeConfig cfg;
    cfg.x_min = -12.0;
    cfg.x_max = 12.0;
    cfg.dx = 5e-3;
    cfg.t_final = 10.0;
    cfg.snapshot_interval = 0.25;
    cfg.track_levels = {0.75, 0.25};
    const auto r = simulate(c, cfg);
    const auto upper = measure_front_speed(r, 0.75, 5.0, 10.0);
    const auto lower = measure_front_speed(r, 0.25, 5.0, 10.0);
    CHECK(upper.speed == Approx(t.fronts[0].speed).epsilon(0.02));
    CHECK(lower.speed == Approx(t.fronts[1].speed).epsilon(0.02));
    CHECK(upper.r2 > 0.999);
    REQUIRE(r.front_tracks.size() == 2);
    CHECK(r.front_tracks[0].points.size() == r.snapshots.size());
}

TEST_CASE("front speed errors", "[pde_sim]") {
    const auto a = fixtures::example_a();
    PdeConfig cfg;
    cfg.x_min = -2.0;
    cfg.x_max = 2.0;
    cfg.dx = 0.01;
    cfg.t_final = 0.2;
    cfg.snapshot_interval = 0.05;
    cfg.ic = TableIC{{{-2.0, 0.0}, {-0.5, 0.0}, {0.0, 1.0}, {0.5, 0.0}, {2.0, 0.0}}};
    const auto r = simulate(a, cfg);
    CHECK_THROWS_WITH(measure_front_speed(r, 0.9, 0.0, 0.2), Catch::Matchers::StartsWith("MultipleCrossings"));
    CHECK_THROWS_WITH(measure_front_speed(r, 1.5, 0.0, 0.2), Catch::Matchers::StartsWith("LevelNotCrossed"));
    CHECK_THROWS_WITH(measure_front_speed(r, 0.5, 5.0, 6.0), Catch::Matchers::StartsWith("LevelNotCrossed"));

    const auto tf = terrace_function(a);
    CHECK_THROWS_WITH(residual_vs_terrace(r, tf), Catch::Matchers::StartsWith("InvalidArgument"));
    PdeResult bad = r;
    bad.from_terrace_snapshot = true;
    bad.snapshots[1].u.pop_back();
    CHECK_THROWS_WITH(residual_vs_terrace(bad, tf), Catch::Matchers::StartsWith("GridMismatch"));
}

TEST_CASE("level crossings interpolate linearly", "[pde_sim]") {
    const std::vector<double> x{0.0, 1.0, 2.0, 3.0};
    const auto one = level_crossings(x, {1.0, 0.8, 0.2, 0.0}, 0.5);
    REQUIRE(one.size() == 1);
    CHECK(one[0] == Approx(1.5));
    CHECK(level_crossings(x, {1.0, 0.5, 0.0, 0.0}, 0.5) == std::vector<double>{1.0});
    CHECK(level_crossings(x, {0.0, 1.0, 0.0, 1.0}, 0.5).size() == 3);
    CHECK(level_crossings(x, {1.0, 1.0, 1.0, 1.0}, 0.5).empty());
}

TEST_CASE("comparison principle and maximum principle", "[pde_sim][property]") {
    const auto c = fixtures::example_c();
    auto run = [&](double location) {
        PdeConfig cfg;
        cfg.x_min = -6.0;
        cfg.x_max = 6.0;
        cfg.dx = 4e-3;
        cfg.t_final = 3.0;
        cfg.snapshot_interval = 0.25;
        cfg.ic = StepIC{location, 1.0, 0.0};
        return simulate(c, cfg);
    };
    const auto u = run(0.0);
    const auto v = run(0.7);  // v0 >= u0 everywhere
    const double slack = 10.0 * u.dx;
    REQUIRE(u.snapshots.size() == v.snapshots.size());
    for (std::size_t k = 0; k < u.snapshots.size(); ++k) {
        for (std::size_t i = 0; i < u.x.size(); ++i) {
            CHECK(u.snapshots[k].u[i] <= v.snapshots[k].u[i] + slack);
            CHECK(u.snapshots[k].u[i] >= -slack);
            CHECK(u.snapshots[k].u[i] <= 1.0 + slack);
        }
    }
}

TEST_CASE("compact waves arrive in finite time", "[pde_sim][property]") {
    // smooth data below 1 everywhere; the platform value is reached exactly
    const auto a = fixtures::example_a();
    std::vector<std::pair<double, double>> table;
    for (double x = -8.0; x <= 8.0; x += 0.01) table.emplace_back(x, 0.5 * (1.0 - std::tanh(x)));
    PdeConfig cfg;
    cfg.x_min = -8.0;
    cfg.x_max = 8.0;
    cfg.dx = 4e-3;
    cfg.t_final = 5.0;
    cfg.ic = TableIC{table};
    cfg.boundary = Dirichlet{1.0, 0.0};
    const auto r = simulate(a, cfg);
    auto covered = [&](const std::vector<double>& u) {
        for (std::size_t i = 0; i < r.x.size(); ++i) {
            if (r.x[i] >= -3.0 && r.x[i] <= -1.5 && !(u[i] > 1.0 - 1e-6)) return false;
        }
        return true;
    };
    CHECK_FALSE(covered(r.snapshots.front().u));
    CHECK(covered(r.snapshots.back().u));
}

TEST_CASE("refinement reduces the example B residual", "[pde_sim][property]") {
    const auto b = fixtures::example_b();
    const auto tf = terrace_function(b);
    auto residual = [&](double dx) {
        PdeConfig cfg;
        cfg.x_min = -1.5;
        cfg.x_max = 3.5;
        cfg.dx = dx;
        cfg.t_final = 0.5;
        cfg.snapshot_interval = 0.1;
        cfg.ic = TerraceSnapshotIC{tf};
        return residual_vs_terrace(simulate(b, cfg), tf);
    };
    const double coarse = residual(8e-3);
    const double fine = residual(4e-3);
    CHECK(coarse / fine >= 1.5);
}

TEST_CASE("simulation is deterministic", "[pde_sim][property]") {
    PdeConfig cfg;
    cfg.x_min = -3.0;
    cfg.x_max = 3.0;
    cfg.dx = 0.01;
    cfg.t_final = 1.0;
    const auto r1 = simulate(fixtures::example_c(), cfg);
    const auto r2 = simulate(fixtures::example_c(), cfg);
    CHECK(r1.snapshots.back().u == r2.snapshots.back().u);
    CHECK(snapshot_csv(r1, r1.snapshots.back()).rfind("x,u\n", 0) == 0);
    FrontTrack tr{0.5, {{0.0, 1.0}}};
    CHECK(track_csv(tr) == "t,x_level\n0,1\n");
}
