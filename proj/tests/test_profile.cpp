#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "fixtures.hpp"
#include "terrace/profile.hpp"

using namespace terrace;
using Catch::Approx;
using std::numbers::pi;

namespace {

struct Built {
    ReactionSpec spec;
    Terrace terrace;
};

Built build(ReactionSpec spec) {
    Terrace t = build_terrace(spec, Tolerances{});
    return {std::move(spec), std::move(t)};
}

const Built& example(char which) {
    static const Built a = build(fixtures::example_a());
    static const Built b = build(fixtures::example_b());
    static const Built c = build(fixtures::example_c());
    return which == 'A' ? a : which == 'B' ? b : c;
}

}  // namespace

TEST_CASE("z_of_p on example A", "[profile]") {
    const auto& [spec, t] = example('A');
    const Front& f = t.fronts[0];
    CHECK(z_of_p(spec, f, 1.0) == 0.0);
    CHECK(z_of_p(spec, f, 0.5) == Approx(pi / 4).margin(1e-6));
    CHECK(z_of_p(spec, f, 0.0) == Approx(pi / 2).margin(1e-6));
    CHECK_THROWS_WITH(z_of_p(spec, f, 1.2), Catch::Matchers::StartsWith("OutOfDomain"));
    CHECK_THROWS_WITH(z_of_p(spec, f, -0.1), Catch::Matchers::StartsWith("OutOfDomain"));
}

TEST_CASE("reconstructed profiles match the closed forms", "[profile]") {
    SECTION("example A: 1/2 + 1/2 cos 2z on [0, pi/2]") {
        const auto& [spec, t] = example('A');
        const Profile p = reconstruct_profile(spec, t.fronts[0], 2001);
        CHECK(p.width == Approx(pi / 2).margin(1e-6));
        double worst = 0.0;
        for (int i = 0; i <= 5000; ++i) {
            const double z = p.width * i / 5000.0;
            worst = std::max(worst, std::abs(p(z) - (0.5 + 0.5 * std::cos(2.0 * z))));
        }
        CHECK(worst <= 1e-6);
    }
    SECTION("example B: both widths pi/4, upper front 3/4 + 1/4 cos 4z") {
        const auto& [spec, t] = example('B');
        const Profile upper = reconstruct_profile(spec, t.fronts[0], 2001);
        const Profile lower = reconstruct_profile(spec, t.fronts[1], 2001);
        CHECK(upper.width == Approx(pi / 4).margin(1e-6));
        CHECK(lower.width == Approx(pi / 4).margin(1e-6));
        CHECK(upper(pi / 8) == Approx(0.75).margin(1e-6));
        CHECK(lower(pi / 8) == Approx(0.25).margin(1e-6));
    }
    SECTION("example C: widths from the shooting oracle") {
        const auto& [spec, t] = example('C');
        for (const auto& f : t.fronts) {
            CHECK(reconstruct_profile(spec, f, 2001).width == Approx(1.67412487041).margin(1e-6));
        }
    }
}

TEST_CASE("two samples give exactly the endpoints", "[profile]") {
    const auto& [spec, t] = example('A');
    const Profile p = reconstruct_profile(spec, t.fronts[0], 2);
    REQUIRE(p.z.size() == 2);
    CHECK(p.z[0] == 0.0);
    CHECK(p.phi[0] == 1.0);
    CHECK(p.z[1] == p.width);
    CHECK(p.phi[1] == 0.0);
    CHECK_THROWS_WITH(reconstruct_profile(spec, t.fronts[0], 1), Catch::Matchers::StartsWith("InvalidArgument"));
}

TEST_CASE("profiles solve the traveling-wave equation away from the platforms", "[profile][property]") {
    for (char which : {'A', 'B', 'C'}) {
        const auto& [spec, t] = example(which);
        for (const auto& f : t.fronts) {
            const Profile p = reconstruct_profile(spec, f, 4001);
            const double h = 2e-3;
            double worst = 0.0;
            for (double z = 3 * h; z <= p.width - 3 * h; z += h) {
                const double phi = p(z);
                if (phi - f.lower < 1e-2 || f.upper - phi < 1e-2) continue;
                // f is only continuous at breakpoints, so a stencil across one loses an order
                const double lo = std::min(p(z - h), p(z + h)), hi = std::max(p(z - h), p(z + h));
                const auto& br = spec.breakpoints();
                if (std::any_of(br.begin(), br.end(), [&](double b) { return b >= lo && b <= hi; })) continue;
                const double d2 = (p(z + h) - 2.0 * phi + p(z - h)) / (h * h);
                const double d1 = (p(z + h) - p(z - h)) / (2.0 * h);
                worst = std::max(worst, std::abs(d2 + f.speed * d1 + spec.eval(phi)));
            }
            INFO("example " << which << " front " << f.upper << " -> " << f.lower);
            CHECK(worst <= Tolerances{}.profile);
        }
    }
}

TEST_CASE("profiles are monotone with finite positive width", "[profile][property]") {
    std::mt19937_64 rng(11);
    for (char which : {'A', 'B', 'C'}) {
        const auto& [spec, t] = example(which);
        for (const auto& f : t.fronts) {
            const Profile p = reconstruct_profile(spec, f, 501);
            CHECK(std::isfinite(p.width));
            CHECK(p.width > 0.0);
            CHECK(p.phi.front() == f.upper);
            CHECK(p.phi.back() == f.lower);
            for (std::size_t i = 1; i < p.z.size(); ++i) {
                CHECK(p.z[i] > p.z[i - 1]);
                CHECK(p.phi[i] < p.phi[i - 1]);
            }
            std::uniform_real_distribution<double> u(-0.5, p.width + 0.5);
            for (int k = 0; k < 300; ++k) {
                double z1 = u(rng), z2 = u(rng);
                if (z1 > z2) std::swap(z1, z2);
                CHECK(p(z1) >= p(z2));
            }
            // derivative at interior samples equals q(phi)
            for (std::size_t i = 50; i + 50 < p.z.size(); i += 50) {
                const double h = 1e-5;
                CHECK((p(p.z[i] + h) - p(p.z[i] - h)) / (2 * h) == Approx(f.trajectory.q_at(p.phi[i])).margin(1e-4));
            }
        }
    }
}

TEST_CASE("default shifts", "[profile]") {
    const auto& b = example('B');
    const auto tfb = make_terrace_function(b.spec, b.terrace, 1.0);
    REQUIRE(tfb.shifts.size() == 2);
    CHECK(tfb.shifts[0] == 0.0);
    CHECK(tfb.shifts[1] == Approx(pi / 4 + 1.0).margin(1e-6));

    const auto& a = example('A');
    CHECK(make_terrace_function(a.spec, a.terrace, 3.0).shifts == std::vector<double>{0.0});

    const auto& c = example('C');
    const auto tfc = make_terrace_function(c.spec, c.terrace, 2.0);
    CHECK(tfc.shifts[1] == tfc.profiles[0].width + 2.0);

    CHECK_THROWS_WITH(default_shifts(tfc.profiles, 0.0), Catch::Matchers::StartsWith("InvalidArgument"));
}

TEST_CASE("terrace_eval", "[profile]") {
    const auto& b = example('B');
    const auto tf = make_terrace_function(b.spec, b.terrace, 1.0);
    CHECK(terrace_eval(tf, 0.0, -5.0) == 1.0);
    CHECK(terrace_eval(tf, 0.0, pi / 8) == Approx(0.75).margin(1e-6));
    CHECK(terrace_eval(tf, 0.0, pi / 4 + 0.5) == 0.5);  // plateau between supports
    CHECK(terrace_eval(tf, 0.0, 50.0) == 0.0);

    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-2.0, 5.0);
    for (int k = 0; k < 500; ++k) {
        double x1 = u(rng), x2 = u(rng);
        if (x1 > x2) std::swap(x1, x2);
        CHECK(tf(0.0, x1) >= tf(0.0, x2));
    }
}

TEST_CASE("time shifts are translations of each front", "[profile][property]") {
    const auto& c = example('C');
    const auto tf = make_terrace_function(c.spec, c.terrace, 1.0);
    const double dt = 0.7;
    TerraceFunction moved = tf;
    for (std::size_t j = 0; j < moved.shifts.size(); ++j) moved.shifts[j] += tf.profiles[j].speed * dt;
    for (double x = -3.0; x <= 7.0; x += 0.01) CHECK(tf(1.3 + dt, x) == Approx(moved(1.3, x)).margin(1e-12));
}

TEST_CASE("profile and snapshot CSVs", "[profile][io]") {
    const auto& a = example('A');
    const Profile p = reconstruct_profile(a.spec, a.terrace.fronts[0], 11);
    const std::string csv = profile_csv(p);
    CHECK(csv.rfind("z,phi\n", 0) == 0);
    const auto rows = io::parse_csv(csv);
    REQUIRE(rows.size() == 11);
    for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i].first > rows[i - 1].first);

    const auto tf = make_terrace_function(a.spec, a.terrace);
    const auto snap = tf.snapshot(0.0, {-1.0, 0.5, 3.0});
    CHECK(snap[0].second == 1.0);
    CHECK(snap[2].second == 0.0);
}
