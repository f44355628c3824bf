#include <catch_amalgamated.hpp>

#include "fixtures.hpp"
#include "terrace/terrace.hpp"

using namespace terrace;
using Catch::Approx;

TEST_CASE("example A: one front at speed 0", "[terrace]") {
    const Tolerances tol;
    const auto t = build_terrace(fixtures::example_a(), tol);
    REQUIRE(t.size() == 1);
    CHECK(t.platforms == std::vector<double>{1.0, 0.0});
    CHECK(std::abs(t.fronts[0].speed) <= tol.speed);
}

TEST_CASE("example B: two fronts chained at the same speed", "[terrace]") {
    const Tolerances tol;
    const auto t = build_terrace(fixtures::example_b(), tol);
    REQUIRE(t.size() == 2);
    CHECK(t.platforms == std::vector<double>{1.0, 0.5, 0.0});
    for (const auto& f : t.fronts) CHECK(std::abs(f.speed) <= tol.speed);
    CHECK(t.fronts[0].speed == t.fronts[1].speed);
}

TEST_CASE("example C: ordered speeds of opposite sign", "[terrace]") {
    const Tolerances tol;
    const auto t = build_terrace(fixtures::example_c(), tol);
    REQUIRE(t.size() == 2);
    CHECK(t.platforms == std::vector<double>{1.0, 0.5, 0.0});
    CHECK(t.fronts[0].speed < -1e-4);
    CHECK(t.fronts[1].speed > 1e-4);
    CHECK(t.fronts[0].speed == Approx(-t.fronts[1].speed).margin(2 * tol.speed));
}

TEST_CASE("chain_at_speed stops where the same speed no longer lands", "[terrace]") {
    const Tolerances tol;
    const auto c_spec = fixtures::example_c();
    const double c1 = find_cstar(c_spec, 1.0, tol).c_star;
    const auto chain = chain_at_speed(c_spec, 1.0, c1, tol);
    REQUIRE(chain.fronts.size() == 1);
    CHECK(chain.fronts[0].lower == 0.5);
    CHECK(chain.rest == ChainResult::Rest::NextSearchFrom);
    CHECK(chain.next_from == 0.5);

    const auto b = fixtures::example_b();
    const double cb = find_cstar(b, 1.0, tol).c_star;
    const auto full = chain_at_speed(b, 1.0, cb, tol);
    CHECK(full.fronts.size() == 2);
    CHECK(full.rest == ChainResult::Rest::ReachedZero);
}

TEST_CASE("check_terrace rejects malformed ladders", "[terrace]") {
    const auto b = fixtures::example_b();
    auto t = build_terrace(b, Tolerances{});
    CHECK_NOTHROW(check_terrace(b, t));

    auto swapped = t;
    swapped.fronts[0].speed = 1.0;
    CHECK_THROWS_WITH(check_terrace(b, swapped), Catch::Matchers::StartsWith("SpeedOrderViolation"));

    auto broken = t;
    broken.platforms[1] = 0.75;
    CHECK_THROWS_WITH(check_terrace(b, broken), Catch::Matchers::StartsWith("BadTerrace"));

    auto short_ladder = t;
    short_ladder.platforms.pop_back();
    CHECK_THROWS_WITH(check_terrace(b, short_ladder), Catch::Matchers::StartsWith("BadTerrace"));
}

TEST_CASE("build_terrace is deterministic and bracket-independent", "[terrace][property]") {
    const Tolerances tol;
    for (const auto& spec : {fixtures::example_a(), fixtures::example_b(), fixtures::example_c()}) {
        const auto first = build_terrace(spec, tol);
        const auto again = build_terrace(spec, tol);
        const auto padded = build_terrace(spec, tol, TerraceOptions{0.37});
        REQUIRE(first.size() == again.size());
        REQUIRE(first.size() == padded.size());
        CHECK(first.platforms == padded.platforms);
        for (std::size_t j = 0; j < first.size(); ++j) {
            CHECK(first.fronts[j].speed == again.fronts[j].speed);
            CHECK(std::abs(first.fronts[j].speed - padded.fronts[j].speed) <= 2 * tol.speed);
        }
    }
}
