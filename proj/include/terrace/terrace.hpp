#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "terrace/error.hpp"
#include "terrace/phase_plane.hpp"
#include "terrace/reaction.hpp"
#include "terrace/speed_solver.hpp"

namespace terrace {

/// One traveling wave of a terrace, monotonically connecting two stable states.
struct Front {
    double upper;
    double lower;
    double speed;
    Trajectory trajectory;
};

struct Terrace {
    std::vector<Front> fronts;
    std::vector<double> platforms;  // 1 = platforms[0] > ... > platforms[J] = 0

    std::size_t size() const noexcept { return fronts.size(); }
};

struct ChainResult {
    enum class Rest { ReachedZero, NextSearchFrom };

    std::vector<Front> fronts;
    Rest rest = Rest::ReachedZero;
    double next_from = 0.0;  // meaningful for NextSearchFrom
};

/**
 * Descends platform by platform at the fixed speed c while each trajectory
 * lands on the p-axis at a stable state. Stops at 0 (ReachedZero) or at the
 * first platform whose trajectory reaches the q-axis below the origin
 * (NextSearchFrom that platform). `first` may carry the already-computed
 * trajectory from p_start.
 */
inline ChainResult chain_at_speed(const ReactionSpec& spec, double p_start, double c, const Tolerances& tol,
                                  std::optional<Trajectory> first = std::nullopt) {
    ChainResult out;
    double p = p_start;
    Trajectory tr = first ? std::move(*first) : solve_trajectory(spec, p, c, tol.ode);
    for (std::size_t guard = 0; guard <= spec.steady_states().size(); ++guard) {
        if (tr.termination == Termination::HitQAxis) {
            out.rest = ChainResult::Rest::NextSearchFrom;
            out.next_from = p;
            return out;
        }
        const double lower =
            tr.termination == Termination::Degenerate ? 0.0 : snap_platform(spec, tr.p_l, tol.snap);
        out.fronts.push_back({p, lower, c, std::move(tr)});
        if (lower == 0.0) {
            out.rest = ChainResult::Rest::ReachedZero;
            return out;
        }
        p = lower;
        tr = solve_trajectory(spec, p, c, tol.ode);
    }
    detail::fail("IterationGuardExceeded", "chain did not terminate");
}

/// Checks the ladder and speed ordering; throws SpeedOrderViolation or
/// BadTerrace.
inline void check_terrace(const ReactionSpec& spec, const Terrace& t) {
    if (t.fronts.empty() || t.platforms.size() != t.fronts.size() + 1) {
        detail::fail("BadTerrace", "platform count does not match front count");
    }
    if (t.platforms.front() != 1.0 || t.platforms.back() != 0.0) {
        detail::fail("BadTerrace", "platforms must run from 1 to 0");
    }
    for (std::size_t j = 0; j < t.fronts.size(); ++j) {
        const Front& f = t.fronts[j];
        if (f.upper != t.platforms[j] || f.lower != t.platforms[j + 1] || !(f.upper > f.lower)) {
            detail::fail("BadTerrace", "front " + std::to_string(j) + " does not match the platform ladder");
        }
        if (!spec.is_stable_state(f.upper) || !spec.is_stable_state(f.lower)) {
            detail::fail("BadTerrace", "front " + std::to_string(j) + " has a non-stable platform");
        }
        if (j > 0 && f.speed < t.fronts[j - 1].speed) {
            detail::fail("SpeedOrderViolation", "front " + std::to_string(j) + " is slower than front " +
                                                    std::to_string(j - 1));
        }
    }
}

struct TerraceOptions {
    /// Widens every computed speed bracket by this much on both sides.
    double bracket_padding = 0.0;
};

/**
 * Builds the terrace from the top: find c* from the current platform, chain
 * every further front that the same speed reaches, and restart c* from the
 * platform where the chain stops. Consecutive rounds must get strictly faster.
 */
inline Terrace build_terrace(const ReactionSpec& spec, const Tolerances& tol, const TerraceOptions& opt = {}) {
    tol.check();
    Terrace out;
    out.platforms.push_back(1.0);
    double p = 1.0;
    std::optional<double> previous_speed;
    const std::size_t max_rounds = spec.classify_states().stable.size();

    for (std::size_t round = 0;; ++round) {
        if (round >= max_rounds) detail::fail("IterationGuardExceeded", "more rounds than stable states");

        std::optional<SpeedBracket> bracket;
        if (opt.bracket_padding != 0.0) {
            bracket = SpeedBracket{lower_bracket(spec, p, tol.ode) - opt.bracket_padding,
                                   upper_bracket(spec, p, tol.ode) + opt.bracket_padding, p};
        }
        CriticalSpeed cs = find_cstar(spec, p, tol, bracket);
        if (previous_speed && !(cs.c_star > *previous_speed + tol.speed)) {
            detail::fail("SpeedOrderViolation", "round from " + ReactionSpec::format(p) + " gives c* = " +
                                                    ReactionSpec::format(cs.c_star) + " after " +
                                                    ReactionSpec::format(*previous_speed));
        }
        ChainResult chain = chain_at_speed(spec, p, cs.c_star, tol, std::move(cs.trajectory));
        if (chain.fronts.empty()) {
            detail::fail("SpeedOrderViolation", "no front found from " + ReactionSpec::format(p));
        }
        for (auto& f : chain.fronts) {
            out.platforms.push_back(f.lower);
            out.fronts.push_back(std::move(f));
        }
        previous_speed = cs.c_star;
        if (chain.rest == ChainResult::Rest::ReachedZero) break;
        p = chain.next_from;
    }
    check_terrace(spec, out);
    return out;
}

}  // namespace terrace
