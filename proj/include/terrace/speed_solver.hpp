#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "terrace/error.hpp"
#include "terrace/phase_plane.hpp"
#include "terrace/reaction.hpp"

namespace terrace {

/// Numerical tolerances shared by the solver pipeline.
struct Tolerances {
    double ode = kDefaultTolOde;  // trajectory integration
    double speed = 1e-8;          // final bisection width on c
    double snap = 1e-6;           // distance from p_l to the platform it snaps to
    double profile = 1e-4;        // residual of reconstructed profiles

    void check() const {
        if (!(ode > 0.0) || !(speed > 0.0) || !(snap > 0.0) || !(profile > 0.0)) {
            detail::fail("InvalidArgument", "all tolerances must be positive");
        }
    }
};

/// Trajectory from p_u at c_lo reaches the q-axis below the origin; at c_hi it
/// does not.
struct SpeedBracket {
    double c_lo;
    double c_hi;
    double p_u;
};

struct CriticalSpeed {
    double c_star;    // upper end of the final bracket
    double c_lo;      // lower end of the final bracket
    double p_star;    // snapped lower platform
    Trajectory trajectory;  // at c_star
    double tol_c;
};

inline constexpr int kMaxBracketIterations = 64;

/// predicate(c): the trajectory reaches p = 0 strictly below the origin.
inline bool reaches_q_axis(const Trajectory& tr) { return tr.termination == Termination::HitQAxis; }

/// Tries c = 0, -1, -2, -4, ... until the trajectory is HitQAxis.
inline double lower_bracket(const ReactionSpec& spec, double p_u, double tol_ode = kDefaultTolOde) {
    double c = 0.0;
    for (int it = 0; it < kMaxBracketIterations; ++it) {
        if (reaches_q_axis(solve_trajectory(spec, p_u, c, tol_ode))) return c;
        c = (c == 0.0) ? -1.0 : 2.0 * c;
    }
    detail::fail("BracketSearchExceeded", "no HitQAxis speed found below 0 for p_u = " + ReactionSpec::format(p_u));
}

/// Sup of f(p) / (p - theta) over (theta, p_u), theta the unstable state just
/// below p_u. f has a zero at theta, so the ratio is a polynomial.
inline double kpp_slope_bound(const ReactionSpec& spec, double p_u) {
    detail::require_positive_stable(spec, p_u);
    const double theta = spec.unstable_below(p_u);
    const Segment& piece = spec.segments()[detail::piece_below(spec, p_u)];
    const Polynomial ratio = piece.poly.deflate(theta);
    return extrema(ratio, theta, p_u).max;
}

/// c = 2 sqrt(K), confirmed by one solve; doubled while the confirmation fails.
inline double upper_bracket(const ReactionSpec& spec, double p_u, double tol_ode = kDefaultTolOde) {
    double c = 2.0 * std::sqrt(kpp_slope_bound(spec, p_u));
    for (int it = 0; it < kMaxBracketIterations; ++it) {
        if (!reaches_q_axis(solve_trajectory(spec, p_u, c, tol_ode))) return c;
        c = (c <= 0.0) ? 1.0 : 2.0 * c;
    }
    detail::fail("BracketSearchExceeded", "no HitPAxis speed found for p_u = " + ReactionSpec::format(p_u));
}

/// Nearest stable steady state within tol_snap of p_l.
inline double snap_platform(const ReactionSpec& spec, double p_l, double tol_snap) {
    double best = std::numeric_limits<double>::quiet_NaN();
    double dist = std::numeric_limits<double>::infinity();
    for (const auto& s : spec.steady_states()) {
        if (s.stability != Stability::Stable) continue;
        const double d = std::abs(s.value - p_l);
        if (d < dist) {
            dist = d;
            best = s.value;
        }
    }
    if (!(dist <= tol_snap)) {
        detail::fail("SnapFailure", "p_l = " + ReactionSpec::format(p_l) + " is " + ReactionSpec::format(dist) +
                                        " from the nearest stable state " + ReactionSpec::format(best));
    }
    return best;
}

/**
 * c* = sup{c : trajectory from p_u is HitQAxis}, by bisection. The predicate
 * is monotone in c (trajectories move up as c grows), and Degenerate counts as
 * false, so the bracket closes on the supremum from both sides.
 *
 * When `bracket` is given it is checked and used instead of the computed one.
 */
inline CriticalSpeed find_cstar(const ReactionSpec& spec, double p_u, const Tolerances& tol,
                                std::optional<SpeedBracket> bracket = std::nullopt) {
    tol.check();
    double c_lo, c_hi;
    std::optional<Trajectory> at_hi;
    if (bracket) {
        c_lo = bracket->c_lo;
        c_hi = bracket->c_hi;
        if (!(c_lo < c_hi) || !reaches_q_axis(solve_trajectory(spec, p_u, c_lo, tol.ode))) {
            detail::fail("InvalidBracket", "c_lo = " + ReactionSpec::format(c_lo) + " is not HitQAxis");
        }
        at_hi = solve_trajectory(spec, p_u, c_hi, tol.ode);
        if (reaches_q_axis(*at_hi)) {
            detail::fail("InvalidBracket", "c_hi = " + ReactionSpec::format(c_hi) + " is HitQAxis");
        }
    } else {
        c_lo = lower_bracket(spec, p_u, tol.ode);
        c_hi = upper_bracket(spec, p_u, tol.ode);
    }

    while (c_hi - c_lo > tol.speed) {
        const double mid = 0.5 * (c_lo + c_hi);
        if (mid <= c_lo || mid >= c_hi) break;
        Trajectory tr = solve_trajectory(spec, p_u, mid, tol.ode);
        if (reaches_q_axis(tr)) {
            c_lo = mid;
        } else {
            c_hi = mid;
            at_hi = std::move(tr);
        }
    }
    if (!at_hi) at_hi = solve_trajectory(spec, p_u, c_hi, tol.ode);

    const double p_star = snap_platform(spec, at_hi->p_l, tol.snap);
    return {c_hi, c_lo, p_star, std::move(*at_hi), tol.speed};
}

}  // namespace terrace
