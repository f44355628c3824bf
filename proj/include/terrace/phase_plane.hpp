#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "terrace/dopri.hpp"
#include "terrace/error.hpp"
#include "terrace/io.hpp"
#include "terrace/reaction.hpp"

namespace terrace {

inline constexpr double kDefaultTolOde = 1e-10;
inline constexpr std::size_t kMaxTrajectorySamples = 1'000'000;

enum class Termination {
    HitPAxis,    // q(p_l) = 0 with p_l > 0
    HitQAxis,    // p_l = 0 with q(0) < 0
    Degenerate,  // p_l = 0 and q(0) = 0: the trajectory ends at the origin
};

inline const char* to_string(Termination t) {
    switch (t) {
        case Termination::HitPAxis: return "HitPAxis";
        case Termination::HitQAxis: return "HitQAxis";
        case Termination::Degenerate: return "Degenerate";
    }
    return "?";
}

/**
 * Local expansion of w = q^2 next to a point where w vanishes and f has a
 * nonzero one-sided limit. With sigma the distance into the trajectory,
 *
 *   dw/dsigma = 2 (F0 - F1 sigma) - 2 c sqrt(w),   w(0) = 0,
 *
 * has the solution w = a sigma + b sigma^3/2 + d sigma^2 + e sigma^5/2 + O(sigma^3).
 * At the start p_u: F0 = f(p_u^-), F1 = f'(p_u^-), sigma = p_u - p.
 * At a lower platform p_l: F0 = -f(p_l^+), F1 = f'(p_l^+), c -> -c, sigma = p - p_l.
 */
struct EndpointSeries {
    double a = 0.0;
    double b = 0.0;
    double d = 0.0;
    double e = 0.0;

    static EndpointSeries make(double F0, double F1, double c) {
        EndpointSeries s;
        s.a = 2.0 * F0;
        const double ra = std::sqrt(s.a);
        s.b = -(4.0 / 3.0) * c * ra;
        s.d = -F1 + (2.0 / 3.0) * c * c;
        const double beta = s.b / s.a;
        const double gamma = s.d / s.a;
        s.e = -(4.0 / 5.0) * c * ra * (0.5 * gamma - beta * beta / 8.0);
        return s;
    }

    double w(double sigma) const {
        const double r = std::sqrt(sigma);
        return sigma * (a + r * (b + r * (d + r * e)));
    }
};

/// Node of a trajectory. `dw_below` / `dw_above` are the one-sided slopes
/// dw/dp (they differ only where f jumps).
struct PhaseSample {
    double p;
    double q;
    double dw_below;
    double dw_above;
};

/**
 * Solution q(p) < 0 of dq/dp = -c - f(p)/q on (p_l, p_u) with q(p_u) = 0.
 * Samples run from p_u down to p_l, strictly decreasing in p.
 */
struct Trajectory {
    double p_u = 0.0;
    double c = 0.0;
    double p_l = 0.0;
    double q_at_pl = 0.0;
    Termination termination = Termination::Degenerate;
    double tol_ode = kDefaultTolOde;
    std::vector<PhaseSample> samples;
    EndpointSeries head;  // valid on [samples[1].p, p_u]

    /// w = q^2 at p in [p_l, p_u]: the start series on the first interval,
    /// cubic Hermite in w (exact slopes) elsewhere.
    double w_at(double p) const {
        if (p > p_u || p < p_l) detail::fail("OutOfDomain", "p = " + ReactionSpec::format(p));
        if (samples.size() >= 2 && p >= samples[1].p) return head.w(p_u - p);
        // samples are strictly decreasing in p
        const auto it = std::lower_bound(samples.begin(), samples.end(), p,
                                         [](const PhaseSample& s, double v) { return s.p > v; });
        if (it == samples.end()) return samples.back().q * samples.back().q;
        if (it->p == p || it == samples.begin()) return it->q * it->q;
        const PhaseSample& lo = *it;
        const PhaseSample& hi = *(it - 1);
        const double h = hi.p - lo.p;
        const double t = (p - lo.p) / h;
        const double w0 = lo.q * lo.q;
        const double w1 = hi.q * hi.q;
        const double m0 = lo.dw_above * h;
        const double m1 = hi.dw_below * h;
        const double t2 = t * t;
        const double t3 = t2 * t;
        const double w = (2 * t3 - 3 * t2 + 1) * w0 + (t3 - 2 * t2 + t) * m0 + (-2 * t3 + 3 * t2) * w1 +
                         (t3 - t2) * m1;
        return std::max(w, 0.0);
    }

    double q_at(double p) const { return -std::sqrt(w_at(p)); }
};

struct TrajectoryEnd {
    double p_l;
    double q_at_pl;
    Termination termination;
};

namespace detail {

inline void require_positive_stable(const ReactionSpec& spec, double p_u) {
    if (!(p_u > 0.0) || !spec.is_stable_state(p_u)) {
        fail("NotStable", "p_u = " + ReactionSpec::format(p_u) + " is not a positive stable steady state");
    }
}

/// Piece of f directly below the stable state p_u.
inline std::size_t piece_below(const ReactionSpec& spec, double p_u) { return spec.segment_index(p_u) - 1; }

/// Start offset: small enough that the truncated series stays below tol.
inline double seed_offset(const ReactionSpec& spec, double p_u, double c, double tol) {
    const Segment& piece = spec.segments()[piece_below(spec, p_u)];
    const double slope = std::abs(piece.poly.derivative()(p_u));
    const double eps = std::cbrt(0.1 * tol) / (1.0 + std::abs(c) + std::sqrt(slope));
    return std::min(eps, 0.25 * (piece.hi - piece.lo));
}

}  // namespace detail

/// First integration node (p_u - eps, q_eps) from the start expansion.
/// Throws NotStable or EpsilonTooLarge (eps reaches the next breakpoint).
inline std::pair<double, double> seed_asymptotic(const ReactionSpec& spec, double p_u, double c, double eps) {
    detail::require_positive_stable(spec, p_u);
    if (eps == 0.0) return {p_u, 0.0};
    const Segment& piece = spec.segments()[detail::piece_below(spec, p_u)];
    if (!(eps > 0.0) || eps >= piece.hi - piece.lo) {
        detail::fail("EpsilonTooLarge", "eps = " + ReactionSpec::format(eps) + " reaches the breakpoint " +
                                            ReactionSpec::format(piece.lo));
    }
    const auto series = EndpointSeries::make(piece.poly(p_u), piece.poly.derivative()(p_u), c);
    return {p_u - eps, -std::sqrt(std::max(series.w(eps), 0.0))};
}

/**
 * Integrates w = q^2, dw/dp = 2c sqrt(w) - 2 f(p), downward from p_u.
 *
 * Steps stop exactly at every breakpoint of f. The run ends when w reaches 0
 * (HitPAxis, or Degenerate when that happens at p = 0) or when p reaches 0
 * with w > tol_ode (HitQAxis). w <= tol_ode at p = 0 is Degenerate: w is the
 * integrated quantity, so that is its resolution. For the same reason a
 * stable breakpoint reached with w <= tol_ode is a HitPAxis landing there.
 */
inline Trajectory solve_trajectory(const ReactionSpec& spec, double p_u, double c, double tol_ode = kDefaultTolOde) {
    if (!(tol_ode > 0.0)) detail::fail("InvalidArgument", "tol_ode must be positive");
    detail::require_positive_stable(spec, p_u);

    Trajectory tr;
    tr.p_u = p_u;
    tr.c = c;
    tr.tol_ode = tol_ode;

    const auto& segs = spec.segments();
    std::size_t k = detail::piece_below(spec, p_u);
    const double f_top = segs[k].poly(p_u);
    tr.head = EndpointSeries::make(f_top, segs[k].poly.derivative()(p_u), c);

    const double eps = detail::seed_offset(spec, p_u, c, tol_ode);
    double p = p_u - eps;
    double w = tr.head.w(eps);
    tr.samples.push_back({p_u, 0.0, -2.0 * f_top, -2.0 * f_top});

    auto slope = [c](const Polynomial& poly, double pp, double ww) {
        return 2.0 * c * std::sqrt(std::max(ww, 0.0)) - 2.0 * poly(pp);
    };
    {
        const double s = slope(segs[k].poly, p, w);
        tr.samples.push_back({p, -std::sqrt(w), s, s});
    }

    const double h_max = p_u / 512.0;
    double h = -std::min(h_max, 1e-3);

    auto finish_event = [&](double p_event, const Polynomial& poly) {
        tr.q_at_pl = 0.0;
        if (p_event <= tol_ode) {
            tr.p_l = 0.0;
            tr.termination = Termination::Degenerate;
        } else {
            tr.p_l = p_event;
            tr.termination = Termination::HitPAxis;
            if (poly(p_event) > 0.0) {
                // w cannot vanish where f > 0; this is the slow approach to an
                // unstable state resolved one step too early.
                const double window = 100.0 * std::sqrt(tol_ode);
                double best = -1.0;
                for (const auto& s : spec.steady_states()) {
                    if (s.stability == Stability::Unstable && std::abs(s.value - p_event) <= window) best = s.value;
                }
                if (best < 0.0) {
                    detail::fail("EventLocalizationFailure",
                                 "w vanishes where f > 0, bracket [" + ReactionSpec::format(p_event - window) + ", " +
                                     ReactionSpec::format(p_event + window) + "]");
                }
                tr.p_l = best;
            }
        }
        const double s = -2.0 * poly(tr.p_l);
        if (tr.p_l < tr.samples.back().p) tr.samples.push_back({tr.p_l, 0.0, s, s});
    };

    while (true) {
        const Segment& piece = segs[k];
        const Polynomial& poly = piece.poly;
        const double lo = piece.lo;
        auto rhs = [&](double pp, double ww) { return slope(poly, pp, ww); };

        while (p > lo) {
            bool at_break = false;
            if (p + h <= lo) {
                h = lo - p;
                at_break = true;
            }
            const auto step = detail::dopri5_step(rhs, p, w, h);
            const double ratio = step.error / (tol_ode * (1.0 + std::abs(w)));
            if (ratio > 1.0) {
                h *= std::max(0.2, 0.9 * std::pow(ratio, -0.2));
                if (std::abs(h) < 1e-14 * std::max(1.0, std::abs(p))) {
                    detail::fail("StepSizeUnderflow", "at p = " + ReactionSpec::format(p));
                }
                continue;
            }
            const double p_new = at_break ? lo : p + h;
            if (step.y <= 0.0) {
                // bisection on the step length: w(h_pos) > 0 >= w(h_neg)
                double h_pos = 0.0;
                double h_neg = p_new - p;
                for (int it = 0; it < 200 && std::abs(h_neg - h_pos) > 0.5 * tol_ode; ++it) {
                    const double mid = 0.5 * (h_pos + h_neg);
                    if (detail::dopri5_step(rhs, p, w, mid).y > 0.0) {
                        h_pos = mid;
                    } else {
                        h_neg = mid;
                    }
                }
                finish_event(std::max(p + 0.5 * (h_pos + h_neg), 0.0), poly);
                return tr;
            }
            p = p_new;
            w = step.y;
            const double s = slope(poly, p, w);
            tr.samples.push_back({p, -std::sqrt(w), s, s});
            if (tr.samples.size() > kMaxTrajectorySamples) {
                detail::fail("SampleCapExceeded", "more than " + std::to_string(kMaxTrajectorySamples) + " samples");
            }
            const double grow = ratio > 0.0 ? std::min(5.0, 0.9 * std::pow(ratio, -0.2)) : 5.0;
            h = std::max(h * grow, -h_max);
        }

        if (lo <= 0.0) {
            tr.p_l = 0.0;
            if (w <= tol_ode) {
                tr.termination = Termination::Degenerate;
                tr.q_at_pl = 0.0;
                tr.samples.back().q = 0.0;
            } else {
                tr.termination = Termination::HitQAxis;
                tr.q_at_pl = -std::sqrt(w);
            }
            return tr;
        }
        if (w <= tol_ode && poly(lo) < 0.0 && segs[k - 1].poly(lo) > 0.0) {
            // arrival at a stable state with w below its resolution is a landing
            tr.p_l = lo;
            tr.q_at_pl = 0.0;
            tr.termination = Termination::HitPAxis;
            tr.samples.back().q = 0.0;
            return tr;
        }
        --k;
        tr.samples.back().dw_below = slope(segs[k].poly, p, w);
    }
}

inline TrajectoryEnd p_l_of_c(const ReactionSpec& spec, double p_u, double c, double tol_ode = kDefaultTolOde) {
    const Trajectory tr = solve_trajectory(spec, p_u, c, tol_ode);
    return {tr.p_l, tr.q_at_pl, tr.termination};
}

/// `p,q` rows in decreasing p.
inline std::string trajectory_csv(const Trajectory& tr) {
    std::vector<std::pair<double, double>> rows;
    rows.reserve(tr.samples.size());
    for (const auto& s : tr.samples) rows.emplace_back(s.p, s.q);
    return io::csv("p,q", rows);
}

}  // namespace terrace
