#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "terrace/error.hpp"
#include "terrace/io.hpp"
#include "terrace/phase_plane.hpp"
#include "terrace/reaction.hpp"
#include "terrace/terrace.hpp"

namespace terrace {

inline constexpr double kDefaultGap = 1.0;

/**
 * Position along a front as a function of its value: z(p) = int_p^upper ds / -q(s).
 *
 * The integrand blows up like 1/sqrt at both platforms, where q vanishes
 * linearly in sqrt(distance). Intervals near a platform are integrated in
 * sigma with s = platform -/+ sigma^2, which makes them smooth. Next to the
 * lower platform w = q^2 comes from the local series at the snapped platform
 * rather than from the trajectory, whose last node sits within the speed
 * tolerance of it.
 *
 * The interval is cut at every trajectory node, so each piece sees a single
 * smooth interpolant. Cumulative values at the cuts are computed once.
 */
class FrontGeometry {
public:
    FrontGeometry(const ReactionSpec& spec, const Front& front) : front_(&front) {
        const Trajectory& tr = front.trajectory;
        const Segment& above_lower = spec.segments()[spec.segment_index(front.lower)];
        const double slope = above_lower.poly.derivative()(front.lower);
        tail_ = EndpointSeries::make(-above_lower.poly(front.lower), slope, -front.speed);
        const double span = front.upper - front.lower;
        end_len_ = 0.05 * span;
        tail_len_ = std::cbrt(0.1 * tr.tol_ode) / (1.0 + std::abs(front.speed) + std::sqrt(std::abs(slope)));
        tail_len_ = std::max(tail_len_, 10.0 * std::abs(tr.p_l - front.lower));
        tail_len_ = std::min({tail_len_, 0.25 * (above_lower.hi - above_lower.lo), 0.5 * end_len_});
        head_len_ = tr.samples.size() > 1 ? tr.p_u - tr.samples[1].p : 0.0;

        // cuts run downward from upper
        cuts_.push_back(front.upper);
        for (std::size_t i = 1; i < tr.samples.size(); ++i) {
            const double p = tr.samples[i].p;
            if (p > front.lower + tail_len_ && p < cuts_.back()) cuts_.push_back(p);
        }
        cuts_.push_back(front.lower + tail_len_);
        cuts_.push_back(front.lower);
        z_at_cut_.assign(cuts_.size(), 0.0);
        for (std::size_t k = 1; k < cuts_.size(); ++k) {
            z_at_cut_[k] = z_at_cut_[k - 1] + piece(cuts_[k], cuts_[k - 1]);
        }
    }

    double upper() const noexcept { return front_->upper; }
    double lower() const noexcept { return front_->lower; }
    double width() const noexcept { return z_at_cut_.back(); }

    double w(double s) const {
        const Front& f = *front_;
        if (s <= f.lower + tail_len_) return tail_.w(std::max(s - f.lower, 0.0));
        if (f.upper - s <= head_len_) return f.trajectory.head.w(std::max(f.upper - s, 0.0));
        return f.trajectory.w_at(std::min(s, f.upper));
    }

    double z_of_p(double p) const {
        if (!(p >= lower() && p <= upper())) {
            detail::fail("OutOfDomain", "p = " + ReactionSpec::format(p) + " outside the front");
        }
        // first cut at or below p
        const auto it = std::lower_bound(cuts_.begin(), cuts_.end(), p, std::greater<>());
        const std::size_t k = static_cast<std::size_t>(it - cuts_.begin());
        if (cuts_[k] == p) return z_at_cut_[k];
        return z_at_cut_[k - 1] + piece(p, cuts_[k - 1]);
    }

private:
    static constexpr double kQuadTol = 1e-12;
    static constexpr double kQuadAccept = 1e-7;

    template <class F>
    static double kronrod(const F& g, double a, double b) {
        double err = 0.0;
        const double v = boost::math::quadrature::gauss_kronrod<double, 21>::integrate(g, a, b, 8, kQuadTol, &err);
        if (!std::isfinite(v) || err > kQuadAccept * std::max(1.0, std::abs(v))) {
            detail::fail("QuadratureFailure", "on [" + ReactionSpec::format(a) + ", " + ReactionSpec::format(b) +
                                                  "], error estimate " + ReactionSpec::format(err));
        }
        return v;
    }

    // w at distance `dist` from a platform; the series are evaluated from the
    // distance itself, since platform -/+ dist rounds away tiny offsets
    double w_from(double dir, double dist) const {
        const Front& f = *front_;
        if (dir > 0.0) return dist <= tail_len_ ? tail_.w(dist) : w(f.lower + dist);
        return dist <= head_len_ ? f.trajectory.head.w(dist) : w(f.upper - dist);
    }

    // s = anchor + dir * sigma^2, ds = 2 sigma dsigma
    double sigma_piece(double lo, double hi, double dir) const {
        const double anchor = dir > 0 ? lower() : upper();
        const double s0 = std::sqrt(std::abs(lo - anchor));
        const double s1 = std::sqrt(std::abs(hi - anchor));
        const double a0 = dir > 0 ? tail_.a : front_->trajectory.head.a;
        auto g = [&](double sigma) {
            if (sigma == 0.0) return 2.0 / std::sqrt(a0);
            return 2.0 * sigma / std::sqrt(w_from(dir, sigma * sigma));
        };
        return kronrod(g, std::min(s0, s1), std::max(s0, s1));
    }

    // int_lo^hi ds / sqrt(w) over a piece lying between two adjacent cuts
    double piece(double lo, double hi) const {
        if (lo - lower() < end_len_) return sigma_piece(lo, hi, +1.0);
        if (upper() - hi < end_len_) return sigma_piece(lo, hi, -1.0);
        return kronrod([&](double s) { return 1.0 / std::sqrt(w(s)); }, lo, hi);
    }

    const Front* front_;
    EndpointSeries tail_;
    double tail_len_ = 0.0;
    double head_len_ = 0.0;
    double end_len_ = 0.0;
    std::vector<double> cuts_;
    std::vector<double> z_at_cut_;
};

inline double z_of_p(const ReactionSpec& spec, const Front& front, double p) {
    return FrontGeometry(spec, front).z_of_p(p);
}

/**
 * Compact profile phi(z) on [0, width]: phi(0) = upper, phi(width) = lower.
 * Stored as a monotone (z, phi) table with slopes phi'(z) = q(phi).
 */
struct Profile {
    double upper = 1.0;
    double lower = 0.0;
    double speed = 0.0;
    double width = 0.0;
    std::vector<double> z;
    std::vector<double> phi;
    std::vector<double> slope;

    /// phi at z; constant platforms outside [0, width].
    double operator()(double zz) const {
        if (zz <= 0.0) return upper;
        if (zz >= width) return lower;
        const auto it = std::upper_bound(z.begin(), z.end(), zz);
        const std::size_t k = static_cast<std::size_t>(it - z.begin()) - 1;
        const double h = z[k + 1] - z[k];
        const double t = (zz - z[k]) / h;
        double m0 = slope[k];
        double m1 = slope[k + 1];
        const double secant = (phi[k + 1] - phi[k]) / h;
        // Fritsch-Carlson limiter keeps each piece monotone
        if (secant == 0.0) {
            m0 = m1 = 0.0;
        } else {
            const double alpha = m0 / secant;
            const double beta = m1 / secant;
            const double r2 = alpha * alpha + beta * beta;
            if (alpha < 0.0 || beta < 0.0) {
                m0 = m1 = secant;
            } else if (r2 > 9.0) {
                const double tau = 3.0 / std::sqrt(r2);
                m0 = tau * alpha * secant;
                m1 = tau * beta * secant;
            }
        }
        const double t2 = t * t;
        const double t3 = t2 * t;
        return (2 * t3 - 3 * t2 + 1) * phi[k] + (t3 - 2 * t2 + t) * h * m0 + (-2 * t3 + 3 * t2) * phi[k + 1] +
               (t3 - t2) * h * m1;
    }

    std::vector<std::pair<double, double>> table() const {
        std::vector<std::pair<double, double>> rows;
        rows.reserve(z.size());
        for (std::size_t i = 0; i < z.size(); ++i) rows.emplace_back(z[i], phi[i]);
        return rows;
    }
};

/// Profile sampled at n values of phi uniformly spaced in [lower, upper]
/// (endpoints included), each mapped through z_of_p.
inline Profile reconstruct_profile(const ReactionSpec& spec, const Front& front, int n_samples) {
    if (n_samples < 2) detail::fail("InvalidArgument", "n_samples must be at least 2");
    const FrontGeometry geo(spec, front);
    Profile prof;
    prof.upper = front.upper;
    prof.lower = front.lower;
    prof.speed = front.speed;

    const int n = n_samples;
    const double span = front.upper - front.lower;
    for (int i = 0; i < n; ++i) {
        const double p = (i == n - 1) ? front.lower : front.upper - span * static_cast<double>(i) / (n - 1);
        prof.z.push_back(geo.z_of_p(p));
        prof.phi.push_back(p);
        prof.slope.push_back((i == 0 || i == n - 1) ? 0.0 : -std::sqrt(geo.w(p)));
    }
    prof.width = geo.width();
    return prof;
}

/// Terrace plus shifts: Phi(t, x) = sum_j (phi_j(x - xi_j - c_j t) - lower_j).
struct TerraceFunction {
    std::vector<Profile> profiles;
    std::vector<double> shifts;

    double operator()(double t, double x) const {
        double u = 0.0;
        for (std::size_t j = 0; j < profiles.size(); ++j) {
            const Profile& p = profiles[j];
            u += p(x - shifts[j] - p.speed * t) - p.lower;
        }
        return u;
    }

    /// `x,u` rows on the given grid.
    std::vector<std::pair<double, double>> snapshot(double t, const std::vector<double>& xs) const {
        std::vector<std::pair<double, double>> rows;
        rows.reserve(xs.size());
        for (double x : xs) rows.emplace_back(x, (*this)(t, x));
        return rows;
    }
};

/// xi_1 = 0, xi_{j+1} = xi_j + width_j + gap: disjoint supports at t = 0 that
/// never close up, since speeds are nondecreasing.
inline std::vector<double> default_shifts(const std::vector<Profile>& profiles, double gap = kDefaultGap) {
    if (!(gap > 0.0)) detail::fail("InvalidArgument", "gap must be positive");
    std::vector<double> xi;
    double at = 0.0;
    for (const auto& p : profiles) {
        xi.push_back(at);
        at += p.width + gap;
    }
    return xi;
}

inline constexpr int kDefaultProfileSamples = 2001;

inline TerraceFunction make_terrace_function(const ReactionSpec& spec, const Terrace& terrace,
                                             double gap = kDefaultGap, int n_samples = kDefaultProfileSamples) {
    TerraceFunction tf;
    for (const auto& f : terrace.fronts) tf.profiles.push_back(reconstruct_profile(spec, f, n_samples));
    tf.shifts = default_shifts(tf.profiles, gap);
    return tf;
}

inline double terrace_eval(const TerraceFunction& tf, double t, double x) { return tf(t, x); }

inline std::string profile_csv(const Profile& p) { return io::csv("z,phi", p.table()); }

}  // namespace terrace
