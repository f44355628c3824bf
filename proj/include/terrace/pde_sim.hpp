#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "terrace/error.hpp"
#include "terrace/io.hpp"
#include "terrace/profile.hpp"
#include "terrace/reaction.hpp"

namespace terrace {

enum class Scheme {
    ExplicitEuler,  // forward Euler, centered differences, CFL-limited
    SplitImplicit,  // Strang splitting: exact reaction flow + TR-BDF2 diffusion
};

inline std::string to_string(Scheme s) { return s == Scheme::ExplicitEuler ? "explicit" : "split"; }

struct StepIC {
    double location = 0.0;
    double upper = 1.0;
    double lower = 0.0;
};
struct TerraceSnapshotIC {
    TerraceFunction tf;
};
struct TableIC {
    std::vector<std::pair<double, double>> samples;  // (x, u), increasing x
};
using InitialCondition = std::variant<StepIC, TerraceSnapshotIC, TableIC>;

struct Dirichlet {
    double left_value;
    double right_value;
};

struct PdeConfig {
    double x_min = -10.0;
    double x_max = 10.0;
    double dx = 2e-3;
    double dt = 0.0;  // 0 picks the scheme default
    double t_final = 1.0;
    double cfl_safety = 0.4;
    InitialCondition ic = StepIC{};
    std::optional<Dirichlet> boundary;  // defaults to the initial values at the two ends
    Scheme scheme = Scheme::SplitImplicit;
    double snapshot_interval = 0.0;  // 0 keeps only t = 0 and t_final
    std::vector<double> track_levels;

    std::size_t nodes() const { return static_cast<std::size_t>(std::llround((x_max - x_min) / dx)) + 1; }

    /// Effective time step: explicit runs use cfl_safety * dx^2 / 2, split
    /// runs use dx / 2.
    double effective_dt() const {
        if (dt > 0.0) return dt;
        return scheme == Scheme::ExplicitEuler ? cfl_safety * dx * dx / 2.0 : 0.5 * dx;
    }
};

struct Snapshot {
    double t;
    std::vector<double> u;
};

struct FrontTrack {
    double level;
    std::vector<std::pair<double, double>> points;  // (t, x_level)
};

struct PdeResult {
    std::vector<double> x;
    std::vector<Snapshot> snapshots;
    std::vector<FrontTrack> front_tracks;
    double dx = 0.0;
    double dt = 0.0;
    Scheme scheme = Scheme::SplitImplicit;
    bool from_terrace_snapshot = false;
};

inline constexpr double kBlowUpBound = 10.0;

namespace detail {

/// f with the PDE convention f(stable state) = 0.
inline double pde_reaction(const ReactionSpec& spec, double u) {
    return spec.is_stable_state(u) ? 0.0 : spec.eval(u);
}

/**
 * Exact flow of u' = f(u) over time dt at one node.
 *
 * Inside a piece f is a smooth polynomial, integrated with RK4. A trajectory
 * that would leave the piece is stopped at its boundary: the hitting time is
 * the integral of du / f(u), the remaining time continues in the next piece,
 * and a stable boundary absorbs the node, since f points into it from both
 * sides.
 */
class ReactionFlow {
public:
    explicit ReactionFlow(const ReactionSpec& spec) : spec_(&spec), segs_(&spec.segments()) {
        for (const auto& s : spec.steady_states()) {
            if (s.stability == Stability::Stable) {
                stable_.push_back(s.value);
                pull_.push_back(std::min(std::abs(s.f_left), std::abs(s.f_right)));
            }
        }
    }

    double operator()(double u, double dt) const {
        // a node this close to a stable state is absorbed within a tiny
        // fraction of the step
        for (std::size_t j = 0; j < stable_.size(); ++j) {
            if (std::abs(u - stable_[j]) <= 1e-3 * dt * pull_[j]) return stable_[j];
        }
        double left = dt;
        for (int guard = 0; guard < 64 && left > 0.0; ++guard) {
            if (is_stable(u)) return u;
            const std::size_t k = piece_for(u);
            if (k == kNone) return u;  // unstable state: f(u) = 0
            const Segment& seg = (*segs_)[k];
            const Polynomial& g = seg.poly;
            const double g0 = g(u);
            const double target = g0 > 0.0 ? seg.hi : seg.lo;
            const double next = rk4(g, u, left);
            const bool crossed = g0 > 0.0 ? next >= target : next <= target;
            if (!crossed) return next;
            left -= hitting_time(g, u, target);
            u = target;
        }
        return u;
    }

private:
    static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

    bool is_stable(double u) const { return std::find(stable_.begin(), stable_.end(), u) != stable_.end(); }

    // piece whose flow carries u; at a breakpoint the side the flow enters
    std::size_t piece_for(double u) const {
        const std::size_t above = spec_->segment_index(u);
        const Segment& a = (*segs_)[above];
        const double fa = a.poly(u);
        if (u != a.lo || above == 0) return fa == 0.0 ? kNone : above;
        if (fa > 0.0) return above;
        const double fb = (*segs_)[above - 1].poly(u);
        if (fb < 0.0) return above - 1;
        return kNone;
    }

    static double rk4(const Polynomial& g, double u, double h) {
        const double k1 = g(u);
        const double k2 = g(u + 0.5 * h * k1);
        const double k3 = g(u + 0.5 * h * k2);
        const double k4 = g(u + h * k3);
        return u + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }

    // int_u^target ds / g(s) by 5-point Gauss-Legendre; g keeps one sign there
    static double hitting_time(const Polynomial& g, double u, double target) {
        static constexpr double node[5] = {0.0, 0.5384693101056831, -0.5384693101056831, 0.9061798459386640,
                                           -0.9061798459386640};
        static constexpr double weight[5] = {0.5688888888888889, 0.4786286704993665, 0.4786286704993665,
                                             0.2369268850561891, 0.2369268850561891};
        const double mid = 0.5 * (u + target);
        const double half = 0.5 * (target - u);
        double sum = 0.0;
        for (int i = 0; i < 5; ++i) sum += weight[i] / g(mid + half * node[i]);
        return std::max(sum * half, 0.0);
    }

    const ReactionSpec* spec_;
    const std::vector<Segment>* segs_;
    std::vector<double> stable_;
    std::vector<double> pull_;  // smaller one-sided |f| at each stable state
};

/// Constant-coefficient tridiagonal solve of (1 + 2r) v_i - r (v_{i-1} + v_{i+1}) = rhs_i
/// on interior nodes, with the boundary values of v held fixed.
class ImplicitDiffusion {
public:
    ImplicitDiffusion(std::size_t n, double r) : r_(r), c_(n, 0.0), inv_(n, 1.0) {
        const double diag = 1.0 + 2.0 * r;
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const double prev_c = (i == 1) ? 0.0 : c_[i - 1];
            inv_[i] = 1.0 / (diag + r * prev_c);
            c_[i] = -r * inv_[i];
        }
    }

    /// Overwrites rhs (whose first and last entries are the boundary values) with the solution.
    void solve(std::vector<double>& v) const {
        const std::size_t n = v.size();
        if (n < 3) return;
        v[1] += r_ * v[0];
        v[n - 2] += r_ * v[n - 1];
        v[1] *= inv_[1];
        for (std::size_t i = 2; i + 1 < n; ++i) v[i] = (v[i] + r_ * v[i - 1]) * inv_[i];
        for (std::size_t i = n - 2; i-- > 1;) v[i] -= c_[i] * v[i + 1];
    }

private:
    double r_;
    std::vector<double> c_;
    std::vector<double> inv_;
};

inline double initial_value(const InitialCondition& ic, double x) {
    return std::visit(
        [x](const auto& v) -> double {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, StepIC>) {
                return x < v.location ? v.upper : (x > v.location ? v.lower : 0.5 * (v.upper + v.lower));
            } else if constexpr (std::is_same_v<T, TerraceSnapshotIC>) {
                return v.tf(0.0, x);
            } else {
                const auto& s = v.samples;
                if (x <= s.front().first) return s.front().second;
                if (x >= s.back().first) return s.back().second;
                const auto it = std::upper_bound(s.begin(), s.end(), x,
                                                 [](double a, const auto& row) { return a < row.first; });
                const auto& [x1, u1] = *it;
                const auto& [x0, u0] = *(it - 1);
                return u0 + (u1 - u0) * (x - x0) / (x1 - x0);
            }
        },
        ic);
}

inline void check_config(const PdeConfig& cfg) {
    auto bad = [](const std::string& what) { fail("InvalidArgument", what); };
    if (!(cfg.x_max > cfg.x_min)) bad("x_max must exceed x_min");
    if (!(cfg.dx > 0.0) || cfg.nodes() < 3) bad("dx must be positive and give at least 3 nodes");
    if (!(cfg.t_final >= 0.0)) bad("t_final must be nonnegative");
    if (!(cfg.cfl_safety > 0.0 && cfg.cfl_safety <= 1.0)) bad("cfl_safety must lie in (0, 1]");
    if (cfg.dt < 0.0) bad("dt must be positive (or 0 for the default)");
    if (cfg.snapshot_interval < 0.0) bad("snapshot_interval must be nonnegative");
    if (const auto* t = std::get_if<TableIC>(&cfg.ic)) {
        if (t->samples.empty()) bad("table initial condition is empty");
        for (std::size_t i = 1; i < t->samples.size(); ++i) {
            if (!(t->samples[i].first > t->samples[i - 1].first)) bad("table x values must increase");
        }
    }
    if (cfg.scheme == Scheme::ExplicitEuler) {
        const double limit = cfg.cfl_safety * cfg.dx * cfg.dx / 2.0;
        if (cfg.effective_dt() > limit * (1.0 + 1e-12)) {
            fail("StabilityViolation", "dt = " + ReactionSpec::format(cfg.effective_dt()) + " exceeds " +
                                           ReactionSpec::format(limit));
        }
    }
}

}  // namespace detail

/// All x where u crosses `level`, by linear interpolation between nodes.
inline std::vector<double> level_crossings(const std::vector<double>& x, const std::vector<double>& u, double level) {
    std::vector<double> out;
    for (std::size_t i = 0; i + 1 < u.size(); ++i) {
        const double a = u[i] - level;
        const double b = u[i + 1] - level;
        if (a == 0.0 && (i == 0 || (u[i - 1] - level) * b < 0.0)) {
            out.push_back(x[i]);
        } else if (a * b < 0.0) {
            out.push_back(x[i] + (x[i + 1] - x[i]) * a / (a - b));
        }
    }
    if (!u.empty() && u.back() == level && u.size() > 1 && u[u.size() - 2] != level) out.push_back(x.back());
    return out;
}

inline PdeResult simulate(const ReactionSpec& spec, const PdeConfig& cfg) {
    detail::check_config(cfg);
    const std::size_t n = cfg.nodes();
    PdeResult res;
    res.scheme = cfg.scheme;
    res.dx = (cfg.x_max - cfg.x_min) / static_cast<double>(n - 1);
    res.from_terrace_snapshot = std::holds_alternative<TerraceSnapshotIC>(cfg.ic);
    res.x.resize(n);
    for (std::size_t i = 0; i < n; ++i) res.x[i] = cfg.x_min + res.dx * static_cast<double>(i);

    std::vector<double> u(n);
    for (std::size_t i = 0; i < n; ++i) u[i] = detail::initial_value(cfg.ic, res.x[i]);
    const Dirichlet bc = cfg.boundary.value_or(Dirichlet{u.front(), u.back()});
    u.front() = bc.left_value;
    u.back() = bc.right_value;

    const std::size_t steps =
        cfg.t_final == 0.0 ? 0 : static_cast<std::size_t>(std::ceil(cfg.t_final / cfg.effective_dt() - 1e-9));
    const double dt = steps == 0 ? 0.0 : cfg.t_final / static_cast<double>(steps);
    res.dt = dt;
    const std::size_t every =
        cfg.snapshot_interval > 0.0 && dt > 0.0
            ? std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(cfg.snapshot_interval / dt)))
            : std::max<std::size_t>(steps, 1);

    const double dx2 = res.dx * res.dx;
    const detail::ReactionFlow flow(spec);
    // TR-BDF2 with gamma = 2 - sqrt(2)
    const double gamma = 2.0 - std::sqrt(2.0);
    const double r_tr = 0.5 * gamma * dt / dx2;
    const double r_bdf = (1.0 - gamma) / (2.0 - gamma) * dt / dx2;
    const double w_star = 1.0 / (gamma * (2.0 - gamma));
    const double w_old = (1.0 - gamma) * (1.0 - gamma) / (gamma * (2.0 - gamma));
    std::optional<detail::ImplicitDiffusion> trap, bdf2;
    if (cfg.scheme == Scheme::SplitImplicit && steps > 0) {
        trap.emplace(n, r_tr);
        bdf2.emplace(n, r_bdf);
    }
    std::vector<double> work(n), stage(n);

    auto record = [&](double t) {
        for (double v : u) {
            if (!(std::abs(v) <= kBlowUpBound)) {
                detail::fail("BlowUp", "|u| > " + ReactionSpec::format(kBlowUpBound) + " at t = " +
                                           ReactionSpec::format(t));
            }
        }
        res.snapshots.push_back({t, u});
    };
    record(0.0);

    for (std::size_t k = 1; k <= steps; ++k) {
        if (cfg.scheme == Scheme::ExplicitEuler) {
            for (std::size_t i = 1; i + 1 < n; ++i) {
                work[i] = u[i] + dt * ((u[i - 1] - 2.0 * u[i] + u[i + 1]) / dx2 + detail::pde_reaction(spec, u[i]));
            }
            for (std::size_t i = 1; i + 1 < n; ++i) u[i] = work[i];
        } else {
            for (std::size_t i = 1; i + 1 < n; ++i) u[i] = flow(u[i], 0.5 * dt);
            // trapezoidal stage to t + gamma dt
            stage[0] = u[0];
            stage[n - 1] = u[n - 1];
            for (std::size_t i = 1; i + 1 < n; ++i) stage[i] = u[i] + r_tr * (u[i - 1] - 2.0 * u[i] + u[i + 1]);
            trap->solve(stage);
            // BDF2 stage to t + dt
            work[0] = u[0];
            work[n - 1] = u[n - 1];
            for (std::size_t i = 1; i + 1 < n; ++i) work[i] = w_star * stage[i] - w_old * u[i];
            bdf2->solve(work);
            for (std::size_t i = 1; i + 1 < n; ++i) u[i] = flow(work[i], 0.5 * dt);
        }
        if (k % every == 0 || k == steps) {
            record(k == steps ? cfg.t_final : dt * static_cast<double>(k));
        } else if (!(std::abs(u[n / 2]) <= kBlowUpBound)) {
            detail::fail("BlowUp", "|u| > " + ReactionSpec::format(kBlowUpBound));
        }
    }

    for (double level : cfg.track_levels) {
        FrontTrack tr{level, {}};
        for (const auto& s : res.snapshots) {
            const auto xs = level_crossings(res.x, s.u, level);
            if (xs.size() == 1) tr.points.emplace_back(s.t, xs.front());
        }
        res.front_tracks.push_back(std::move(tr));
    }
    return res;
}

struct SpeedFit {
    double speed;
    double r2;
    std::size_t points;
};

/// Least-squares slope of the unique `level` crossing over snapshots with
/// t in [t0, t1].
inline SpeedFit measure_front_speed(const PdeResult& res, double level, double t0, double t1) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& s : res.snapshots) {
        if (s.t < t0 || s.t > t1) continue;
        const auto xs = level_crossings(res.x, s.u, level);
        if (xs.empty()) {
            detail::fail("LevelNotCrossed", "level " + ReactionSpec::format(level) + " at t = " +
                                                ReactionSpec::format(s.t));
        }
        if (xs.size() > 1) {
            detail::fail("MultipleCrossings", std::to_string(xs.size()) + " crossings of level " +
                                                  ReactionSpec::format(level) + " at t = " +
                                                  ReactionSpec::format(s.t));
        }
        pts.emplace_back(s.t, xs.front());
    }
    if (pts.size() < 2) {
        detail::fail("LevelNotCrossed", "fewer than two snapshots in the window [" + ReactionSpec::format(t0) +
                                            ", " + ReactionSpec::format(t1) + "]");
    }
    const double m = static_cast<double>(pts.size());
    double st = 0, sx = 0;
    for (const auto& [t, x] : pts) {
        st += t;
        sx += x;
    }
    const double tm = st / m, xm = sx / m;
    double stt = 0, stx = 0, sxx = 0;
    for (const auto& [t, x] : pts) {
        stt += (t - tm) * (t - tm);
        stx += (t - tm) * (x - xm);
        sxx += (x - xm) * (x - xm);
    }
    if (stt == 0.0) detail::fail("LevelNotCrossed", "window holds a single time");
    const double slope = stx / stt;
    const double r2 = sxx == 0.0 ? 1.0 : (stx * stx) / (stt * sxx);
    return {slope, r2, pts.size()};
}

/// max over snapshots of sup_x |u(t, x) - Phi(t, x)|.
inline double residual_vs_terrace(const PdeResult& res, const TerraceFunction& tf) {
    if (!res.from_terrace_snapshot) {
        detail::fail("InvalidArgument", "the run did not start from a terrace snapshot");
    }
    double worst = 0.0;
    for (const auto& s : res.snapshots) {
        if (s.u.size() != res.x.size()) {
            detail::fail("GridMismatch", "snapshot at t = " + ReactionSpec::format(s.t) + " has " +
                                             std::to_string(s.u.size()) + " values for " +
                                             std::to_string(res.x.size()) + " nodes");
        }
        for (std::size_t i = 0; i < s.u.size(); ++i) worst = std::max(worst, std::abs(s.u[i] - tf(s.t, res.x[i])));
    }
    return worst;
}

inline std::string snapshot_csv(const PdeResult& res, const Snapshot& s) {
    std::vector<std::pair<double, double>> rows;
    rows.reserve(res.x.size());
    for (std::size_t i = 0; i < res.x.size(); ++i) rows.emplace_back(res.x[i], s.u[i]);
    return io::csv("x,u", rows);
}

inline std::string track_csv(const FrontTrack& tr) { return io::csv("t,x_level", tr.points); }

}  // namespace terrace
