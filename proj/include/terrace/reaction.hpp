#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "terrace/error.hpp"
#include "terrace/polynomial.hpp"

namespace terrace {

enum class Stability { Stable, Unstable };

inline const char* to_string(Stability s) { return s == Stability::Stable ? "stable" : "unstable"; }

struct SteadyState {
    double value = 0.0;
    Stability stability = Stability::Stable;
    double f_left = 0.0;   // lim f(u), u -> value^-
    double f_right = 0.0;  // lim f(u), u -> value^+
};

/// One polynomial piece of f on [lo, hi].
struct Segment {
    double lo = 0.0;
    double hi = 0.0;
    Polynomial poly;
};

/// Unvalidated reaction as read from a file: steady states (descending) with
/// their declared stability, the pieces covering [0, 1], and the polynomials
/// used below 0 and above 1.
struct ReactionCandidate {
    std::vector<std::pair<double, Stability>> steady_states;
    std::vector<Segment> segments;
    Polynomial extension_below;
    Polynomial extension_above;
};

/// Width of the extension intervals [-margin, 0) and (1, 1 + margin] on which
/// the sign pattern and sup norm are certified. The extension polynomials are
/// still used beyond them.
inline constexpr double kExtensionMargin = 1.0;

struct Violation {
    std::string kind;    // NonAlternatingStability, SignViolation, MissingJump, NonzeroAtUnstable, BadOrdering
    std::string detail;  // human-readable location, e.g. "0.5" or "(0.5, 1)"

    std::string describe() const { return kind + "(" + detail + ")"; }
};

class ValidationError : public Error {
public:
    explicit ValidationError(std::vector<Violation> violations)
        : Error("ValidationError", summarize(violations)), violations_(std::move(violations)) {}

    const std::vector<Violation>& violations() const noexcept { return violations_; }

    bool has(const std::string& kind) const {
        return std::any_of(violations_.begin(), violations_.end(),
                           [&](const Violation& v) { return v.kind == kind; });
    }

private:
    static std::string summarize(const std::vector<Violation>& vs) {
        std::string s;
        for (const auto& v : vs) {
            if (!s.empty()) s += "; ";
            s += v.describe();
        }
        return s;
    }

    std::vector<Violation> violations_;
};

struct OneSidedLimits {
    double left;
    double right;
};

struct StatePartition {
    std::vector<double> stable;
    std::vector<double> unstable;
};

class ReactionSpec;
ReactionSpec validate(const ReactionCandidate& raw);

/**
 * Validated multistable reaction f.
 *
 * Steady states run 1 = theta_0 > theta_1 > ... > theta_2I = 0 with even
 * indices stable (f jumps from positive to negative) and odd indices unstable
 * (f continuous and zero). Immutable once built; only `validate` constructs it.
 */
class ReactionSpec {
public:
    const std::vector<SteadyState>& steady_states() const noexcept { return states_; }

    /// Pieces in ascending order: extension below, the [0, 1] pieces, extension above.
    const std::vector<Segment>& segments() const noexcept { return segments_; }

    const Segment& extension_below() const noexcept { return segments_.front(); }
    const Segment& extension_above() const noexcept { return segments_.back(); }

    /// Number of positive stable states; there are 2I + 1 steady states.
    int multiplicity() const noexcept { return static_cast<int>(states_.size() - 1) / 2; }

    /// Certified bound on |f| over [-margin, 1 + margin].
    double sup_norm() const noexcept { return sup_norm_; }

    /// Certified bound on |f'| over the same domain, away from the jumps.
    double lipschitz() const noexcept { return lipschitz_; }

    bool is_stable_state(double p) const noexcept {
        return std::any_of(states_.begin(), states_.end(), [&](const SteadyState& s) {
            return s.stability == Stability::Stable && s.value == p;
        });
    }

    /// f(p). Throws EvalAtStableState at a stable value, where f is not defined.
    double eval(double p) const {
        for (const auto& s : states_) {
            if (s.value == p) {
                if (s.stability == Stability::Stable) {
                    detail::fail("EvalAtStableState", format(p));
                }
                return 0.0;
            }
        }
        return segment_containing(p).poly(p);
    }

    /// Index into `segments()` of the piece owning the open neighborhood of p
    /// (p must not be a breakpoint for the result to be unambiguous; at a
    /// breakpoint the piece above is returned).
    std::size_t segment_index(double p) const noexcept {
        if (p < 0.0) return 0;
        if (p >= 1.0) return segments_.size() - 1;
        const auto it = std::upper_bound(breaks_.begin(), breaks_.end(), p);
        return static_cast<std::size_t>(it - breaks_.begin());
    }

    const Segment& segment_containing(double p) const noexcept { return segments_[segment_index(p)]; }

    OneSidedLimits one_sided_limits(double theta) const {
        for (const auto& s : states_) {
            if (s.value == theta) return {s.f_left, s.f_right};
        }
        detail::fail("NotABreakpoint", format(theta));
    }

    StatePartition classify_states() const {
        StatePartition out;
        for (const auto& s : states_) {
            (s.stability == Stability::Stable ? out.stable : out.unstable).push_back(s.value);
        }
        return out;
    }

    /// Largest unstable state strictly below `p`, or -1 if none.
    double unstable_below(double p) const noexcept {
        for (const auto& s : states_) {
            if (s.stability == Stability::Unstable && s.value < p) return s.value;
        }
        return -1.0;
    }

    /// Breakpoints in [0, 1], ascending (the steady-state values).
    const std::vector<double>& breakpoints() const noexcept { return breaks_; }

    static std::string format(double v) {
        std::ostringstream os;
        os.precision(17);
        os << v;
        return os.str();
    }

private:
    ReactionSpec() = default;
    friend ReactionSpec validate(const ReactionCandidate& raw);

    std::vector<SteadyState> states_;
    std::vector<Segment> segments_;
    std::vector<double> breaks_;
    double sup_norm_ = 0.0;
    double lipschitz_ = 0.0;
};

namespace detail {

inline std::string interval_text(double a, double b) {
    return "(" + ReactionSpec::format(a) + ", " + ReactionSpec::format(b) + ")";
}

/// f must be strictly `positive` (or strictly negative) on the open interval
/// (lo, hi); zeros at the endpoints are allowed.
inline bool has_strict_sign(const Polynomial& poly, double lo, double hi, bool positive) {
    if (poly.is_zero()) return false;
    const double width = hi - lo;
    const double edge = 1e-9 * std::max(1.0, width);
    for (double r : real_roots(poly, lo, hi)) {
        if (r > lo + edge && r < hi - edge) return false;
    }
    // no interior root: one probe decides the sign
    const double v = poly(lo + 0.5 * width);
    return positive ? v > 0.0 : v < 0.0;
}

}  // namespace detail

/// Certifies (H1)-(H3)-style hypotheses on a candidate reaction. Structural
/// problems are reported first; sign and continuity checks run only when the
/// structure is usable. Throws ValidationError carrying every violation.
inline ReactionSpec validate(const ReactionCandidate& raw) {
    std::vector<Violation> bad;
    const auto& st = raw.steady_states;

    if (st.size() < 3 || st.size() % 2 == 0) {
        bad.push_back({"BadOrdering", "need 2I+1 >= 3 steady states, got " + std::to_string(st.size())});
    } else {
        if (st.front().first != 1.0) bad.push_back({"BadOrdering", "first steady state must be 1"});
        if (st.back().first != 0.0) bad.push_back({"BadOrdering", "last steady state must be 0"});
        for (std::size_t i = 0; i + 1 < st.size(); ++i) {
            if (!(st[i].first > st[i + 1].first)) {
                bad.push_back({"BadOrdering", "steady states not strictly descending at index " + std::to_string(i)});
            }
        }
        for (std::size_t i = 0; i < st.size(); ++i) {
            const Stability expect = (i % 2 == 0) ? Stability::Stable : Stability::Unstable;
            if (st[i].second != expect) {
                bad.push_back({"NonAlternatingStability", ReactionSpec::format(st[i].first)});
            }
        }
    }

    // Pieces must tile [0, 1] exactly on the steady-state grid.
    std::vector<Segment> pieces = raw.segments;
    std::sort(pieces.begin(), pieces.end(), [](const Segment& a, const Segment& b) { return a.lo < b.lo; });
    if (bad.empty()) {
        if (pieces.size() != st.size() - 1) {
            bad.push_back({"BadOrdering", "expected " + std::to_string(st.size() - 1) + " segments, got " +
                                              std::to_string(pieces.size())});
        } else {
            for (std::size_t k = 0; k < pieces.size(); ++k) {
                const double lo = st[st.size() - 1 - k].first;
                const double hi = st[st.size() - 2 - k].first;
                if (pieces[k].lo != lo || pieces[k].hi != hi) {
                    bad.push_back({"BadOrdering", "segment " + detail::interval_text(pieces[k].lo, pieces[k].hi) +
                                                      " does not span adjacent steady states " +
                                                      detail::interval_text(lo, hi)});
                }
            }
        }
    }
    if (!bad.empty()) throw ValidationError(std::move(bad));

    ReactionSpec spec;
    spec.segments_.push_back({-kExtensionMargin, 0.0, raw.extension_below});
    for (const auto& seg : pieces) spec.segments_.push_back(seg);
    spec.segments_.push_back({1.0, 1.0 + kExtensionMargin, raw.extension_above});

    // (H1) sign pattern: pieces alternate, positive directly below each stable state.
    const auto& segs = spec.segments_;
    for (std::size_t k = 0; k < segs.size(); ++k) {
        bool positive;
        if (k == 0) {
            positive = true;
        } else if (k + 1 == segs.size()) {
            positive = false;
        } else {
            // the piece's upper endpoint is stable iff its index from the top is even
            const std::size_t upper_index = st.size() - 1 - k;
            positive = (upper_index % 2 == 0);
        }
        if (!detail::has_strict_sign(segs[k].poly, segs[k].lo, segs[k].hi, positive)) {
            bad.push_back({"SignViolation", detail::interval_text(segs[k].lo, segs[k].hi)});
        }
    }

    // Limits at every breakpoint; the piece just below value st[i] is segs[n-1-i]
    // counting from the top (extension above is the last piece).
    const std::size_t n = segs.size();
    for (std::size_t i = 0; i < st.size(); ++i) {
        const double theta = st[i].first;
        const Segment& below = segs[n - 2 - i];
        const Segment& above = segs[n - 1 - i];
        SteadyState s{theta, st[i].second, below.poly(theta), above.poly(theta)};
        if (s.stability == Stability::Stable) {
            if (!(s.f_left > 0.0 && s.f_right < 0.0)) {
                bad.push_back({"MissingJump", ReactionSpec::format(theta)});
            }
        } else {
            const double tol = 1e-12 * std::max({1.0, below.poly.scale(), above.poly.scale()});
            if (std::abs(s.f_left) > tol || std::abs(s.f_right) > tol) {
                bad.push_back({"NonzeroAtUnstable", ReactionSpec::format(theta)});
            }
            s.f_left = 0.0;
            s.f_right = 0.0;
        }
        spec.states_.push_back(s);
    }
    if (!bad.empty()) throw ValidationError(std::move(bad));

    for (const auto& seg : segs) {
        spec.sup_norm_ = std::max(spec.sup_norm_, max_abs(seg.poly, seg.lo, seg.hi));
        spec.lipschitz_ = std::max(spec.lipschitz_, max_abs(seg.poly.derivative(), seg.lo, seg.hi));
    }
    for (auto it = spec.states_.rbegin(); it != spec.states_.rend(); ++it) spec.breaks_.push_back(it->value);
    return spec;
}

}  // namespace terrace
