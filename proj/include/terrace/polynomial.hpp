#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <span>
#include <vector>

namespace terrace {

/// Dense real polynomial, coefficients in ascending powers.
class Polynomial {
public:
    Polynomial() = default;
    explicit Polynomial(std::vector<double> coeffs) : c_(std::move(coeffs)) { trim(); }
    Polynomial(std::initializer_list<double> coeffs) : c_(coeffs) { trim(); }

    static Polynomial constant(double v) { return Polynomial{v}; }

    /// Degree of the trimmed polynomial; the zero polynomial reports -1.
    int degree() const noexcept { return static_cast<int>(c_.size()) - 1; }
    bool is_zero() const noexcept { return c_.empty(); }
    std::span<const double> coefficients() const noexcept { return c_; }

    double operator()(double x) const noexcept {
        double acc = 0.0;
        for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * x + *it;
        return acc;
    }

    Polynomial derivative() const {
        if (c_.size() <= 1) return {};
        std::vector<double> d(c_.size() - 1);
        for (std::size_t k = 1; k < c_.size(); ++k) d[k - 1] = static_cast<double>(k) * c_[k];
        return Polynomial(std::move(d));
    }

    /// Antiderivative vanishing at 0.
    Polynomial antiderivative() const {
        if (c_.empty()) return {};
        std::vector<double> a(c_.size() + 1, 0.0);
        for (std::size_t k = 0; k < c_.size(); ++k) a[k + 1] = c_[k] / static_cast<double>(k + 1);
        return Polynomial(std::move(a));
    }

    double integral(double a, double b) const {
        const Polynomial anti = antiderivative();
        return anti(b) - anti(a);
    }

    /// Synthetic division by (x - root). The remainder (the value at `root`)
    /// is discarded, so callers divide only at known zeros.
    Polynomial deflate(double root) const {
        if (c_.size() <= 1) return {};
        std::vector<double> q(c_.size() - 1);
        double carry = 0.0;
        for (std::size_t k = c_.size() - 1; k >= 1; --k) {
            carry = carry * root + c_[k];
            q[k - 1] = carry;
        }
        return Polynomial(std::move(q));
    }

    /// Coefficient magnitude scale; used to turn absolute zero tests into
    /// relative ones.
    double scale() const noexcept {
        double s = 0.0;
        for (double v : c_) s = std::max(s, std::abs(v));
        return s;
    }

private:
    void trim() {
        while (!c_.empty() && c_.back() == 0.0) c_.pop_back();
    }

    std::vector<double> c_;
};

namespace detail {

/// Bisection for a sign change of `g` on [a, b]; assumes g(a), g(b) of
/// opposite sign. Runs to adjacent doubles.
template <class G>
double bisect_sign_change(const G& g, double a, double b, double ga) {
    for (int it = 0; it < 200; ++it) {
        const double m = 0.5 * (a + b);
        if (m <= a || m >= b) break;
        const double gm = g(m);
        if (gm == 0.0) return m;
        if ((gm < 0.0) == (ga < 0.0)) {
            a = m;
            ga = gm;
        } else {
            b = m;
        }
    }
    return 0.5 * (a + b);
}

inline void roots_recursive(const Polynomial& p, double lo, double hi, std::vector<double>& out) {
    if (p.degree() <= 0) return;
    if (p.degree() == 1) {
        const auto c = p.coefficients();
        const double r = -c[0] / c[1];
        if (r >= lo && r <= hi) out.push_back(r);
        return;
    }
    std::vector<double> knots{lo};
    roots_recursive(p.derivative(), lo, hi, knots);
    knots.push_back(hi);
    std::sort(knots.begin(), knots.end());

    const double zero_tol = 64.0 * std::numeric_limits<double>::epsilon() * p.scale() *
                            std::pow(std::max({1.0, std::abs(lo), std::abs(hi)}), p.degree());
    for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
        const double a = knots[k];
        const double b = knots[k + 1];
        const double pa = p(a);
        const double pb = p(b);
        if (std::abs(pa) <= zero_tol) {
            out.push_back(a);
            continue;
        }
        if (k + 2 == knots.size() && std::abs(pb) <= zero_tol) {
            out.push_back(b);
            continue;
        }
        if ((pa < 0.0) != (pb < 0.0) && std::abs(pb) > zero_tol) out.push_back(bisect_sign_change(p, a, b, pa));
    }
}

}  // namespace detail

/// All real roots of `p` in the closed interval [lo, hi], sorted ascending,
/// multiple roots reported once. The zero polynomial yields no roots; callers
/// that care must test `is_zero()` first.
inline std::vector<double> real_roots(const Polynomial& p, double lo, double hi) {
    std::vector<double> roots;
    detail::roots_recursive(p, lo, hi, roots);
    std::sort(roots.begin(), roots.end());
    const double merge = 1e-12 * std::max(1.0, hi - lo);
    std::vector<double> unique;
    for (double r : roots) {
        if (unique.empty() || r - unique.back() > merge) unique.push_back(r);
    }
    return unique;
}

struct Extrema {
    double min;
    double max;
};

/// Exact (to root-finding precision) range of `p` over [lo, hi] from the
/// endpoint values and every critical point inside.
inline Extrema extrema(const Polynomial& p, double lo, double hi) {
    Extrema e{std::min(p(lo), p(hi)), std::max(p(lo), p(hi))};
    for (double x : real_roots(p.derivative(), lo, hi)) {
        const double v = p(x);
        e.min = std::min(e.min, v);
        e.max = std::max(e.max, v);
    }
    return e;
}

inline double max_abs(const Polynomial& p, double lo, double hi) {
    const Extrema e = extrema(p, lo, hi);
    return std::max(std::abs(e.min), std::abs(e.max));
}

}  // namespace terrace
