#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numbers>
#include <vector>

#include "spc/errors.hpp"

namespace spc {

/// Nodes and weights of a one-dimensional quadrature rule.
struct Rule1D {
    std::vector<double> nodes;
    std::vector<double> weights;

    [[nodiscard]] std::size_t size() const { return nodes.size(); }

    template <class F>
    [[nodiscard]] auto integrate(F&& f) const -> decltype(f(0.0) * 1.0)
    {
        decltype(f(0.0) * 1.0) acc{};
        for (std::size_t i = 0; i < nodes.size(); ++i) acc += weights[i] * f(nodes[i]);
        return acc;
    }

    void append(const Rule1D& other)
    {
        nodes.insert(nodes.end(), other.nodes.begin(), other.nodes.end());
        weights.insert(weights.end(), other.weights.begin(), other.weights.end());
    }
};

namespace detail {

struct GaussLegendreRef {
    std::vector<double> x;
    std::vector<double> w;
};

// Reference rule on [-1, 1] by Newton iteration on P_n.
inline GaussLegendreRef gauss_legendre_reference(std::size_t n)
{
    GaussLegendreRef ref{std::vector<double>(n), std::vector<double>(n)};
    const std::size_t half = (n + 1) / 2;
    for (std::size_t i = 0; i < half; ++i) {
        double z = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                            (static_cast<double>(n) + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0;
            double p1 = 0.0;
            for (std::size_t j = 1; j <= n; ++j) {
                const double p2 = p1;
                p1 = p0;
                const auto jd = static_cast<double>(j);
                p0 = ((2.0 * jd - 1.0) * z * p1 - (jd - 1.0) * p2) / jd;
            }
            dp = static_cast<double>(n) * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-15) break;
        }
        ref.x[i] = -z;
        ref.x[n - 1 - i] = z;
        ref.w[i] = ref.w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    return ref;
}

} // namespace detail

/// n-point Gauss-Legendre rule mapped onto [a, b], nodes ascending.
inline Rule1D gauss_legendre(std::size_t n, double a, double b)
{
    if (n == 0) throw DomainError("gauss_legendre: need at least one node");
    thread_local std::map<std::size_t, detail::GaussLegendreRef> cache;
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, detail::gauss_legendre_reference(n)).first;
    const auto& ref = it->second;
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    Rule1D rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        rule.nodes[i] = mid + half * ref.x[i];
        rule.weights[i] = half * ref.w[i];
    }
    return rule;
}

/// Settings for principal-value integration of a single simple pole.
///
/// The band |u - u0| < epsilon is excluded symmetrically. Distances from the
/// pole in [epsilon, near_width] are integrated in the variable t = ln|u - u0|,
/// where the pole weight 1/|u - u0| becomes a constant; the rest uses plain
/// Gauss-Legendre. near_width is clamped to at least 2*epsilon.
struct PvOptions {
    double epsilon = 0.0;
    double near_width = 0.0;
    std::size_t near_nodes = 48;
    std::size_t far_nodes = 64;
};

/// Rule R with sum_j R.w_j g(R.u_j) ~= PV int_0^upper g(u) / (u0 - u) du.
/// The band |u - u0| < epsilon is excluded and then restored to first order,
/// leaving an O(epsilon^2) error. Poles outside [0, upper] exclude nothing;
/// the log map resolves the near-singular edge.
inline Rule1D pv_pole_rule(double u0, double upper, const PvOptions& opt)
{
    if (!(opt.epsilon > 0.0)) throw DomainError("pv_pole_rule: epsilon must be positive");
    if (!(upper > 0.0)) throw DomainError("pv_pole_rule: upper limit must be positive");
    const double near = std::max(opt.near_width, 2.0 * opt.epsilon);

    Rule1D rule;
    // side = +1: u < u0 (kernel +1/d); side = -1: u > u0 (kernel -1/d).
    auto add_side = [&](double d_lo, double d_hi, double side, bool exclude) {
        if (exclude) d_lo = std::max(d_lo, opt.epsilon);
        if (!(d_lo > 0.0)) return;
        if (!(d_hi > d_lo)) return;
        const double split = std::clamp(near, d_lo, d_hi);
        if (split > d_lo) {
            const auto lg = gauss_legendre(opt.near_nodes, std::log(d_lo), std::log(split));
            for (std::size_t i = 0; i < lg.size(); ++i) {
                const double d = std::exp(lg.nodes[i]);
                rule.nodes.push_back(std::clamp(u0 - side * d, 0.0, upper));
                rule.weights.push_back(side * lg.weights[i]);
            }
        }
        if (d_hi > split) {
            const auto lin = gauss_legendre(opt.far_nodes, split, d_hi);
            for (std::size_t i = 0; i < lin.size(); ++i) {
                const double d = lin.nodes[i];
                rule.nodes.push_back(std::clamp(u0 - side * d, 0.0, upper));
                rule.weights.push_back(side * lin.weights[i] / d);
            }
        }
    };

    const bool on_interval = u0 >= 0.0 && u0 <= upper;
    // Left of the pole: u in [0, min(u0, upper)], distance d = u0 - u.
    if (u0 > 0.0) add_side(std::max(u0 - upper, 0.0), u0, +1.0, on_interval);
    // Right of the pole: u in [max(u0, 0), upper], distance d = u - u0.
    if (u0 < upper) add_side(std::max(-u0, 0.0), upper - u0, -1.0, on_interval);

    // After subtracting g(u0) the band integrand is -g'(u0) + O(u - u0), so a
    // difference pair at the band ends restores it exactly for linear g.
    if (on_interval) {
        const double lo = std::max(u0 - opt.epsilon, 0.0);
        const double hi = std::min(u0 + opt.epsilon, upper);
        rule.nodes.push_back(hi);
        rule.weights.push_back(-1.0);
        rule.nodes.push_back(lo);
        rule.weights.push_back(1.0);
    }

    // Constants integrate exactly: the residual weight sits at the pole (or the
    // nearest end), so the rule acts as singularity subtraction. This removes
    // the O(epsilon) bias of a band clipped by an end of the interval.
    if (u0 != 0.0 && u0 != upper) {
        double sum = 0.0;
        for (double w : rule.weights) sum += w;
        rule.nodes.push_back(std::clamp(u0, 0.0, upper));
        rule.weights.push_back(std::log(std::abs(u0) / std::abs(upper - u0)) - sum);
    }
    return rule;
}

/// Rule on [a, b] for integrands with integrable (logarithmic) singularities at
/// the listed interior or end points. Each piece adjacent to a singular point
/// is integrated in t = ln(distance), which turns d ln d into a smooth
/// integrand; the stretch closer than 1e-14 (b - a) to the point is dropped.
inline Rule1D graded_rule(double a, double b, std::vector<double> singular, std::size_t n)
{
    if (!(b > a)) throw DomainError("graded_rule: need a < b");
    std::vector<double> cuts{a, b};
    for (double s : singular)
        if (s > a && s < b) cuts.push_back(s);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    auto is_singular = [&](double x) {
        return std::find(singular.begin(), singular.end(), x) != singular.end();
    };
    const double floor = 1e-14 * (b - a);

    Rule1D rule;
    // Graded piece between a singular point s and a regular point r.
    auto add_graded = [&](double s, double r) {
        const double len = std::abs(r - s);
        const double dir = r > s ? 1.0 : -1.0;
        const auto lg = gauss_legendre(n, std::log(floor), std::log(len));
        for (std::size_t i = 0; i < lg.size(); ++i) {
            const double d = std::exp(lg.nodes[i]);
            rule.nodes.push_back(s + dir * d);
            rule.weights.push_back(lg.weights[i] * d);
        }
    };
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double x0 = cuts[i];
        const double x1 = cuts[i + 1];
        const bool s0 = is_singular(x0);
        const bool s1 = is_singular(x1);
        if (!s0 && !s1) {
            rule.append(gauss_legendre(n, x0, x1));
        } else if (s0 && s1) {
            const double mid = 0.5 * (x0 + x1);
            add_graded(x0, mid);
            add_graded(x1, mid);
        } else if (s0) {
            add_graded(x0, x1);
        } else {
            add_graded(x1, x0);
        }
    }
    return rule;
}

} // namespace spc
