#pragma once

// Four-mode scattering potential
//
//   V_abcd = sum_i int d^2k d^2q  phi_a^*(k) phi_c(k)
//                 [1/(k^2 - q^2 - D_i) - 1/(k^2 - q^2 + D_i)]  phi_b(q) phi_d^*(q)
//
// Index positions 1 and 3 sit on the k-momentum, 2 and 4 on q. The kernel
// depends on |k| and |q| only, so the angular integrals reduce to
// (2pi)^2 delta(l_a, l_c) delta(l_b, l_d), leaving a radial double integral.
// Both poles in q^2 are taken as principal values with a symmetric exclusion
// band of half-width epsilon.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "spc/errors.hpp"
#include "spc/modes.hpp"
#include "spc/quadrature.hpp"
#include "spc/tensor.hpp"

namespace spc {

/// Principal-value settings, relative to q_max^2.
struct PvConfig {
    double epsilon_rel = 1e-10;   ///< exclusion half-width / q_max^2
    double near_width_rel = 0.02; ///< extent of the log-mapped near zone / q_max^2
    std::size_t near_nodes = 48;
    std::size_t far_nodes = 64;

    [[nodiscard]] PvOptions options(double q_max) const
    {
        const double u = q_max * q_max;
        return {epsilon_rel * u, near_width_rel * u, near_nodes, far_nodes};
    }

    [[nodiscard]] PvConfig halved() const
    {
        PvConfig c = *this;
        c.epsilon_rel *= 0.5;
        return c;
    }
};

struct ScatteringPotential {
    RealTensor4 entries;
    std::vector<double> deltas; ///< absolute Delta_i values summed over
    double q_max = 0.0;

    [[nodiscard]] std::size_t side() const { return entries.side(); }
};

namespace detail {

/// T(u0) row: weights w_j at nodes u_j with sum_j w_j g(u_j) ~ PV int_0^U g(u)/(u0 - u) du.
inline Rule1D pole_rule(double u0, double upper, const PvOptions& opt)
{
    return pv_pole_rule(u0, upper, opt);
}

} // namespace detail

/// Scattering potential over the basis for the listed gaps (absolute units of
/// momentum squared). The outer radial rule places grid.n_r() nodes on each
/// piece between singular points.
inline ScatteringPotential scattering_potential(const BasisSpec& spec, std::span<const double> deltas,
                                                const QuadratureGrid& grid,
                                                const PvConfig& pv = {})
{
    spec.validate();
    const auto modes = enumerate_modes(spec);
    const std::size_t m = modes.size();
    const double upper = grid.q_max * grid.q_max;
    const auto opt = pv.options(grid.q_max);

    // Real radial profiles R_a(k) with Phi_a^* Phi_c = R_a R_c whenever l_a = l_c.
    auto radial = [&](std::size_t a, double k) {
        const cplx v = momentum_radial(modes[a], k, spec) / minus_i_pow(std::abs(modes[a].l));
        return v.real();
    };

    ScatteringPotential out{RealTensor4(m), std::vector<double>(deltas.begin(), deltas.end()),
                            grid.q_max};
    const double angular = 4.0 * std::numbers::pi * std::numbers::pi;

    // W(i, b, d) = int q dq K(k_i, q) R_b(q) R_d(q), with q dq = du / 2.
    std::vector<double> pair_k(m * m);
    std::vector<double> pair_w(m * m);
    std::vector<double> rq(m);
    // The inner integrals have log singularities where a pole reaches the
    // ends of [0, q_max^2], i.e. at k^2 = |D| and k^2 = q_max^2 - |D|.
    std::vector<double> singular{0.0};
    for (double delta : deltas) {
        const double d = std::abs(delta);
        if (d > 0.0 && d < upper) {
            singular.push_back(std::sqrt(d));
            singular.push_back(std::sqrt(upper - d));
        }
    }
    const auto outer = graded_rule(0.0, grid.q_max, singular, grid.n_r());
    for (std::size_t i = 0; i < outer.size(); ++i) {
        const double k = outer.nodes[i];
        const double k2 = k * k;
        std::fill(pair_w.begin(), pair_w.end(), 0.0);
        for (double delta : deltas) {
            if (delta == 0.0) continue;
            // The bracket is odd in D: evaluate at |D| and carry the sign.
            const double odd = delta > 0.0 ? 1.0 : -1.0;
            for (double sign : {+1.0, -1.0}) {
                // 1/(k^2 - q^2 - D) = 1/(u0 - u) with u0 = k^2 - D; second term enters negated.
                const double u0 = k2 - sign * std::abs(delta);
                const auto rule = detail::pole_rule(u0, upper, opt);
                for (std::size_t j = 0; j < rule.size(); ++j) {
                    const double q = std::sqrt(rule.nodes[j]);
                    for (std::size_t b = 0; b < m; ++b) rq[b] = radial(b, q);
                    const double w = odd * sign * 0.5 * rule.weights[j];
                    for (std::size_t b = 0; b < m; ++b)
                        for (std::size_t d = 0; d < m; ++d)
                            if (modes[b].l == modes[d].l) pair_w[b * m + d] += w * rq[b] * rq[d];
                }
            }
        }
        const double wk = outer.weights[i] * k * angular;
        for (std::size_t a = 0; a < m; ++a) rq[a] = radial(a, k);
        for (std::size_t a = 0; a < m; ++a)
            for (std::size_t c = 0; c < m; ++c)
                pair_k[a * m + c] = modes[a].l == modes[c].l ? wk * rq[a] * rq[c] : 0.0;
        for (std::size_t a = 0; a < m; ++a)
            for (std::size_t c = 0; c < m; ++c) {
                const double pk = pair_k[a * m + c];
                if (pk == 0.0) continue;
                for (std::size_t b = 0; b < m; ++b)
                    for (std::size_t d = 0; d < m; ++d)
                        out.entries(a, b, c, d) += pk * pair_w[b * m + d];
            }
    }
    return out;
}

inline ScatteringPotential scattering_potential(const BasisSpec& spec, double delta,
                                                const QuadratureGrid& grid, const PvConfig& pv = {})
{
    const double d[1] = {delta};
    return scattering_potential(spec, std::span<const double>(d), grid, pv);
}

// ---------------------------------------------------------------------------
// Partial traces and structure metrics

/// V_nm = sum_c V(n, m, c, c).
inline Eigen::MatrixXd trace_last_pair(const RealTensor4& v)
{
    const auto m = static_cast<Eigen::Index>(v.side());
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(m, m);
    for (std::size_t a = 0; a < v.side(); ++a)
        for (std::size_t b = 0; b < v.side(); ++b)
            for (std::size_t c = 0; c < v.side(); ++c)
                out(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) += v(a, b, c, c);
    return out;
}

/// V_kl = sum_a V(a, a, k, l).
inline Eigen::MatrixXd trace_first_pair(const RealTensor4& v)
{
    const auto m = static_cast<Eigen::Index>(v.side());
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(m, m);
    for (std::size_t a = 0; a < v.side(); ++a)
        for (std::size_t c = 0; c < v.side(); ++c)
            for (std::size_t d = 0; d < v.side(); ++d)
                out(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(d)) += v(a, a, c, d);
    return out;
}

/// V_mk = sum_a V(a, m, k, a): the two middle indices kept.
inline Eigen::MatrixXd trace_outer_pair(const RealTensor4& v)
{
    const auto m = static_cast<Eigen::Index>(v.side());
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(m, m);
    for (std::size_t a = 0; a < v.side(); ++a)
        for (std::size_t b = 0; b < v.side(); ++b)
            for (std::size_t c = 0; c < v.side(); ++c)
                out(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(c)) += v(a, b, c, a);
    return out;
}

inline double mean_abs_diagonal(const Eigen::MatrixXd& a)
{
    return a.diagonal().cwiseAbs().mean();
}

/// max |off-diagonal| / mean |diagonal|.
inline double off_diagonal_ratio(const Eigen::MatrixXd& a)
{
    double off = 0.0;
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            if (i != j) off = std::max(off, std::abs(a(i, j)));
    const double diag = mean_abs_diagonal(a);
    return diag > 0.0 ? off / diag : 0.0;
}

/// Number of super-diagonals whose largest |entry| exceeds half the mean |diagonal|.
inline int half_max_bandwidth(const Eigen::MatrixXd& a)
{
    const double half = 0.5 * mean_abs_diagonal(a);
    int count = 0;
    for (Eigen::Index d = 1; d < a.cols(); ++d) {
        double mx = 0.0;
        for (Eigen::Index i = 0; i + d < a.cols(); ++i) mx = std::max(mx, std::abs(a(i, i + d)));
        if (mx > half) ++count;
    }
    return count;
}

} // namespace spc
