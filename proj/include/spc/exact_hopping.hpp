#pragma once

// Hopping matrices from the full momentum integrals (finite orbital size).
//
// Coherent:
//   theta_nm = 2 sum_{a != b} int d^2k d^2q d^2s
//              exp(-i(k - q).r_a + i(s - q).r_b) phi_n^*(k) w_a(k - q) w_b(s - q) phi_m(s)
//              / (q^2 - k^2)
// Incoherent (s carries the outgoing phase and phi_m; q' is the virtual momentum):
//   theta_nm(D) = 2 sum_a int d^2k d^2q' d^2s
//              exp(-i(k - s).r_a) phi_n^*(k) w_a(k - q') w_a(s - q') phi_m(s)
//              / (q'^2 - k^2 - D)
//
// w_a(k) = exp(-k^2 sigma_a^2 / 2) with sigma_a the scatterer's orbital width
// (w = 1 for point particles). All angular integrals are done analytically:
// plane waves expand in J_j, and the Gaussian cross term
// exp(sigma^2 k.q) = sum_m I_m(sigma^2 k q) exp(i m (theta_k - theta_q)).
// Radial integrals run over |k|, |q|, |s| <= q_max; poles are principal values.

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "spc/errors.hpp"
#include "spc/geometry.hpp"
#include "spc/hopping.hpp"
#include "spc/modes.hpp"
#include "spc/potential.hpp"
#include "spc/quadrature.hpp"

namespace spc {

namespace detail {

/// J_j(x) for any integer order, x >= 0.
inline double bessel_j(int j, double x)
{
    const double v = std::cyl_bessel_j(static_cast<double>(std::abs(j)), x);
    return (j < 0 && (j % 2 != 0)) ? -v : v;
}

/// exp(-sigma^2 (k^2 + q^2) / 2) I_m(sigma^2 k q), evaluated without overflow.
inline double orbital_factor(double sigma, double k, double q, int m)
{
    if (sigma == 0.0) return m == 0 ? 1.0 : 0.0;
    const double s2 = sigma * sigma;
    const double x = s2 * k * q;
    const double gauss = std::exp(-0.5 * s2 * (k - q) * (k - q));
    if (x == 0.0) return m == 0 ? gauss : 0.0;
    return gauss * std::cyl_bessel_i(static_cast<double>(std::abs(m)), x) * std::exp(-x);
}

/// Highest Bessel-I order kept for an orbital width at cutoff q_max.
inline int orbital_order_cap(double sigma, double q_max)
{
    if (sigma == 0.0) return 0;
    const double x = sigma * sigma * q_max * q_max;
    if (x > 600.0) throw DomainError("exact hopping: orbital_width * q_max too large (> sqrt 600)");
    return static_cast<int>(std::ceil(10.0 + 8.0 * std::sqrt(x)));
}

/// Outer radial rule: graded toward both ends, where the PV pole meets the
/// boundary of [0, q_max^2] and the inner integral is log-singular.
inline Rule1D outer_rule(const QuadratureGrid& grid)
{
    return graded_rule(0.0, grid.q_max, {0.0, grid.q_max}, grid.n_r());
}

inline Rule1D plain_rule(const QuadratureGrid& grid)
{
    return gauss_legendre(grid.n_r(), 0.0, grid.q_max);
}

/// b_{m, j}(q) = int s ds Phi_m(s) O(s, q, j) 2pi i^{l_m + j} J_{l_m + j}(s r) e^{i (l_m + j) phi}.
/// Indexed [q node][order offset][mode].
inline std::vector<cplx> outgoing_amplitudes(const std::vector<ModeIndex>& modes, const BasisSpec& spec,
                                             const Scatterer& sc, const Rule1D& outer,
                                             const Rule1D& plain, int order_cap)
{
    const std::size_t n_mode = modes.size();
    const std::size_t n_order = static_cast<std::size_t>(2 * order_cap + 1);
    const double r = sc.position.norm();
    const double phi = sc.position.angle();
    std::vector<cplx> out(outer.size() * n_order * n_mode);
    std::vector<cplx> phi_s(plain.size() * n_mode);
    for (std::size_t i = 0; i < plain.size(); ++i)
        for (std::size_t n = 0; n < n_mode; ++n)
            phi_s[i * n_mode + n] = momentum_radial(modes[n], plain.nodes[i], spec);
    for (std::size_t iq = 0; iq < outer.size(); ++iq) {
        const double q = outer.nodes[iq];
        for (int j = -order_cap; j <= order_cap; ++j) {
            const auto jo = static_cast<std::size_t>(j + order_cap);
            for (std::size_t n = 0; n < n_mode; ++n) {
                const int order = modes[n].l + j;
                cplx acc{0.0, 0.0};
                for (std::size_t i = 0; i < plain.size(); ++i) {
                    const double s = plain.nodes[i];
                    const double o = orbital_factor(sc.orbital_width, s, q, j);
                    if (o == 0.0) continue;
                    acc += plain.weights[i] * s * o * bessel_j(order, s * r) * phi_s[i * n_mode + n];
                }
                out[(iq * n_order + jo) * n_mode + n] =
                    2.0 * std::numbers::pi * i_pow(order) * std::polar(1.0, order * phi) * acc;
            }
        }
    }
    return out;
}

} // namespace detail

/// Exact coherent hopping, scaled by g_coh.
inline HoppingMatrix hopping_coherent_exact(const Architecture& arch, const BasisSpec& spec,
                                            const QuadratureGrid& grid, const PvConfig& pv = {})
{
    arch.validate();
    spec.validate();
    const auto modes = enumerate_modes(spec);
    const std::size_t n_mode = modes.size();
    const auto m_eig = static_cast<Eigen::Index>(n_mode);
    Eigen::MatrixXcd theta = Eigen::MatrixXcd::Zero(m_eig, m_eig);
    if (arch.size() < 2) return {theta, HoppingKind::coherent};

    const double upper = grid.q_max * grid.q_max;
    const auto opt = pv.options(grid.q_max);
    const auto outer = detail::outer_rule(grid);
    const auto plain = detail::plain_rule(grid);

    // Incoming side: a_{n, j}(q) = PV int k dk Phi_n^*(k) O(k, q, j)
    //     2pi (-i)^{l_n - j} J_{l_n - j}(k r) e^{-i (l_n - j) phi} / (q^2 - k^2).
    std::vector<std::vector<cplx>> incoming(arch.size());
    std::vector<std::vector<cplx>> outgoing(arch.size());
    std::vector<int> caps(arch.size());
    for (std::size_t a = 0; a < arch.size(); ++a) {
        const auto& sc = arch.scatterers[a];
        caps[a] = detail::orbital_order_cap(sc.orbital_width, grid.q_max);
        const int cap = caps[a];
        const auto n_order = static_cast<std::size_t>(2 * cap + 1);
        const double r = sc.position.norm();
        const double phi = sc.position.angle();
        auto& in = incoming[a];
        in.assign(outer.size() * n_order * n_mode, cplx{});
        for (std::size_t iq = 0; iq < outer.size(); ++iq) {
            const double q = outer.nodes[iq];
            const auto rule = pv_pole_rule(q * q, upper, opt);
            for (std::size_t jn = 0; jn < rule.size(); ++jn) {
                const double k = std::sqrt(rule.nodes[jn]);
                // k dk / (q^2 - k^2) = (1/2) du / (u0 - u)
                const double w = 0.5 * rule.weights[jn];
                for (int j = -cap; j <= cap; ++j) {
                    const double o = detail::orbital_factor(sc.orbital_width, k, q, j);
                    if (o == 0.0) continue;
                    const auto jo = static_cast<std::size_t>(j + cap);
                    for (std::size_t n = 0; n < n_mode; ++n) {
                        const int order = modes[n].l - j;
                        in[(iq * n_order + jo) * n_mode + n] +=
                            w * o * detail::bessel_j(order, k * r) *
                            std::conj(momentum_radial(modes[n], k, spec));
                    }
                }
            }
            for (int j = -cap; j <= cap; ++j) {
                const auto jo = static_cast<std::size_t>(j + cap);
                for (std::size_t n = 0; n < n_mode; ++n) {
                    const int order = modes[n].l - j;
                    in[(iq * n_order + jo) * n_mode + n] *=
                        2.0 * std::numbers::pi * minus_i_pow(order) * std::polar(1.0, -order * phi);
                }
            }
        }
        outgoing[a] = detail::outgoing_amplitudes(modes, spec, sc, outer, plain, cap);
    }

    for (std::size_t a = 0; a < arch.size(); ++a) {
        for (std::size_t b = 0; b < arch.size(); ++b) {
            if (a == b) continue;
            const Vec2 d = arch.scatterers[a].position - arch.scatterers[b].position;
            const double dist = d.norm();
            const double dphi = d.angle();
            const int cap_a = caps[a];
            const int cap_b = caps[b];
            const auto no_a = static_cast<std::size_t>(2 * cap_a + 1);
            const auto no_b = static_cast<std::size_t>(2 * cap_b + 1);
            for (std::size_t iq = 0; iq < outer.size(); ++iq) {
                const double q = outer.nodes[iq];
                const double wq = outer.weights[iq] * q;
                for (int j1 = -cap_a; j1 <= cap_a; ++j1) {
                    for (int j2 = -cap_b; j2 <= cap_b; ++j2) {
                        const int order = j1 + j2;
                        const cplx angular = 2.0 * std::numbers::pi * i_pow(order) *
                                             detail::bessel_j(order, q * dist) *
                                             std::polar(1.0, -order * dphi);
                        const cplx factor = 2.0 * wq * angular;
                        const cplx* in = &incoming[a][(iq * no_a + static_cast<std::size_t>(j1 + cap_a)) * n_mode];
                        const cplx* out = &outgoing[b][(iq * no_b + static_cast<std::size_t>(j2 + cap_b)) * n_mode];
                        for (std::size_t n = 0; n < n_mode; ++n) {
                            const cplx lhs = factor * in[n];
                            for (std::size_t m = 0; m < n_mode; ++m)
                                theta(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m)) +=
                                    lhs * out[m];
                        }
                    }
                }
            }
        }
    }
    return {arch.g_coh * theta, HoppingKind::coherent};
}

/// theta^inc(+D) and theta^inc(-D), each summed over scatterers and their gaps.
struct IncoherentExact {
    HoppingMatrix plus;
    HoppingMatrix minus;

    /// Coefficient matrix of a_n^dagger a_m in theta(D) a^dag a + theta^*(-D) a_m^dag a_n.
    [[nodiscard]] Eigen::MatrixXcd assembled() const
    {
        return plus.entries + minus.entries.adjoint();
    }
};

namespace detail {

/// One signed gap, one scatterer.
inline Eigen::MatrixXcd incoherent_exact_single(const Scatterer& sc, double delta,
                                                const std::vector<ModeIndex>& modes,
                                                const BasisSpec& spec, const QuadratureGrid& grid,
                                                const PvConfig& pv)
{
    const std::size_t n_mode = modes.size();
    const auto m_eig = static_cast<Eigen::Index>(n_mode);
    const double upper = grid.q_max * grid.q_max;
    const auto opt = pv.options(grid.q_max);
    const int cap = orbital_order_cap(sc.orbital_width, grid.q_max);
    const double r = sc.position.norm();
    const double phi = sc.position.angle();

    // Pole of 1/(q'^2 - k^2 - D) sits at q'^2 = k^2 + D: log singularities in k
    // where it meets the ends of [0, q_max^2].
    std::vector<double> singular{0.0, grid.q_max};
    if (-delta > 0.0 && -delta < upper) singular.push_back(std::sqrt(-delta));
    if (upper - delta > 0.0 && upper - delta < upper) singular.push_back(std::sqrt(upper - delta));
    const auto k_rule = graded_rule(0.0, grid.q_max, singular, grid.n_r());
    const auto s_rule = gauss_legendre(grid.n_r(), 0.0, grid.q_max);

    Eigen::MatrixXcd theta = Eigen::MatrixXcd::Zero(m_eig, m_eig);
    for (int j = -cap; j <= cap; ++j) {
        // Left factor X_n(k) and right factor Y_m(s) for this order.
        Eigen::MatrixXcd left(static_cast<Eigen::Index>(k_rule.size()), m_eig);
        for (std::size_t ik = 0; ik < k_rule.size(); ++ik) {
            const double k = k_rule.nodes[ik];
            for (std::size_t n = 0; n < n_mode; ++n) {
                const int order = modes[n].l - j;
                left(static_cast<Eigen::Index>(ik), static_cast<Eigen::Index>(n)) =
                    k_rule.weights[ik] * k * std::conj(momentum_radial(modes[n], k, spec)) *
                    2.0 * std::numbers::pi * minus_i_pow(order) * bessel_j(order, k * r) *
                    std::polar(1.0, -order * phi);
            }
        }
        Eigen::MatrixXcd right(static_cast<Eigen::Index>(s_rule.size()), m_eig);
        for (std::size_t is = 0; is < s_rule.size(); ++is) {
            const double s = s_rule.nodes[is];
            for (std::size_t m = 0; m < n_mode; ++m) {
                const int order = modes[m].l - j;
                right(static_cast<Eigen::Index>(is), static_cast<Eigen::Index>(m)) =
                    s_rule.weights[is] * s * momentum_radial(modes[m], s, spec) * 2.0 *
                    std::numbers::pi * i_pow(order) * bessel_j(order, s * r) *
                    std::polar(1.0, order * phi);
            }
        }
        // L_j(k, s) = 2pi PV int q' dq' O(k, q', j) O(s, q', j) / (q'^2 - k^2 - D)
        //           = -pi sum_u w_u O O   with the pole rule for u0 = k^2 + D.
        Eigen::MatrixXd kernel(static_cast<Eigen::Index>(k_rule.size()),
                               static_cast<Eigen::Index>(s_rule.size()));
        for (std::size_t ik = 0; ik < k_rule.size(); ++ik) {
            const double k = k_rule.nodes[ik];
            const auto rule = pv_pole_rule(k * k + delta, upper, opt);
            if (sc.orbital_width == 0.0) {
                double acc = 0.0;
                for (std::size_t u = 0; u < rule.size(); ++u) acc += rule.weights[u];
                kernel.row(static_cast<Eigen::Index>(ik)).setConstant(-std::numbers::pi * acc);
                continue;
            }
            std::vector<double> ok(rule.size());
            for (std::size_t u = 0; u < rule.size(); ++u)
                ok[u] = rule.weights[u] * orbital_factor(sc.orbital_width, k, std::sqrt(rule.nodes[u]), j);
            for (std::size_t is = 0; is < s_rule.size(); ++is) {
                const double s = s_rule.nodes[is];
                double acc = 0.0;
                for (std::size_t u = 0; u < rule.size(); ++u)
                    if (ok[u] != 0.0)
                        acc += ok[u] * orbital_factor(sc.orbital_width, s, std::sqrt(rule.nodes[u]), j);
                kernel(static_cast<Eigen::Index>(ik), static_cast<Eigen::Index>(is)) =
                    -std::numbers::pi * acc;
            }
        }
        theta += 2.0 * left.transpose() * kernel.cast<cplx>() * right;
    }
    return theta;
}

} // namespace detail

/// Exact incoherent hopping for D_i = 2 omega0 eps_ig and for -D_i, scaled by g_inc.
inline IncoherentExact hopping_incoherent_exact(const Architecture& arch, const BasisSpec& spec,
                                                const QuadratureGrid& grid, const PvConfig& pv = {})
{
    arch.validate();
    spec.validate();
    const auto modes = enumerate_modes(spec);
    const auto m = static_cast<Eigen::Index>(modes.size());
    IncoherentExact out{{Eigen::MatrixXcd::Zero(m, m), HoppingKind::incoherent},
                        {Eigen::MatrixXcd::Zero(m, m), HoppingKind::incoherent}};
    for (const auto& sc : arch.scatterers) {
        for (double gap : sc.gaps) {
            const double delta = 2.0 * arch.omega0 * gap;
            out.plus.entries += detail::incoherent_exact_single(sc, delta, modes, spec, grid, pv);
            out.minus.entries += detail::incoherent_exact_single(sc, -delta, modes, spec, grid, pv);
        }
    }
    out.plus.entries *= arch.g_inc;
    out.minus.entries *= arch.g_inc;
    return out;
}

// ---------------------------------------------------------------------------

/// Uncentred correlation Re<A, B> / (|A| |B|): +1 when A is a positive multiple of B.
inline double direction_correlation(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b)
{
    const double na = a.norm();
    const double nb = b.norm();
    if (na == 0.0 || nb == 0.0) return 0.0;
    return (a.conjugate().cwiseProduct(b)).sum().real() / (na * nb);
}

/// max |A - B| / max |A|; 0 when both vanish.
inline double relative_change(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b)
{
    const double scale = a.cwiseAbs().maxCoeff();
    const double diff = (a - b).cwiseAbs().maxCoeff();
    return scale > 0.0 ? diff / scale : diff;
}

/// Grid with twice the radial resolution, for convergence reports.
inline QuadratureGrid refined_radially(const QuadratureGrid& grid)
{
    return make_grid(grid.q_max, 2 * grid.n_r(), grid.n_theta());
}

} // namespace spc
