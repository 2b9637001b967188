#pragma once

// Laguerre-Gauss transverse modes at the waist plane, in position and in
// transverse-momentum space, plus basis diagnostics.
//
// Conventions (w0 = waist):
//   psi_lp(rho, phi) = (C_lp / w0) f_lp(sqrt(2) rho / w0) exp(i l phi)
//   f_lp(x)          = x^|l| L_p^|l|(x^2) exp(-x^2 / 2)
//   C_lp             = sqrt(2 p! / (pi (p + |l|)!))
// and the unitary transform phi(q) = (1/2pi) int psi(rho) exp(-i q.rho) d^2rho,
// which maps every mode onto itself up to scale:
//   phi_lp(q, theta) = (-i)^|l| (-1)^p (C_lp w0 / 2) f_lp(q w0 / sqrt(2)) exp(i l theta)

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "spc/errors.hpp"
#include "spc/quadrature.hpp"

namespace spc {

using cplx = std::complex<double>;

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    [[nodiscard]] double norm() const { return std::hypot(x, y); }
    [[nodiscard]] double angle() const { return std::atan2(y, x); }
    friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
    friend bool operator==(const Vec2&, const Vec2&) = default;
};

struct ModeIndex {
    int l = 0;
    int p = 0;

    friend bool operator==(const ModeIndex&, const ModeIndex&) = default;
};

enum class ModeSet {
    full,          ///< l in [-l_max, l_max], p in [0, p_max]
    radial_sector, ///< l = 0 only, p in [0, p_max]
};

struct BasisSpec {
    double w0 = 1.0;
    double k0 = 1000.0;
    double q_max = 20.0;
    int l_max = 0;
    int p_max = 25;
    ModeSet ordering = ModeSet::radial_sector;

    /// Degree of paraxiality at the cutoff, q_max / (sqrt(2) k0).
    [[nodiscard]] double paraxiality() const { return q_max / (std::numbers::sqrt2 * k0); }

    [[nodiscard]] std::size_t mode_count() const
    {
        const auto radial = static_cast<std::size_t>(p_max + 1);
        return ordering == ModeSet::full ? static_cast<std::size_t>(2 * l_max + 1) * radial
                                         : radial;
    }

    void validate() const
    {
        if (!(w0 > 0.0)) throw DomainError("basis: w0 must be positive");
        if (!(k0 > 0.0)) throw DomainError("basis: k0 must be positive");
        if (!(q_max > 0.0)) throw DomainError("basis: q_max must be positive");
        if (!(paraxiality() < 1.0)) throw DomainError("basis: q_max / (sqrt2 k0) must be < 1");
        if (l_max < 0 || p_max < 0) throw DomainError("basis: l_max and p_max must be >= 0");
    }
};

inline std::string to_string(ModeSet s) { return s == ModeSet::full ? "full" : "radial"; }

/// Flat-index order: l ascending from -l_max, then p ascending.
inline std::vector<ModeIndex> enumerate_modes(const BasisSpec& spec)
{
    if (spec.l_max < 0 || spec.p_max < 0) throw DomainError("enumerate_modes: negative bound");
    std::vector<ModeIndex> modes;
    modes.reserve(spec.mode_count());
    const int l_lo = spec.ordering == ModeSet::full ? -spec.l_max : 0;
    const int l_hi = spec.ordering == ModeSet::full ? spec.l_max : 0;
    for (int l = l_lo; l <= l_hi; ++l)
        for (int p = 0; p <= spec.p_max; ++p) modes.push_back({l, p});
    return modes;
}

/// C_lp = sqrt(2 p! / (pi (p+|l|)!)).
inline double lg_normalization(ModeIndex m)
{
    const int al = std::abs(m.l);
    return std::exp(0.5 * (std::log(2.0 / std::numbers::pi) + std::lgamma(m.p + 1.0) -
                           std::lgamma(m.p + al + 1.0)));
}

/// Dimensionless profile f_lp(x) = x^|l| L_p^|l|(x^2) exp(-x^2/2).
inline double lg_profile(ModeIndex m, double x)
{
    const auto al = static_cast<unsigned>(std::abs(m.l));
    const double x2 = x * x;
    return std::pow(x, static_cast<double>(al)) *
           std::assoc_laguerre(static_cast<unsigned>(m.p), al, x2) * std::exp(-0.5 * x2);
}

/// Real radial factor of psi_lp; psi = position_radial * exp(i l phi).
inline double position_radial(ModeIndex m, double rho, const BasisSpec& spec)
{
    return lg_normalization(m) / spec.w0 * lg_profile(m, std::numbers::sqrt2 * rho / spec.w0);
}

inline cplx eval_lg_position(ModeIndex m, double rho, double phi, const BasisSpec& spec)
{
    return position_radial(m, rho, spec) * std::polar(1.0, m.l * phi);
}

inline cplx eval_lg_position(ModeIndex m, Vec2 r, const BasisSpec& spec)
{
    return eval_lg_position(m, r.norm(), r.angle(), spec);
}

/// (-i)^n for integer n.
inline cplx minus_i_pow(int n)
{
    static constexpr cplx table[4] = {{1, 0}, {0, -1}, {-1, 0}, {0, 1}};
    return table[((n % 4) + 4) % 4];
}

inline cplx i_pow(int n) { return minus_i_pow(-n); }

/// Angle-independent factor of phi_lp; phi = momentum_radial * exp(i l theta).
inline cplx momentum_radial(ModeIndex m, double q, const BasisSpec& spec)
{
    const double sign = (m.p % 2 == 0) ? 1.0 : -1.0;
    const double mag = sign * 0.5 * lg_normalization(m) * spec.w0 *
                       lg_profile(m, q * spec.w0 / std::numbers::sqrt2);
    return minus_i_pow(std::abs(m.l)) * mag;
}

inline cplx eval_lg_momentum(ModeIndex m, double q, double theta, const BasisSpec& spec)
{
    return momentum_radial(m, q, spec) * std::polar(1.0, m.l * theta);
}

/// Polar product grid over the momentum disk |q| <= q_max.
///
/// radial_weights already contain the Jacobian q, so
/// sum_i sum_j radial_weights[i] * angular_weights[j] = pi q_max^2.
struct QuadratureGrid {
    std::vector<double> radial_nodes;
    std::vector<double> radial_weights;
    std::vector<double> angular_nodes;
    std::vector<double> angular_weights;
    double q_max = 0.0;

    [[nodiscard]] std::size_t n_r() const { return radial_nodes.size(); }
    [[nodiscard]] std::size_t n_theta() const { return angular_nodes.size(); }
};

inline QuadratureGrid make_grid(double q_max, std::size_t n_r = 200, std::size_t n_theta = 128)
{
    if (!(q_max > 0.0)) throw DomainError("make_grid: q_max must be positive");
    if (n_r == 0 || n_theta == 0) throw DomainError("make_grid: empty grid");
    QuadratureGrid g;
    g.q_max = q_max;
    const auto gl = gauss_legendre(n_r, 0.0, q_max);
    g.radial_nodes = gl.nodes;
    g.radial_weights.resize(n_r);
    for (std::size_t i = 0; i < n_r; ++i) g.radial_weights[i] = gl.weights[i] * gl.nodes[i];
    const double dtheta = 2.0 * std::numbers::pi / static_cast<double>(n_theta);
    for (std::size_t j = 0; j < n_theta; ++j) {
        g.angular_nodes.push_back(dtheta * static_cast<double>(j));
        g.angular_weights.push_back(dtheta);
    }
    return g;
}

inline QuadratureGrid make_grid(const BasisSpec& spec, std::size_t n_r = 200,
                                std::size_t n_theta = 128)
{
    return make_grid(spec.q_max, n_r, n_theta);
}

/// Gram matrix G_ab = int phi_a^* phi_b d^2q on the full 2-D grid.
inline Eigen::MatrixXcd momentum_gram(const std::vector<ModeIndex>& modes, const BasisSpec& spec,
                                      const QuadratureGrid& grid)
{
    const std::size_t n_pts = grid.n_r() * grid.n_theta();
    Eigen::MatrixXcd samples(static_cast<Eigen::Index>(n_pts),
                             static_cast<Eigen::Index>(modes.size()));
    for (std::size_t a = 0; a < modes.size(); ++a) {
        for (std::size_t i = 0; i < grid.n_r(); ++i) {
            const cplx radial = momentum_radial(modes[a], grid.radial_nodes[i], spec);
            for (std::size_t j = 0; j < grid.n_theta(); ++j) {
                const double w = grid.radial_weights[i] * grid.angular_weights[j];
                samples(static_cast<Eigen::Index>(i * grid.n_theta() + j),
                        static_cast<Eigen::Index>(a)) =
                    std::sqrt(w) * radial * std::polar(1.0, modes[a].l * grid.angular_nodes[j]);
            }
        }
    }
    return samples.adjoint() * samples;
}

/// Largest |G - I| entry.
inline double gram_residual(const Eigen::MatrixXcd& gram)
{
    const auto n = gram.rows();
    return (gram - Eigen::MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff();
}

/// |2pi sum_lp phi_lp^*(q) psi_lp(rho) - exp(i q.rho)| over the truncated basis.
///
/// The 2pi is the unitary-transform normalisation of the plane wave.
inline double completeness_residual(const BasisSpec& spec, Vec2 q, Vec2 rho)
{
    cplx sum{0.0, 0.0};
    for (const auto& m : enumerate_modes(spec))
        sum += std::conj(eval_lg_momentum(m, q.norm(), q.angle(), spec)) *
               eval_lg_position(m, rho, spec);
    return std::abs(2.0 * std::numbers::pi * sum - std::polar(1.0, dot(q, rho)));
}

namespace detail {

inline double enclosed_power(ModeIndex m, double c, const BasisSpec& spec, std::size_t nodes)
{
    const auto gl = gauss_legendre(nodes, 0.0, c);
    return gl.integrate([&](double rho) {
        const double v = position_radial(m, rho, spec);
        return 2.0 * std::numbers::pi * rho * v * v;
    });
}

} // namespace detail

/// Smallest radius c enclosing `fraction` of the mode's transverse power.
inline double power_radius(ModeIndex m, double fraction, const BasisSpec& spec,
                           std::size_t nodes = 400)
{
    if (!(fraction > 0.0 && fraction < 1.0))
        throw DomainError("power_radius: fraction must lie in (0, 1)");
    const double reach =
        spec.w0 * (std::sqrt(2.0 * m.p + std::abs(m.l) + 1.0) + 8.0);
    const double total = detail::enclosed_power(m, reach, spec, nodes);
    const double target = fraction * total;
    double lo = 0.0;
    double hi = reach;
    while (hi - lo > 1e-12 * reach) {
        const double mid = 0.5 * (lo + hi);
        if (detail::enclosed_power(m, mid, spec, nodes) < target) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

/// Intensity transmitted through a slab of thickness dz: exp(-q_max^2 dz / k0).
inline double attenuation_factor(double q_max, double k0, double dz)
{
    if (!(q_max > 0.0) || !(k0 > 0.0) || dz < 0.0)
        throw DomainError("attenuation_factor: need q_max, k0 > 0 and dz >= 0");
    return std::exp(-q_max * q_max * dz / k0);
}

/// Same factor for q_max = 10^-p k0 and dz = 10^l wavelengths.
inline double attenuation_factor_decades(int l, int p)
{
    const double k0 = 1.0;
    const double q_max = std::pow(10.0, -p) * k0;
    const double dz = std::pow(10.0, l) * 2.0 * std::numbers::pi / k0;
    return attenuation_factor(q_max, k0, dz);
}

} // namespace spc
