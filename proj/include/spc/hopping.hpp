#pragma once

// Point-particle hopping matrices and the total single-photon coefficient
//   Theta = omega0 (I - theta_coh - theta_inc).

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "spc/errors.hpp"
#include "spc/geometry.hpp"
#include "spc/modes.hpp"

namespace spc {

enum class HoppingKind { coherent, incoherent, total };

inline const char* to_string(HoppingKind k)
{
    switch (k) {
    case HoppingKind::coherent: return "coherent";
    case HoppingKind::incoherent: return "incoherent";
    case HoppingKind::total: return "total";
    }
    return "?";
}

struct HoppingMatrix {
    Eigen::MatrixXcd entries;
    HoppingKind kind = HoppingKind::incoherent;

    [[nodiscard]] Eigen::Index dim() const { return entries.rows(); }
};

/// max |A - A^dagger|.
inline double hermiticity_defect(const Eigen::MatrixXcd& a)
{
    if (a.size() == 0) return 0.0;
    return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

/// Rows: scatterers; columns: psi_m(r_alpha).
inline Eigen::MatrixXcd mode_values_at(const Architecture& arch, const BasisSpec& spec)
{
    const auto modes = enumerate_modes(spec);
    Eigen::MatrixXcd psi(static_cast<Eigen::Index>(arch.size()),
                         static_cast<Eigen::Index>(modes.size()));
    for (std::size_t a = 0; a < arch.size(); ++a)
        for (std::size_t m = 0; m < modes.size(); ++m)
            psi(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(m)) =
                eval_lg_position(modes[m], arch.scatterers[a].position, spec);
    return psi;
}

/// theta_nk = g_inc sum_alpha psi_n^*(r_alpha) psi_k(r_alpha).
inline HoppingMatrix hopping_incoherent_pp(const Architecture& arch, const BasisSpec& spec)
{
    const auto psi = mode_values_at(arch, spec);
    return {arch.g_inc * (psi.adjoint() * psi), HoppingKind::incoherent};
}

/// theta_nm = g_coh sum_{alpha != beta} psi_n^*(r_alpha) psi_m(r_beta).
inline HoppingMatrix hopping_coherent_pp(const Architecture& arch, const BasisSpec& spec)
{
    const auto psi = mode_values_at(arch, spec);
    const Eigen::RowVectorXcd total = psi.colwise().sum();
    Eigen::MatrixXcd theta = total.adjoint() * total - psi.adjoint() * psi;
    return {arch.g_coh * theta, HoppingKind::coherent};
}

inline HoppingMatrix hopping_total(double omega0, const HoppingMatrix& coherent,
                                   const HoppingMatrix& incoherent)
{
    if (coherent.dim() != incoherent.dim() || coherent.entries.cols() != coherent.dim() ||
        incoherent.entries.cols() != incoherent.dim())
        throw DimensionError("hopping_total: matrices must be square and of equal size");
    const auto m = coherent.dim();
    return {omega0 * (Eigen::MatrixXcd::Identity(m, m) - coherent.entries - incoherent.entries),
            HoppingKind::total};
}

// ---------------------------------------------------------------------------
// Structure diagnostics for banded hopping patterns

/// Contiguous run of modes [first, last] around the largest diagonal entry
/// with Re theta_nn >= half of that peak.
struct DiagonalBlock {
    Eigen::Index first = 0;
    Eigen::Index last = -1;
    Eigen::Index peak = 0;
    double positive_fraction = 0.0;  ///< share of block diagonal entries > 0
    double neighbour_mean = 0.0;     ///< mean Re theta_{n, n+-1} with n in the block, over peak
    std::size_t negative_neighbours = 0;
    std::size_t neighbour_count = 0;

    [[nodiscard]] Eigen::Index extent() const { return last >= first ? last - first + 1 : 0; }
    /// Positive diagonal with negative nearest-neighbour entries on average.
    [[nodiscard]] bool flanked() const
    {
        return extent() > 0 && positive_fraction == 1.0 && neighbour_mean < 0.0;
    }
};

inline DiagonalBlock half_max_diagonal_block(const Eigen::MatrixXcd& theta)
{
    DiagonalBlock blk;
    const auto n = theta.rows();
    if (n == 0) return blk;
    const Eigen::VectorXd diag = theta.diagonal().real();
    const double peak = diag.maxCoeff(&blk.peak);
    if (!(peak > 0.0)) return blk;
    blk.first = blk.last = blk.peak;
    while (blk.first > 0 && diag(blk.first - 1) >= 0.5 * peak) --blk.first;
    while (blk.last + 1 < n && diag(blk.last + 1) >= 0.5 * peak) ++blk.last;

    std::size_t positive = 0;
    double sum = 0.0;
    for (Eigen::Index i = blk.first; i <= blk.last; ++i) {
        if (diag(i) > 0.0) ++positive;
        for (Eigen::Index j : {i - 1, i + 1}) {
            if (j < 0 || j >= n) continue;
            const double v = theta(i, j).real();
            sum += v;
            ++blk.neighbour_count;
            if (v < 0.0) ++blk.negative_neighbours;
        }
    }
    blk.positive_fraction = static_cast<double>(positive) / static_cast<double>(blk.extent());
    if (blk.neighbour_count > 0)
        blk.neighbour_mean = sum / static_cast<double>(blk.neighbour_count) / peak;
    return blk;
}

} // namespace spc
