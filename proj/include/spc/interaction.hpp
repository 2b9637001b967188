#pragma once

// Structural tensor, interaction tensor and the assembled effective Hamiltonian
//
//   H = sum_nk Theta_nk a_n^dag a_k + sum_nklm U_nklm a_n^dag a_k a_l^dag a_m
//   U_nmls = - sum_{l's'} S_{ll'ss'} V_{nml's'}
//   S_{ll'ss'} = sum_alpha conj(f^alpha_ll') f^alpha_ss',   f^alpha_nm = psi_n^*(r_alpha) psi_m(r_alpha)
//
// LG-diagonal form: H = sum Theta_nk a_n^dag a_k - sum U_nk n_n n_k with U_nk = U(n, n, k, k).

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "spc/errors.hpp"
#include "spc/geometry.hpp"
#include "spc/hopping.hpp"
#include "spc/modes.hpp"
#include "spc/potential.hpp"
#include "spc/tensor.hpp"

namespace spc {

struct StructuralTensor {
    ComplexTensor4 entries;

    [[nodiscard]] std::size_t side() const { return entries.side(); }
};

/// f^alpha as rows of an (alpha) x (n*M + m) matrix.
inline Eigen::MatrixXcd pair_products(const Architecture& arch, const BasisSpec& spec)
{
    const auto psi = mode_values_at(arch, spec);
    const auto m = psi.cols();
    Eigen::MatrixXcd f(psi.rows(), m * m);
    for (Eigen::Index a = 0; a < psi.rows(); ++a)
        for (Eigen::Index n = 0; n < m; ++n)
            for (Eigen::Index k = 0; k < m; ++k) f(a, n * m + k) = std::conj(psi(a, n)) * psi(a, k);
    return f;
}

inline StructuralTensor structural_tensor(const Architecture& arch, const BasisSpec& spec)
{
    arch.validate();
    const Eigen::MatrixXcd f = pair_products(arch, spec);
    const auto m = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(f.cols()))));
    // Gram over scatterers: G[(l l'), (s s')] = sum_alpha conj(f_ll') f_ss'.
    const Eigen::MatrixXcd gram = f.adjoint() * f;
    StructuralTensor s{ComplexTensor4(m)};
    auto& data = s.entries.data();
    for (std::size_t i = 0; i < m * m; ++i)
        for (std::size_t j = 0; j < m * m; ++j)
            data[i * m * m + j] = gram(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    return s;
}

/// (l l') x (s s') view of a rank-4 tensor.
template <class T>
Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic> matricize(const Tensor4<T>& t)
{
    const auto mm = static_cast<Eigen::Index>(t.side() * t.side());
    Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic> out(mm, mm);
    for (Eigen::Index i = 0; i < mm; ++i)
        for (Eigen::Index j = 0; j < mm; ++j)
            out(i, j) = t.data()[static_cast<std::size_t>(i * mm + j)];
    return out;
}

/// Smallest eigenvalue of the Hermitian part of the matricized S.
inline double structural_min_eigenvalue(const StructuralTensor& s)
{
    const Eigen::MatrixXcd g = matricize(s.entries);
    const Eigen::MatrixXcd h = 0.5 * (g + g.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

/// U_nmls = - sum_{l's'} S(l, l', s, s') V(n, m, l', s').
inline ComplexTensor4 interaction_tensor(const StructuralTensor& s, const RealTensor4& v)
{
    if (s.side() != v.side())
        throw DimensionError("interaction_tensor: structural tensor has side " +
                             std::to_string(s.side()) + ", potential has side " +
                             std::to_string(v.side()));
    const std::size_t m = v.side();
    const auto mm = static_cast<Eigen::Index>(m * m);
    // Vmat[(n m), (l' s')] and T[(l' s'), (l s)] = S(l, l', s, s').
    Eigen::MatrixXcd vmat(mm, mm);
    for (Eigen::Index i = 0; i < mm; ++i)
        for (Eigen::Index j = 0; j < mm; ++j) vmat(i, j) = v.data()[static_cast<std::size_t>(i * mm + j)];
    Eigen::MatrixXcd t(mm, mm);
    for (std::size_t l = 0; l < m; ++l)
        for (std::size_t lp = 0; lp < m; ++lp)
            for (std::size_t sx = 0; sx < m; ++sx)
                for (std::size_t sp = 0; sp < m; ++sp)
                    t(static_cast<Eigen::Index>(lp * m + sp), static_cast<Eigen::Index>(l * m + sx)) =
                        s.entries(l, lp, sx, sp);
    const Eigen::MatrixXcd u = -(vmat * t);
    ComplexTensor4 out(m);
    for (Eigen::Index i = 0; i < mm; ++i)
        for (Eigen::Index j = 0; j < mm; ++j) out.data()[static_cast<std::size_t>(i * mm + j)] = u(i, j);
    return out;
}

inline ComplexTensor4 interaction_tensor(const StructuralTensor& s, const ScatteringPotential& v)
{
    return interaction_tensor(s, v.entries);
}

struct LgReduction {
    Eigen::MatrixXcd u;            ///< U_nk = U(n, n, k, k)
    double discarded_weight = 0.0; ///< |U - kept entries| / |U| (Frobenius)
};

template <class T>
LgReduction reduce_lg_diagonal(const Tensor4<T>& u)
{
    const std::size_t m = u.side();
    LgReduction out{Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m))};
    double kept = 0.0;
    for (std::size_t n = 0; n < m; ++n)
        for (std::size_t k = 0; k < m; ++k) {
            const cplx v = u(n, n, k, k);
            out.u(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k)) = v;
            kept += std::norm(v);
        }
    const double total = u.norm();
    if (total > 0.0) out.discarded_weight = std::sqrt(std::max(total * total - kept, 0.0)) / total;
    return out;
}

// ---------------------------------------------------------------------------
// Assembly

enum class HamiltonianForm { full, lg_diagonal };

inline const char* to_string(HamiltonianForm f)
{
    return f == HamiltonianForm::full ? "full" : "lg_diagonal";
}

struct EffectiveHamiltonian {
    HoppingMatrix theta;          ///< total Theta
    HamiltonianForm form = HamiltonianForm::lg_diagonal;
    ComplexTensor4 full;          ///< U_nklm, form == full
    Eigen::MatrixXcd reduced;     ///< U_nk, form == lg_diagonal
    double hopping_defect = 0.0;  ///< max |Theta - Theta^dag|
    double interaction_defect = 0.0;

    [[nodiscard]] std::size_t modes() const { return static_cast<std::size_t>(theta.dim()); }
    [[nodiscard]] double hermiticity_defect() const { return hopping_defect + interaction_defect; }
};

/// max |U_nklm - conj(U_mlkn)|: the operator sum U a_n^dag a_k a_l^dag a_m is
/// Hermitian exactly when this vanishes.
inline double interaction_defect(const ComplexTensor4& u)
{
    const std::size_t m = u.side();
    double d = 0.0;
    for (std::size_t n = 0; n < m; ++n)
        for (std::size_t k = 0; k < m; ++k)
            for (std::size_t l = 0; l < m; ++l)
                for (std::size_t j = 0; j < m; ++j)
                    d = std::max(d, std::abs(u(n, k, l, j) - std::conj(u(j, l, k, n))));
    return d;
}

/// max |U - U^dag| of the reduced matrix (real symmetric gives 0).
inline double interaction_defect(const Eigen::MatrixXcd& u)
{
    return spc::hermiticity_defect(u);
}

inline EffectiveHamiltonian assemble_hamiltonian(const HoppingMatrix& theta, const ComplexTensor4& u)
{
    if (theta.entries.rows() != theta.entries.cols() ||
        static_cast<std::size_t>(theta.dim()) != u.side())
        throw DimensionError("assemble_hamiltonian: hopping and interaction sizes differ");
    EffectiveHamiltonian h;
    h.theta = theta;
    h.form = HamiltonianForm::full;
    h.full = u;
    h.hopping_defect = spc::hermiticity_defect(theta.entries);
    h.interaction_defect = interaction_defect(u);
    return h;
}

inline EffectiveHamiltonian assemble_hamiltonian(const HoppingMatrix& theta, const Eigen::MatrixXcd& u)
{
    if (theta.entries.rows() != theta.entries.cols() || u.rows() != u.cols() ||
        theta.dim() != u.rows())
        throw DimensionError("assemble_hamiltonian: hopping and interaction sizes differ");
    EffectiveHamiltonian h;
    h.theta = theta;
    h.form = HamiltonianForm::lg_diagonal;
    h.reduced = u;
    h.hopping_defect = spc::hermiticity_defect(theta.entries);
    h.interaction_defect = interaction_defect(u);
    return h;
}

// ---------------------------------------------------------------------------
// Uniform-cylinder model: hopping restricted to nearest neighbours (and
// on-site terms) inside the geometric domain D_h, interaction restricted to
// mode pairs within the potential's bandwidth D_Delta.

struct ConfinementDomains {
    Eigen::Index first = 0;   ///< D_h = [first, last]
    Eigen::Index last = -1;
    int bandwidth = 0;        ///< D_Delta = {(n, k): |n - k| <= bandwidth}
};

inline ConfinementDomains confinement_domains(const HoppingMatrix& incoherent, const RealTensor4& v)
{
    const auto blk = half_max_diagonal_block(incoherent.entries);
    return {blk.first, blk.last, half_max_bandwidth(trace_outer_pair(v))};
}

inline EffectiveHamiltonian uniform_cylinder_hamiltonian(const HoppingMatrix& theta,
                                                         const Eigen::MatrixXcd& u,
                                                         const ConfinementDomains& dom)
{
    const auto m = theta.dim();
    if (u.rows() != m || u.cols() != m)
        throw DimensionError("uniform_cylinder_hamiltonian: hopping and interaction sizes differ");
    Eigen::MatrixXcd t = Eigen::MatrixXcd::Zero(m, m);
    for (Eigen::Index n = std::max<Eigen::Index>(dom.first, 0); n <= dom.last && n < m; ++n)
        for (Eigen::Index k = std::max<Eigen::Index>(n - 1, dom.first); k <= std::min(n + 1, dom.last); ++k)
            t(n, k) = theta.entries(n, k);
    Eigen::MatrixXcd w = Eigen::MatrixXcd::Zero(m, m);
    for (Eigen::Index n = 0; n < m; ++n)
        for (Eigen::Index k = 0; k < m; ++k)
            if (std::abs(n - k) <= dom.bandwidth) w(n, k) = u(n, k);
    return assemble_hamiltonian(HoppingMatrix{t, HoppingKind::total}, w);
}

} // namespace spc
