#pragma once

// Fixed-photon-number Fock sector, Hamiltonian matrices and observables.
//
// States are occupation vectors (n_0, ..., n_{M-1}) with sum N, ordered
// descending-lexicographically: (N, 0, ...) first, (..., 0, N) last. For
// N = 1 the state index equals the occupied mode index.

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "spc/errors.hpp"
#include "spc/interaction.hpp"
#include "spc/modes.hpp"

namespace spc {

using SparseMatrixC = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;

class FockBasis {
public:
    static constexpr std::size_t default_cap = 200000;

    FockBasis(std::size_t modes, std::size_t photons, std::size_t cap = default_cap)
        : m_(modes), n_(photons)
    {
        if (modes == 0) throw DomainError("fock basis: need at least one mode");
        // binom_[k][j] = C(k, j) for k <= N + M - 1; saturates at cap + 1.
        const std::size_t top = n_ + m_;
        binom_.assign(top + 1, std::vector<std::uint64_t>(top + 1, 0));
        const std::uint64_t sat = static_cast<std::uint64_t>(cap) + 1;
        for (std::size_t k = 0; k <= top; ++k) {
            binom_[k][0] = 1;
            for (std::size_t j = 1; j <= k; ++j)
                binom_[k][j] = std::min(sat, binom_[k - 1][j - 1] + (j < k ? binom_[k - 1][j] : 0));
        }
        const std::uint64_t dim = count(n_, m_);
        if (dim > cap)
            throw CapacityError("fock basis: dimension C(" + std::to_string(n_ + m_ - 1) + ", " +
                                std::to_string(n_) + ") exceeds the cap of " + std::to_string(cap));
        dim_ = static_cast<std::size_t>(dim);
        occ_.reserve(dim_ * m_);
        std::vector<int> cur(m_, 0);
        fill(cur, 0, static_cast<int>(n_));
    }

    [[nodiscard]] std::size_t modes() const { return m_; }
    [[nodiscard]] std::size_t photons() const { return n_; }
    [[nodiscard]] std::size_t dim() const { return dim_; }

    [[nodiscard]] std::span<const int> occupation(std::size_t i) const
    {
        return {occ_.data() + i * m_, m_};
    }

    /// Position of an occupation vector; DomainError when it is not in the sector.
    [[nodiscard]] std::size_t index(std::span<const int> occ) const
    {
        if (occ.size() != m_) throw DimensionError("fock basis: occupation length differs from M");
        long remaining = static_cast<long>(n_);
        std::uint64_t rank = 0;
        for (std::size_t j = 0; j + 1 < m_; ++j) {
            if (occ[j] < 0 || occ[j] > remaining) throw DomainError("fock basis: occupation outside sector");
            // States with a larger value at position j come first.
            for (long v = remaining; v > occ[j]; --v) rank += count(static_cast<std::size_t>(remaining - v), m_ - j - 1);
            remaining -= occ[j];
        }
        if (occ[m_ - 1] != remaining) throw DomainError("fock basis: occupation does not sum to N");
        return static_cast<std::size_t>(rank);
    }

private:
    /// Number of ways to place n photons in m modes.
    [[nodiscard]] std::uint64_t count(std::size_t n, std::size_t m) const
    {
        if (m == 0) return n == 0 ? 1 : 0;
        return binom_[n + m - 1][n];
    }

    void fill(std::vector<int>& cur, std::size_t pos, int remaining)
    {
        if (pos + 1 == m_) {
            cur[pos] = remaining;
            occ_.insert(occ_.end(), cur.begin(), cur.end());
            return;
        }
        for (int v = remaining; v >= 0; --v) {
            cur[pos] = v;
            fill(cur, pos + 1, remaining - v);
        }
        cur[pos] = 0;
    }

    std::size_t m_;
    std::size_t n_;
    std::size_t dim_ = 0;
    std::vector<int> occ_;
    std::vector<std::vector<std::uint64_t>> binom_;
};

// ---------------------------------------------------------------------------
// Operators

namespace detail {

/// a_mode on (occ, amp); returns false when annihilating the vacuum of that mode.
inline bool lower(std::vector<int>& occ, double& amp, std::size_t mode)
{
    if (occ[mode] == 0) return false;
    amp *= std::sqrt(static_cast<double>(occ[mode]));
    --occ[mode];
    return true;
}

inline void raise(std::vector<int>& occ, double& amp, std::size_t mode)
{
    ++occ[mode];
    amp *= std::sqrt(static_cast<double>(occ[mode]));
}

} // namespace detail

/// Matrix of H = sum Theta_nk a_n^dag a_k - sum U_nklm a_n^dag a_k a_l^dag a_m
/// (full form, operators applied right to left exactly as written) or
/// - sum U_nk n_n n_k (LG form) on the basis.
inline SparseMatrixC hamiltonian_matrix(const EffectiveHamiltonian& h, const FockBasis& basis)
{
    const std::size_t m = basis.modes();
    if (h.modes() != m)
        throw DimensionError("hamiltonian_matrix: Hamiltonian has " + std::to_string(h.modes()) +
                             " modes, basis has " + std::to_string(m));
    std::vector<Eigen::Triplet<cplx>> trip;
    std::vector<int> occ(m);
    const auto& theta = h.theta.entries;
    // Nonzero interaction terms (n, k, l, m) -> U_nklm, in index order.
    std::vector<std::pair<std::array<std::size_t, 4>, cplx>> terms;
    if (h.form == HamiltonianForm::full)
        for (std::size_t n = 0; n < m; ++n)
            for (std::size_t k = 0; k < m; ++k)
                for (std::size_t l = 0; l < m; ++l)
                    for (std::size_t q = 0; q < m; ++q)
                        if (h.full(n, k, l, q) != cplx{}) terms.push_back({{n, k, l, q}, h.full(n, k, l, q)});
    for (std::size_t j = 0; j < basis.dim(); ++j) {
        const auto src = basis.occupation(j);
        const auto col = static_cast<Eigen::Index>(j);
        for (std::size_t n = 0; n < m; ++n)
            for (std::size_t k = 0; k < m; ++k) {
                const cplx t = theta(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));
                if (t == cplx{} || src[k] == 0) continue;
                occ.assign(src.begin(), src.end());
                double amp = 1.0;
                detail::lower(occ, amp, k);
                detail::raise(occ, amp, n);
                trip.emplace_back(static_cast<Eigen::Index>(basis.index(occ)), col, t * amp);
            }
        if (h.form == HamiltonianForm::lg_diagonal) {
            cplx diag{};
            for (std::size_t n = 0; n < m; ++n)
                for (std::size_t k = 0; k < m; ++k)
                    diag -= h.reduced(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k)) *
                            static_cast<double>(src[n] * src[k]);
            if (diag != cplx{}) trip.emplace_back(col, col, diag);
            continue;
        }
        for (const auto& [idx, u] : terms) {
            const auto [n, k, l, q] = idx;
            if (src[q] == 0) continue;
            occ.assign(src.begin(), src.end());
            double amp = 1.0;
            detail::lower(occ, amp, q);
            detail::raise(occ, amp, l);
            if (!detail::lower(occ, amp, k)) continue;
            detail::raise(occ, amp, n);
            trip.emplace_back(static_cast<Eigen::Index>(basis.index(occ)), col, -u * amp);
        }
    }
    const auto d = static_cast<Eigen::Index>(basis.dim());
    SparseMatrixC out(d, d);
    out.setFromTriplets(trip.begin(), trip.end());
    out.makeCompressed();
    return out;
}

/// Diagonal of n_r over the basis.
inline Eigen::VectorXd number_diagonal(const FockBasis& basis, std::size_t r)
{
    if (r >= basis.modes()) throw DomainError("mode index " + std::to_string(r) + " out of range");
    Eigen::VectorXd d(static_cast<Eigen::Index>(basis.dim()));
    for (std::size_t i = 0; i < basis.dim(); ++i)
        d(static_cast<Eigen::Index>(i)) = basis.occupation(i)[r];
    return d;
}

/// Total number operator; equals N times the identity on the sector.
inline SparseMatrixC total_number_matrix(const FockBasis& basis)
{
    const auto d = static_cast<Eigen::Index>(basis.dim());
    SparseMatrixC out(d, d);
    out.reserve(Eigen::VectorXi::Constant(d, 1));
    for (Eigen::Index i = 0; i < d; ++i) out.insert(i, i) = static_cast<double>(basis.photons());
    out.makeCompressed();
    return out;
}

inline double max_abs(const SparseMatrixC& a)
{
    double m = 0.0;
    for (Eigen::Index k = 0; k < a.outerSize(); ++k)
        for (SparseMatrixC::InnerIterator it(a, k); it; ++it) m = std::max(m, std::abs(it.value()));
    return m;
}

/// max |[H, N]|.
inline double number_commutator(const SparseMatrixC& h, const FockBasis& basis)
{
    const SparseMatrixC n = total_number_matrix(basis);
    const SparseMatrixC c = h * n - n * h;
    return max_abs(c);
}

inline double hermiticity_defect(const SparseMatrixC& h)
{
    const SparseMatrixC adj = h.adjoint();
    const SparseMatrixC diff = h - adj;
    return max_abs(diff);
}

// ---------------------------------------------------------------------------
// States

struct StateVector {
    Eigen::VectorXcd amplitudes;
    std::shared_ptr<const FockBasis> basis;

    [[nodiscard]] double norm() const { return amplitudes.norm(); }
};

/// Normalized (sum_n C_n a_n^dag)^N |0>. For N = 1 the amplitudes are C / |C|.
inline StateVector prepare_product_state(std::span<const cplx> c, std::shared_ptr<const FockBasis> basis)
{
    if (c.size() != basis->modes())
        throw DimensionError("prepare_product_state: coefficient vector has length " +
                             std::to_string(c.size()) + ", basis has " +
                             std::to_string(basis->modes()) + " modes");
    double cn = 0.0;
    for (const auto& v : c) cn += std::norm(v);
    if (!(cn > 0.0)) throw DomainError("prepare_product_state: coefficient vector is zero");
    StateVector s{Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(basis->dim())), basis};
    for (std::size_t i = 0; i < basis->dim(); ++i) {
        const auto occ = basis->occupation(i);
        // N! prod C_j^{n_j} / sqrt(n_j!); the N! drops out on normalization.
        cplx amp{1.0, 0.0};
        for (std::size_t j = 0; j < occ.size(); ++j) {
            if (occ[j] == 0) continue;
            amp *= std::pow(c[j], occ[j]) / std::sqrt(std::tgamma(occ[j] + 1.0));
        }
        s.amplitudes(static_cast<Eigen::Index>(i)) = amp;
    }
    const double norm = s.amplitudes.norm();
    if (!(norm > 0.0)) throw DomainError("prepare_product_state: state vanishes");
    s.amplitudes /= norm;
    return s;
}

inline StateVector basis_state(std::span<const int> occ, std::shared_ptr<const FockBasis> basis)
{
    StateVector s{Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(basis->dim())), basis};
    s.amplitudes(static_cast<Eigen::Index>(basis->index(occ))) = 1.0;
    return s;
}

/// <n_r>.
inline double density(const StateVector& s, std::size_t r)
{
    const Eigen::VectorXd d = number_diagonal(*s.basis, r);
    return (s.amplitudes.cwiseAbs2().array() * d.array()).sum();
}

// ---------------------------------------------------------------------------
// Observable series

struct ObservableSeries {
    std::vector<double> times;
    std::vector<std::vector<std::pair<std::string, double>>> values;

    void push(double tau, std::vector<std::pair<std::string, double>> row)
    {
        if (!times.empty() && !(tau > times.back()))
            throw DomainError("observable series: times must be strictly increasing");
        times.push_back(tau);
        values.push_back(std::move(row));
    }
};

} // namespace spc
