#pragma once

// Time evolution e^{-i H tau} on a fixed-N sector and the two-time correlators
//   C_R(tau) = Re <psi0| n_r e^{iH tau} n_{r+R} e^{-iH tau} |psi0>.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <unsupported/Eigen/MatrixFunctions>

#include "spc/errors.hpp"
#include "spc/fock.hpp"

namespace spc {

enum class EvolutionMethod { automatic, dense_eig, krylov };

inline const char* to_string(EvolutionMethod m)
{
    switch (m) {
    case EvolutionMethod::automatic: return "auto";
    case EvolutionMethod::dense_eig: return "dense_eig";
    case EvolutionMethod::krylov: return "krylov";
    }
    return "?";
}

struct KrylovOptions {
    double tol = 1e-12;
    std::size_t subspace = 30;
    std::size_t max_steps = 100000;
};

/// w = exp(-i tau H) v by an adaptive Arnoldi scheme with a posteriori local
/// error control (Expokit's expv). Throws ConvergenceError on step rejection
/// overflow or step-count exhaustion.
inline Eigen::VectorXcd krylov_expv(const SparseMatrixC& h, const Eigen::VectorXcd& v, double tau,
                                    const KrylovOptions& opt = {})
{
    const auto n = h.rows();
    if (v.size() != n) throw DimensionError("krylov_expv: vector length differs from matrix size");
    if (tau == 0.0 || n == 0) return v;
    double beta = v.norm();
    if (beta == 0.0) return v;

    const SparseMatrixC a = cplx{0.0, -1.0} * h;
    double anorm = 0.0;
    for (Eigen::Index k = 0; k < a.outerSize(); ++k) {
        double row = 0.0;
        for (SparseMatrixC::InnerIterator it(a, k); it; ++it) row += std::abs(it.value());
        anorm = std::max(anorm, row);
    }
    if (anorm == 0.0) return v;

    const auto m = static_cast<Eigen::Index>(std::min<std::size_t>(opt.subspace, static_cast<std::size_t>(n)));
    const double tol = opt.tol;
    const int mxrej = 10;
    const double btol = 1e-7;
    const double gamma = 0.9;
    const double delta = 1.2;
    const double rndoff = anorm * std::numeric_limits<double>::epsilon();
    const double t_out = std::abs(tau);
    const double sgn = tau > 0 ? 1.0 : -1.0;

    auto round_step = [](double t) {
        const double s = std::pow(10.0, std::floor(std::log10(t)) - 1.0);
        return std::ceil(t / s) * s;
    };

    const double md = static_cast<double>(m);
    double xm = 1.0 / md;
    const double fact = std::pow((md + 1.0) / std::numbers::e, md + 1.0) *
                        std::sqrt(2.0 * std::numbers::pi * (md + 1.0));
    double t_new = (1.0 / anorm) * std::pow((fact * tol) / (4.0 * beta * anorm), xm);
    t_new = round_step(t_new);

    Eigen::VectorXcd w = v;
    double t_now = 0.0;
    std::size_t steps = 0;
    Eigen::MatrixXcd basis(n, m + 1);
    Eigen::MatrixXcd hess(m + 2, m + 2);
    while (t_now < t_out) {
        if (++steps > opt.max_steps) throw ConvergenceError("krylov_expv: step budget exhausted");
        double t_step = std::min(t_out - t_now, t_new);
        basis.setZero();
        hess.setZero();
        basis.col(0) = w / beta;
        Eigen::Index mb = m;
        int k1 = 2;
        for (Eigen::Index j = 0; j < m; ++j) {
            Eigen::VectorXcd p = a * basis.col(j);
            for (Eigen::Index i = 0; i <= j; ++i) {
                hess(i, j) = basis.col(i).dot(p);
                p -= hess(i, j) * basis.col(i);
            }
            const double s = p.norm();
            if (s < btol) {
                // Invariant subspace: the projection is exact for any step.
                k1 = 0;
                mb = j + 1;
                t_step = t_out - t_now;
                break;
            }
            hess(j + 1, j) = s;
            basis.col(j + 1) = p / s;
        }
        double avnorm = 0.0;
        if (k1 != 0) {
            hess(m + 1, m) = 1.0;
            avnorm = (a * basis.col(m)).norm();
        }

        Eigen::MatrixXcd f;
        double err_loc = 0.0;
        int ireject = 0;
        for (;;) {
            const Eigen::Index mx = mb + k1;
            const Eigen::MatrixXcd small = (sgn * t_step) * hess.topLeftCorner(mx, mx);
            f = small.exp();
            if (k1 == 0) {
                err_loc = btol;
                break;
            }
            const double p1 = std::abs(f(m, 0)) * beta;
            const double p2 = std::abs(f(m + 1, 0)) * beta * avnorm;
            if (p1 > 10.0 * p2) {
                err_loc = p2;
                xm = 1.0 / md;
            } else if (p1 > p2) {
                err_loc = (p1 * p2) / (p1 - p2);
                xm = 1.0 / md;
            } else {
                err_loc = p1;
                xm = 1.0 / (md - 1.0);
            }
            if (err_loc <= delta * t_step * tol) break;
            if (ireject == mxrej) throw ConvergenceError("krylov_expv: requested tolerance too small");
            t_step = round_step(gamma * t_step * std::pow(t_step * tol / err_loc, xm));
            ++ireject;
        }
        const Eigen::Index mx = mb + std::max(0, k1 - 1);
        w = basis.leftCols(mx) * (beta * f.col(0).head(mx));
        beta = w.norm();
        t_now += t_step;
        if (beta == 0.0) break;
        t_new = round_step(gamma * t_step * std::pow(t_step * tol / std::max(err_loc, rndoff), xm));
    }
    return w;
}

// ---------------------------------------------------------------------------

/// Propagator for one Hamiltonian matrix. The dense path diagonalizes once
/// (Hermitian) or exponentiates per call (non-Hermitian, with a warning).
class Evolver {
public:
    static constexpr std::size_t dense_cap = 2000;
    static constexpr double hermitian_tol = 1e-8;

    Evolver(SparseMatrixC h, EvolutionMethod method = EvolutionMethod::automatic, KrylovOptions krylov = {})
        : h_(std::move(h)), krylov_(krylov)
    {
        const auto dim = static_cast<std::size_t>(h_.rows());
        defect_ = hermiticity_defect(h_);
        if (method == EvolutionMethod::automatic)
            method = dim <= dense_cap ? EvolutionMethod::dense_eig : EvolutionMethod::krylov;
        if (method == EvolutionMethod::dense_eig && dim > dense_cap)
            throw CapacityError("dense evolution: dimension " + std::to_string(dim) +
                                " exceeds the dense cap of " + std::to_string(dense_cap));
        method_ = method;
        if (defect_ > hermitian_tol)
            warnings_.push_back("Hamiltonian is not Hermitian (defect " + std::to_string(defect_) +
                                "); evolution is not unitary");
    }

    [[nodiscard]] EvolutionMethod method() const { return method_; }
    [[nodiscard]] double hermiticity_defect_value() const { return defect_; }
    [[nodiscard]] const std::vector<std::string>& warnings() const { return warnings_; }
    [[nodiscard]] const SparseMatrixC& matrix() const { return h_; }

    [[nodiscard]] Eigen::VectorXcd apply(const Eigen::VectorXcd& v, double tau)
    {
        if (tau == 0.0) return v;
        if (method_ == EvolutionMethod::krylov) {
            try {
                return krylov_expv(h_, v, tau, krylov_);
            } catch (const ConvergenceError& e) {
                if (static_cast<std::size_t>(h_.rows()) > dense_cap) throw;
                note("Krylov failed (" + std::string(e.what()) + "); fell back to dense evolution");
                method_ = EvolutionMethod::dense_eig;
            }
        }
        return dense_apply(v, tau);
    }

private:
    void note(const std::string& msg)
    {
        if (std::find(warnings_.begin(), warnings_.end(), msg) == warnings_.end()) warnings_.push_back(msg);
    }

    Eigen::VectorXcd dense_apply(const Eigen::VectorXcd& v, double tau)
    {
        if (defect_ > hermitian_tol) {
            const Eigen::MatrixXcd m = (cplx{0.0, -tau}) * Eigen::MatrixXcd(h_);
            const Eigen::MatrixXcd u = m.exp();
            return u * v;
        }
        if (!eig_) {
            const Eigen::MatrixXcd dense = Eigen::MatrixXcd(h_);
            const Eigen::MatrixXcd herm = 0.5 * (dense + dense.adjoint());
            eig_.emplace(herm);
            if (eig_->info() != Eigen::Success)
                throw ConvergenceError("dense evolution: eigendecomposition failed");
        }
        const auto& vecs = eig_->eigenvectors();
        const Eigen::VectorXd& vals = eig_->eigenvalues();
        Eigen::VectorXcd c = vecs.adjoint() * v;
        for (Eigen::Index i = 0; i < c.size(); ++i) c(i) *= std::polar(1.0, -vals(i) * tau);
        return vecs * c;
    }

    SparseMatrixC h_;
    KrylovOptions krylov_;
    EvolutionMethod method_ = EvolutionMethod::automatic;
    double defect_ = 0.0;
    std::vector<std::string> warnings_;
    std::optional<Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>> eig_;
};

/// psi -> U(tau) psi for tau >= 0.
using Propagator = std::function<Eigen::VectorXcd(const Eigen::VectorXcd&, double)>;

inline Propagator make_propagator(Evolver& ev)
{
    return [&ev](const Eigen::VectorXcd& v, double tau) { return ev.apply(v, tau); };
}

/// Full Hamiltonian up to the interaction time, hopping-only Hamiltonian after it.
inline Propagator make_quench_propagator(Evolver& full, Evolver& hopping, double interaction_time)
{
    if (!(interaction_time >= 0.0)) throw DomainError("quench: interaction time must be >= 0");
    return [&full, &hopping, interaction_time](const Eigen::VectorXcd& v, double tau) {
        if (tau <= interaction_time) return full.apply(v, tau);
        return hopping.apply(full.apply(v, interaction_time), tau - interaction_time);
    };
}

inline StateVector evolve(const StateVector& s, const Propagator& u, double tau)
{
    return {u(s.amplitudes, tau), s.basis};
}

inline StateVector evolve(const StateVector& s, Evolver& ev, double tau)
{
    return {ev.apply(s.amplitudes, tau), s.basis};
}

/// Re <psi0| n_r U^dag n_{r+R} U |psi0> from the two evolutions U n_r psi0 and U psi0.
inline double two_time_correlator(const StateVector& s0, const Propagator& u, std::size_t r, long offset,
                                  double tau)
{
    const auto& basis = *s0.basis;
    const long target = static_cast<long>(r) + offset;
    if (r >= basis.modes() || target < 0 || target >= static_cast<long>(basis.modes()))
        throw DomainError("two_time_correlator: mode index out of range");
    const Eigen::VectorXd nr = number_diagonal(basis, r);
    const Eigen::VectorXd nt = number_diagonal(basis, static_cast<std::size_t>(target));
    const Eigen::VectorXcd marked = nr.cast<cplx>().cwiseProduct(s0.amplitudes);
    const Eigen::VectorXcd a = u(marked, tau);
    const Eigen::VectorXcd b = u(s0.amplitudes, tau);
    return a.dot(nt.cast<cplx>().cwiseProduct(b)).real();
}

/// Sum of the correlator over every offset R with 0 <= r + R < M.
inline double nonlocal_sum(const StateVector& s0, const Propagator& u, std::size_t r, double tau)
{
    const auto& basis = *s0.basis;
    if (r >= basis.modes()) throw DomainError("nonlocal_sum: mode index out of range");
    const Eigen::VectorXd nr = number_diagonal(basis, r);
    const Eigen::VectorXcd a = u(nr.cast<cplx>().cwiseProduct(s0.amplitudes), tau);
    const Eigen::VectorXcd b = u(s0.amplitudes, tau);
    double total = 0.0;
    for (std::size_t t = 0; t < basis.modes(); ++t) {
        const Eigen::VectorXd nt = number_diagonal(basis, t);
        total += a.dot(nt.cast<cplx>().cwiseProduct(b)).real();
    }
    return total;
}

} // namespace spc
