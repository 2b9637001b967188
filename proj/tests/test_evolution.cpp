#include <cmath>
#include <random>

#include <gtest/gtest.h>
#include <unsupported/Eigen/MatrixFunctions>

#include "spc/evolution.hpp"

using namespace spc;

namespace {

SparseMatrixC two_mode_rabi(double theta)
{
    const FockBasis b(2, 1);
    Eigen::MatrixXcd t(2, 2);
    t << 0.0, theta, theta, 0.0;
    return hamiltonian_matrix(
        assemble_hamiltonian(HoppingMatrix{t, HoppingKind::total}, Eigen::MatrixXcd(Eigen::MatrixXcd::Zero(2, 2))), b);
}

EffectiveHamiltonian random_hamiltonian(std::size_t m, std::uint64_t seed, bool interacting = true)
{
    std::mt19937_64 g(seed);
    std::normal_distribution<double> nd;
    const auto me = static_cast<Eigen::Index>(m);
    Eigen::MatrixXcd a(me, me);
    for (Eigen::Index i = 0; i < me; ++i)
        for (Eigen::Index j = 0; j < me; ++j) a(i, j) = cplx(nd(g), nd(g));
    Eigen::MatrixXcd w(me, me);
    for (Eigen::Index i = 0; i < me; ++i)
        for (Eigen::Index j = 0; j <= i; ++j) w(i, j) = w(j, i) = interacting ? 0.3 * nd(g) : 0.0;
    return assemble_hamiltonian(HoppingMatrix{0.5 * (a + a.adjoint()), HoppingKind::total}, w);
}

} // namespace

TEST(Evolution, RabiOscillation)
{
    const double theta = 0.7;
    const auto h = two_mode_rabi(theta);
    auto basis = std::make_shared<const FockBasis>(2, 1);
    const std::vector<cplx> c{1.0, 0.0};
    const auto s0 = prepare_product_state(c, basis);
    for (auto method : {EvolutionMethod::dense_eig, EvolutionMethod::krylov}) {
        Evolver ev(h, method);
        double worst = 0.0;
        for (int i = 0; i <= 200; ++i) {
            const double tau = 10.0 / theta * i / 200.0;
            const auto s = evolve(s0, ev, tau);
            worst = std::max(worst, std::abs(density(s, 0) - std::pow(std::cos(theta * tau), 2)));
        }
        EXPECT_LT(worst, 1e-6) << to_string(method);
    }
}

TEST(Evolution, ZeroTimeIsIdentity)
{
    const auto h = random_hamiltonian(3, 4);
    auto basis = std::make_shared<const FockBasis>(3, 2);
    Evolver ev(hamiltonian_matrix(h, *basis));
    const std::vector<cplx> c{1.0, cplx(0.0, 1.0), 0.5};
    const auto s0 = prepare_product_state(c, basis);
    EXPECT_EQ(evolve(s0, ev, 0.0).amplitudes, s0.amplitudes);
}

TEST(Evolution, KrylovAgreesWithDense)
{
    const auto h = random_hamiltonian(4, 8);
    auto basis = std::make_shared<const FockBasis>(4, 2);
    const auto hm = hamiltonian_matrix(h, *basis);
    Evolver dense(hm, EvolutionMethod::dense_eig);
    Evolver krylov(hm, EvolutionMethod::krylov);
    const std::vector<cplx> c{1.0, 0.5, cplx(0.0, 1.0), -0.3};
    const auto s0 = prepare_product_state(c, basis);
    for (double tau : {0.1, 1.0, 5.0, 20.0}) {
        const auto a = evolve(s0, dense, tau);
        const auto b = evolve(s0, krylov, tau);
        EXPECT_GT(std::abs(a.amplitudes.dot(b.amplitudes)), 1.0 - 1e-9) << tau;
    }
}

TEST(Evolution, DenseMatchesMatrixExponential)
{
    const auto h = random_hamiltonian(3, 12);
    auto basis = std::make_shared<const FockBasis>(3, 2);
    const auto hm = hamiltonian_matrix(h, *basis);
    Evolver ev(hm, EvolutionMethod::dense_eig);
    const std::vector<cplx> c{0.2, 1.0, -0.4};
    const auto s0 = prepare_product_state(c, basis);
    const Eigen::MatrixXcd u = (cplx(0.0, -1.3) * Eigen::MatrixXcd(hm)).exp();
    EXPECT_LT((ev.apply(s0.amplitudes, 1.3) - u * s0.amplitudes).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Evolution, NormAndNumberConserved)
{
    const auto h = random_hamiltonian(4, 2);
    auto basis = std::make_shared<const FockBasis>(4, 3);
    Evolver ev(hamiltonian_matrix(h, *basis), EvolutionMethod::krylov);
    const std::vector<cplx> c{1.0, -0.2, cplx(0.3, 0.3), 0.8};
    const auto s0 = prepare_product_state(c, basis);
    for (double tau : {0.5, 3.0, 12.0}) {
        const auto s = evolve(s0, ev, tau);
        EXPECT_NEAR(s.norm(), 1.0, 1e-9);
        double total = 0.0;
        for (std::size_t r = 0; r < 4; ++r) total += density(s, r);
        EXPECT_NEAR(total, 3.0, 1e-9);
    }
}

TEST(Evolution, CorrelatorMatchesBruteForce)
{
    const auto h = random_hamiltonian(3, 31);
    auto basis = std::make_shared<const FockBasis>(3, 2);
    const auto hm = hamiltonian_matrix(h, *basis);
    Evolver ev(hm);
    const auto u = make_propagator(ev);
    const std::vector<cplx> c{0.6, cplx(0.0, 0.8), 0.3};
    const auto s0 = prepare_product_state(c, basis);
    const auto d = static_cast<Eigen::Index>(basis->dim());
    std::vector<Eigen::MatrixXcd> n(3, Eigen::MatrixXcd::Zero(d, d));
    for (Eigen::Index i = 0; i < d; ++i) {
        const auto occ = basis->occupation(static_cast<std::size_t>(i));
        for (std::size_t r = 0; r < 3; ++r) n[r](i, i) = occ[r];
    }
    for (double tau : {0.0, 0.4, 2.5}) {
        const Eigen::MatrixXcd ut = (cplx(0.0, -tau) * Eigen::MatrixXcd(hm)).exp();
        for (std::size_t r = 0; r < 3; ++r) {
            double sum = 0.0;
            for (long off = -static_cast<long>(r); off + static_cast<long>(r) < 3; ++off) {
                const auto t = static_cast<std::size_t>(static_cast<long>(r) + off);
                const cplx expected = s0.amplitudes.dot(n[r] * ut.adjoint() * n[t] * ut * s0.amplitudes);
                const double got = two_time_correlator(s0, u, r, off, tau);
                EXPECT_NEAR(got, expected.real(), 1e-10);
                sum += got;
            }
            EXPECT_NEAR(nonlocal_sum(s0, u, r, tau), sum, 1e-12);
        }
    }
    EXPECT_THROW((void)two_time_correlator(s0, u, 0, -1, 0.0), DomainError);
}

TEST(Evolution, SinglePhotonCorrelatorIdentities)
{
    const auto h = random_hamiltonian(4, 6, false);
    auto basis = std::make_shared<const FockBasis>(4, 1);
    Evolver ev(hamiltonian_matrix(h, *basis));
    const auto u = make_propagator(ev);
    const std::vector<cplx> c{0.5, cplx(0.0, 1.0), -0.7, 0.2};
    const auto s0 = prepare_product_state(c, basis);
    for (std::size_t r = 0; r < 4; ++r) {
        for (long off = -static_cast<long>(r); off + static_cast<long>(r) < 4; ++off) {
            const double expected = off == 0 ? density(s0, r) : 0.0;
            EXPECT_NEAR(two_time_correlator(s0, u, r, off, 0.0), expected, 1e-14);
        }
        EXPECT_NEAR(nonlocal_sum(s0, u, r, 1.7), density(s0, r), 1e-12);
    }
}

TEST(Evolution, DiagonalHamiltonianCorrelatorIsStatic)
{
    const FockBasis fb(3, 2);
    Eigen::MatrixXcd t = Eigen::MatrixXcd::Zero(3, 3);
    t.diagonal() << 0.3, -1.0, 2.0;
    Eigen::MatrixXcd w(3, 3);
    w << 0.2, 0.1, 0.0, 0.1, -0.4, 0.3, 0.0, 0.3, 0.5;
    Evolver ev(hamiltonian_matrix(assemble_hamiltonian(HoppingMatrix{t, HoppingKind::total}, w), fb));
    const auto u = make_propagator(ev);
    auto basis = std::make_shared<const FockBasis>(3, 2);
    const std::vector<cplx> c{1.0, 0.4, cplx(0.1, -0.6)};
    const auto s0 = prepare_product_state(c, basis);
    for (double tau : {0.7, 4.0})
        EXPECT_NEAR(two_time_correlator(s0, u, 1, 1, tau), two_time_correlator(s0, u, 1, 1, 0.0), 1e-12);
}

TEST(Evolution, QuenchSwitchesToHoppingOnly)
{
    const auto full = random_hamiltonian(3, 40);
    const auto hop = assemble_hamiltonian(full.theta, Eigen::MatrixXcd(Eigen::MatrixXcd::Zero(3, 3)));
    auto basis = std::make_shared<const FockBasis>(3, 2);
    Evolver ef(hamiltonian_matrix(full, *basis));
    Evolver eh(hamiltonian_matrix(hop, *basis));
    const auto q = make_quench_propagator(ef, eh, 1.0);
    const std::vector<cplx> c{1.0, 0.0, 1.0};
    const auto s0 = prepare_product_state(c, basis);
    EXPECT_LT((q(s0.amplitudes, 0.6) - ef.apply(s0.amplitudes, 0.6)).cwiseAbs().maxCoeff(), 1e-14);
    const Eigen::VectorXcd expected = eh.apply(ef.apply(s0.amplitudes, 1.0), 1.5);
    EXPECT_LT((q(s0.amplitudes, 2.5) - expected).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_THROW((void)make_quench_propagator(ef, eh, -1.0), DomainError);
}

TEST(Evolution, MethodSelectionAndWarnings)
{
    const auto h = two_mode_rabi(1.0);
    EXPECT_EQ(Evolver(h).method(), EvolutionMethod::dense_eig);
    EXPECT_TRUE(Evolver(h).warnings().empty());

    Eigen::MatrixXcd t(2, 2);
    t << 0.0, 1.0, 0.5, 0.0;
    const auto bad = hamiltonian_matrix(
        assemble_hamiltonian(HoppingMatrix{t, HoppingKind::total}, Eigen::MatrixXcd(Eigen::MatrixXcd::Zero(2, 2))),
        FockBasis(2, 1));
    Evolver ev(bad);
    EXPECT_NEAR(ev.hermiticity_defect_value(), 0.5, 1e-15);
    EXPECT_EQ(ev.warnings().size(), 1u);
    const Eigen::VectorXcd v = Eigen::VectorXcd::Unit(2, 0);
    const Eigen::MatrixXcd expected = (cplx(0.0, -0.8) * Eigen::MatrixXcd(bad)).exp();
    EXPECT_LT((ev.apply(v, 0.8) - expected.col(0)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Evolution, DenseCapacity)
{
    SparseMatrixC h(3000, 3000);
    EXPECT_THROW(Evolver(h, EvolutionMethod::dense_eig), CapacityError);
    EXPECT_EQ(Evolver(h).method(), EvolutionMethod::krylov);
}
