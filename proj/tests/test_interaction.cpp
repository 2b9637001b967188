#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "spc/interaction.hpp"

using namespace spc;

namespace {

BasisSpec full_basis(int l_max, int p_max)
{
    BasisSpec s;
    s.ordering = ModeSet::full;
    s.l_max = l_max;
    s.p_max = p_max;
    return s;
}

RealTensor4 random_real(std::size_t m, std::uint64_t seed)
{
    std::mt19937_64 g(seed);
    std::normal_distribution<double> nd;
    RealTensor4 t(m);
    for (auto& x : t.data()) x = nd(g);
    return t;
}

ComplexTensor4 random_complex(std::size_t m, std::uint64_t seed)
{
    std::mt19937_64 g(seed);
    std::normal_distribution<double> nd;
    ComplexTensor4 t(m);
    for (auto& x : t.data()) x = cplx(nd(g), nd(g));
    return t;
}

} // namespace

TEST(Structural, PositiveSemidefinite)
{
    const auto s = structural_tensor(gen_uniform_cylinder(0.2, 1.5, 40, 9), full_basis(1, 1));
    EXPECT_GE(structural_min_eigenvalue(s), -1e-10);
    const Eigen::MatrixXcd g = matricize(s.entries);
    EXPECT_LT((g - g.adjoint()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Structural, SingleScattererIsRankOne)
{
    Architecture arch;
    Scatterer sc;
    sc.position = {0.4, -0.3};
    arch.scatterers.push_back(sc);
    const auto spec = full_basis(1, 1);
    const auto s = structural_tensor(arch, spec);
    const auto psi = mode_values_at(arch, spec);
    const std::size_t m = s.side();
    auto f = [&](std::size_t a, std::size_t b) {
        return std::conj(psi(0, static_cast<Eigen::Index>(a))) * psi(0, static_cast<Eigen::Index>(b));
    };
    for (std::size_t l = 0; l < m; ++l)
        for (std::size_t lp = 0; lp < m; ++lp)
            for (std::size_t x = 0; x < m; ++x)
                for (std::size_t xp = 0; xp < m; ++xp)
                    EXPECT_NEAR(std::abs(s.entries(l, lp, x, xp) - std::conj(f(l, lp)) * f(x, xp)), 0.0, 1e-14);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(matricize(s.entries));
    int nonzero = 0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
        if (std::abs(es.eigenvalues()(i)) > 1e-12 * es.eigenvalues().cwiseAbs().maxCoeff()) ++nonzero;
    EXPECT_EQ(nonzero, 1);
}

TEST(Structural, OriginScattererTouchesOnlyZeroCharge)
{
    Architecture arch;
    arch.scatterers.emplace_back();
    const auto spec = full_basis(1, 1);
    const auto modes = enumerate_modes(spec);
    const auto s = structural_tensor(arch, spec);
    const std::size_t m = s.side();
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = 0; b < m; ++b)
            for (std::size_t c = 0; c < m; ++c)
                for (std::size_t d = 0; d < m; ++d)
                    if (modes[a].l || modes[b].l || modes[c].l || modes[d].l) EXPECT_EQ(std::abs(s.entries(a, b, c, d)), 0.0);
}

TEST(Interaction, MatchesNaiveContraction)
{
    const std::size_t m = 4;
    StructuralTensor s{random_complex(m, 1)};
    const auto v = random_real(m, 2);
    const auto u = interaction_tensor(s, v);
    double worst = 0.0;
    for (std::size_t n = 0; n < m; ++n)
        for (std::size_t k = 0; k < m; ++k)
            for (std::size_t l = 0; l < m; ++l)
                for (std::size_t x = 0; x < m; ++x) {
                    cplx acc{};
                    for (std::size_t lp = 0; lp < m; ++lp)
                        for (std::size_t xp = 0; xp < m; ++xp) acc += s.entries(l, lp, x, xp) * v(n, k, lp, xp);
                    worst = std::max(worst, std::abs(u(n, k, l, x) + acc));
                }
    EXPECT_LT(worst, 1e-12);
}

TEST(Interaction, IdentityStructureNegatesPotential)
{
    const std::size_t m = 3;
    StructuralTensor s{ComplexTensor4(m)};
    for (std::size_t l = 0; l < m; ++l)
        for (std::size_t x = 0; x < m; ++x) s.entries(l, l, x, x) = 1.0;
    const auto v = random_real(m, 5);
    const auto u = interaction_tensor(s, v);
    for (std::size_t i = 0; i < v.size(); ++i) EXPECT_EQ(u.data()[i], cplx(-v.data()[i], 0.0));

    const auto zero = interaction_tensor(s, RealTensor4(m));
    EXPECT_EQ(zero.max_abs(), 0.0);
}

TEST(Interaction, DimensionMismatch)
{
    StructuralTensor s{ComplexTensor4(3)};
    EXPECT_THROW((void)interaction_tensor(s, RealTensor4(2)), DimensionError);
    const HoppingMatrix theta{Eigen::MatrixXcd::Zero(3, 3), HoppingKind::total};
    EXPECT_THROW((void)assemble_hamiltonian(theta, Eigen::MatrixXcd(Eigen::MatrixXcd::Zero(2, 2))), DimensionError);
    EXPECT_THROW((void)assemble_hamiltonian(theta, ComplexTensor4(2)), DimensionError);
}

TEST(LgReduction, HandComputedTwoModes)
{
    ComplexTensor4 u(2);
    u(0, 0, 0, 0) = 1.0;
    u(0, 0, 1, 1) = cplx(2.0, 1.0);
    u(1, 1, 0, 0) = cplx(2.0, -1.0);
    u(1, 1, 1, 1) = 4.0;
    u(0, 1, 0, 1) = 3.0; // dropped
    const auto r = reduce_lg_diagonal(u);
    Eigen::MatrixXcd expected(2, 2);
    expected << 1.0, cplx(2.0, 1.0), cplx(2.0, -1.0), 4.0;
    EXPECT_EQ(r.u, expected);
    EXPECT_NEAR(r.discarded_weight, 3.0 / std::sqrt(1.0 + 5.0 + 5.0 + 16.0 + 9.0), 1e-15);

    const auto z = reduce_lg_diagonal(ComplexTensor4(3));
    EXPECT_EQ(z.u.cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(z.discarded_weight, 0.0);
}

TEST(LgReduction, KroneckerLikePotentialKeepsMostWeight)
{
    BasisSpec spec;
    const auto v = scattering_potential(spec, 0.001 * spec.q_max * spec.q_max, make_grid(spec));
    RealTensor4 neg(v.side());
    for (std::size_t i = 0; i < neg.size(); ++i) neg.data()[i] = -v.entries.data()[i];
    EXPECT_LT(reduce_lg_diagonal(neg).discarded_weight, 0.15);
}

TEST(Assembly, DefectsOfSyntheticInputs)
{
    Eigen::MatrixXcd t(2, 2);
    t << 1.0, cplx(0.5, 0.2), cplx(0.5, -0.2), 2.0;
    Eigen::MatrixXd w(2, 2);
    w << 0.3, 0.1, 0.1, 0.7;
    const auto h = assemble_hamiltonian(HoppingMatrix{t, HoppingKind::total}, Eigen::MatrixXcd(w.cast<cplx>()));
    EXPECT_LT(h.hermiticity_defect(), 1e-12);
    EXPECT_EQ(h.form, HamiltonianForm::lg_diagonal);

    Eigen::MatrixXcd bad = t;
    bad(0, 1) += 0.25;
    const auto hb = assemble_hamiltonian(HoppingMatrix{bad, HoppingKind::total}, Eigen::MatrixXcd(w.cast<cplx>()));
    EXPECT_NEAR(hb.hopping_defect, 0.25, 1e-15);
    EXPECT_NEAR(hb.hermiticity_defect(), 0.25, 1e-15);
}

TEST(Assembly, FullTensorSymmetryDefect)
{
    const std::size_t m = 3;
    const auto raw = random_complex(m, 3);
    ComplexTensor4 u(m);
    for (std::size_t n = 0; n < m; ++n)
        for (std::size_t k = 0; k < m; ++k)
            for (std::size_t l = 0; l < m; ++l)
                for (std::size_t x = 0; x < m; ++x) u(n, k, l, x) = raw(n, k, l, x) + std::conj(raw(x, l, k, n));
    EXPECT_LT(interaction_defect(u), 1e-14);
    u(0, 1, 2, 0) += 0.5;
    EXPECT_NEAR(interaction_defect(u), 0.5, 1e-14);
}

TEST(Assembly, UniformCylinderDomains)
{
    const Eigen::Index m = 6;
    Eigen::MatrixXcd t = Eigen::MatrixXcd::Constant(m, m, 1.0);
    Eigen::MatrixXcd u = Eigen::MatrixXcd::Constant(m, m, 2.0);
    const auto h = uniform_cylinder_hamiltonian(HoppingMatrix{t, HoppingKind::total}, u, {2, 4, 1});
    for (Eigen::Index n = 0; n < m; ++n)
        for (Eigen::Index k = 0; k < m; ++k) {
            const bool in_dh = n >= 2 && n <= 4 && k >= 2 && k <= 4 && std::abs(n - k) <= 1;
            EXPECT_EQ(h.theta.entries(n, k), in_dh ? cplx(1.0) : cplx(0.0)) << n << "," << k;
            EXPECT_EQ(h.reduced(n, k), std::abs(n - k) <= 1 ? cplx(2.0) : cplx(0.0));
        }
}

TEST(Assembly, CylinderPipelineDomainMatchesHoppingBlock)
{
    BasisSpec spec;
    const double c = power_radius({0, 25}, 0.95, spec);
    const auto arch = gen_uniform_cylinder(0.4 * c, 0.6 * c, 2000, 0);
    const auto inc = hopping_incoherent_pp(arch, spec);
    const auto theta = hopping_total(1.0, hopping_coherent_pp(arch, spec), inc);
    const auto v = scattering_potential(spec, 0.001 * spec.q_max * spec.q_max, make_grid(spec, 80));
    const auto dom = confinement_domains(inc, v.entries);
    const auto blk = half_max_diagonal_block(inc.entries);
    EXPECT_EQ(dom.first, blk.first);
    EXPECT_EQ(dom.last, blk.last);
    EXPECT_GT(dom.first, 0);
    EXPECT_LT(dom.last, 25);
    const auto h = uniform_cylinder_hamiltonian(theta, Eigen::MatrixXcd(Eigen::MatrixXcd::Zero(26, 26)), dom);
    EXPECT_EQ(h.theta.entries.topLeftCorner(dom.first, 26).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_GT(std::abs(h.theta.entries(dom.first, dom.first)), 0.0);
}
