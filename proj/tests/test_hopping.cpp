#include <cmath>
#include <cstdlib>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "spc/hopping.hpp"

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

Architecture single_at(Vec2 r)
{
    Architecture arch;
    Scatterer s;
    s.position = r;
    arch.scatterers.push_back(s);
    return arch;
}

} // namespace

TEST(Hopping, IncoherentIsHermitianPositive)
{
    auto arch = gen_uniform_cylinder(0.5, 2.0, 200, 5);
    arch.g_inc = 0.7;
    const auto theta = hopping_incoherent_pp(arch, full_basis(2, 3));
    EXPECT_LT(hermiticity_defect(theta.entries), 1e-12);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(theta.entries);
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-10);
}

TEST(Hopping, CoherentVanishesForOneScatterer)
{
    const auto theta = hopping_coherent_pp(single_at({0.3, -0.4}), full_basis(1, 2));
    EXPECT_EQ(theta.entries.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Hopping, CoherentTwoScatterersExpansion)
{
    Architecture arch = single_at({0.3, -0.4});
    Scatterer b;
    b.position = {-0.7, 0.2};
    arch.scatterers.push_back(b);
    arch.g_coh = 1.3;
    const auto spec = full_basis(1, 1);
    const auto modes = enumerate_modes(spec);
    const auto theta = hopping_coherent_pp(arch, spec);
    const Vec2 r1 = arch.scatterers[0].position;
    const Vec2 r2 = arch.scatterers[1].position;
    for (std::size_t n = 0; n < modes.size(); ++n)
        for (std::size_t m = 0; m < modes.size(); ++m) {
            const cplx expected =
                1.3 * (std::conj(eval_lg_position(modes[n], r1, spec)) * eval_lg_position(modes[m], r2, spec) +
                       std::conj(eval_lg_position(modes[n], r2, spec)) * eval_lg_position(modes[m], r1, spec));
            EXPECT_NEAR(std::abs(theta.entries(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m)) - expected),
                        0.0, 1e-14);
        }
}

TEST(Hopping, OriginScattererCouplesOnlyZeroCharge)
{
    const auto spec = full_basis(2, 2);
    const auto modes = enumerate_modes(spec);
    const auto theta = hopping_incoherent_pp(single_at({0.0, 0.0}), spec);
    for (std::size_t n = 0; n < modes.size(); ++n)
        for (std::size_t k = 0; k < modes.size(); ++k) {
            const double v = std::abs(theta.entries(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k)));
            if (modes[n].l != 0 || modes[k].l != 0) EXPECT_EQ(v, 0.0);
        }
    EXPECT_GT(std::abs(theta.entries(6, 6)), 0.0); // (0, 0) follows the l = -2, -1 blocks
}

TEST(Hopping, RingSelectionRule)
{
    const auto spec = full_basis(4, 1);
    const auto modes = enumerate_modes(spec);
    const auto theta = hopping_incoherent_pp(gen_ring(1.1, 8), spec);
    const double scale = theta.entries.cwiseAbs().maxCoeff();
    bool saw_wrap = false;
    for (std::size_t n = 0; n < modes.size(); ++n)
        for (std::size_t k = 0; k < modes.size(); ++k) {
            const double v = std::abs(theta.entries(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k)));
            const int dl = modes[k].l - modes[n].l;
            if (dl % 8 != 0) EXPECT_LT(v, 1e-13 * scale) << dl;
            if (std::abs(dl) == 8 && v > 1e-6 * scale) saw_wrap = true;
        }
    EXPECT_TRUE(saw_wrap);
}

TEST(Hopping, TotalCombination)
{
    const auto arch = gen_ring(0.8, 3);
    const auto spec = full_basis(1, 1);
    const auto coh = hopping_coherent_pp(arch, spec);
    const auto inc = hopping_incoherent_pp(arch, spec);
    const auto total = hopping_total(2.0, coh, inc);
    const Eigen::MatrixXcd expected =
        2.0 * (Eigen::MatrixXcd::Identity(coh.dim(), coh.dim()) - coh.entries - inc.entries);
    EXPECT_LT((total.entries - expected).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_EQ(total.kind, HoppingKind::total);

    const HoppingMatrix small{Eigen::MatrixXcd::Zero(2, 2), HoppingKind::coherent};
    EXPECT_THROW((void)hopping_total(1.0, small, inc), DimensionError);
}

TEST(Hopping, SeedChangesEntriesNotHermiticity)
{
    BasisSpec spec;
    const auto a = hopping_incoherent_pp(gen_uniform_cylinder(1.0, 4.0, 2000, 1), spec);
    const auto b = hopping_incoherent_pp(gen_uniform_cylinder(1.0, 4.0, 2000, 2), spec);
    EXPECT_GT((a.entries - b.entries).cwiseAbs().maxCoeff(), 1e-6);
    EXPECT_LT(hermiticity_defect(a.entries), 1e-12);
    EXPECT_LT(hermiticity_defect(b.entries), 1e-12);
}

TEST(Hopping, DiagonalBlockOnSyntheticMatrix)
{
    Eigen::MatrixXcd t = Eigen::MatrixXcd::Zero(6, 6);
    const double diag[] = {0.1, 0.6, 1.0, 0.8, 0.2, 0.55};
    for (int i = 0; i < 6; ++i) t(i, i) = diag[i];
    for (int i = 0; i + 1 < 6; ++i) t(i, i + 1) = t(i + 1, i) = -0.3;
    const auto blk = half_max_diagonal_block(t);
    EXPECT_EQ(blk.peak, 2);
    EXPECT_EQ(blk.first, 1);
    EXPECT_EQ(blk.last, 3);
    EXPECT_EQ(blk.extent(), 3);
    EXPECT_EQ(blk.neighbour_count, 6u);
    EXPECT_EQ(blk.negative_neighbours, 6u);
    EXPECT_DOUBLE_EQ(blk.neighbour_mean, -0.3);
    EXPECT_TRUE(blk.flanked());

    const auto none = half_max_diagonal_block(-Eigen::MatrixXcd::Identity(3, 3));
    EXPECT_EQ(none.extent(), 0);
    EXPECT_FALSE(none.flanked());
}

TEST(Hopping, IntermediateAnnulusConfinesPositiveBlock)
{
    BasisSpec spec;
    const double c = power_radius({0, 25}, 0.95, spec);
    const auto theta = hopping_incoherent_pp(gen_uniform_cylinder(0.4 * c, 0.6 * c, 2000, 0), spec);
    const auto blk = half_max_diagonal_block(theta.entries);
    EXPECT_GT(blk.first, 0);
    EXPECT_LT(blk.last, 25);
    EXPECT_TRUE(blk.flanked());
}
