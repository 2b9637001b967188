#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "spc/potential.hpp"

using namespace spc;

namespace {

BasisSpec radial(int p_max)
{
    BasisSpec s;
    s.p_max = p_max;
    return s;
}

} // namespace

// Reference values from an independent adaptive-quadrature evaluation
// (singularity subtraction for the inner PV integral, break points at
// k = sqrt(D) and sqrt(q_max^2 - D)), single Gaussian mode, w0 = 1, q_max = 20.
TEST(Potential, GaussianModeMatchesReference)
{
    const auto spec = radial(0);
    const auto grid = make_grid(spec);
    const double q2 = spec.q_max * spec.q_max;
    EXPECT_NEAR(scattering_potential(spec, 0.001 * q2, grid).entries(0, 0, 0, 0), -0.41027404097454706, 1e-7);
    EXPECT_NEAR(scattering_potential(spec, 0.01 * q2, grid).entries(0, 0, 0, 0), -0.5159056633391437, 1e-7);
}

TEST(Potential, ZeroGapGivesZero)
{
    const auto spec = radial(3);
    const auto v = scattering_potential(spec, 0.0, make_grid(spec));
    EXPECT_EQ(v.entries.max_abs(), 0.0);
}

TEST(Potential, OddInGap)
{
    const auto spec = radial(4);
    const auto grid = make_grid(spec, 60);
    const double d = 0.02 * spec.q_max * spec.q_max;
    const auto plus = scattering_potential(spec, d, grid);
    const auto minus = scattering_potential(spec, -d, grid);
    for (std::size_t i = 0; i < plus.entries.size(); ++i)
        EXPECT_NEAR(plus.entries.data()[i], -minus.entries.data()[i], 1e-12);
}

TEST(Potential, PairSymmetriesAndChargeSelection)
{
    BasisSpec spec;
    spec.ordering = ModeSet::full;
    spec.l_max = 1;
    spec.p_max = 1;
    const auto modes = enumerate_modes(spec);
    const auto v = scattering_potential(spec, 0.01 * spec.q_max * spec.q_max, make_grid(spec, 60));
    const std::size_t m = v.side();
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = 0; b < m; ++b)
            for (std::size_t c = 0; c < m; ++c)
                for (std::size_t d = 0; d < m; ++d) {
                    const double x = v.entries(a, b, c, d);
                    EXPECT_NEAR(x, v.entries(c, b, a, d), 1e-12);
                    EXPECT_NEAR(x, v.entries(a, d, c, b), 1e-12);
                    if (modes[a].l != modes[c].l || modes[b].l != modes[d].l) EXPECT_EQ(x, 0.0);
                }
}

TEST(Potential, GapsAreAdditive)
{
    const auto spec = radial(2);
    const auto grid = make_grid(spec, 80);
    const double q2 = spec.q_max * spec.q_max;
    const std::vector<double> both{0.01 * q2, 0.05 * q2};
    const auto sum = scattering_potential(spec, both, grid);
    const auto a = scattering_potential(spec, both[0], grid);
    const auto b = scattering_potential(spec, both[1], grid);
    for (std::size_t i = 0; i < sum.entries.size(); ++i)
        EXPECT_NEAR(sum.entries.data()[i], a.entries.data()[i] + b.entries.data()[i], 1e-6);
}

TEST(Potential, PartialTraces)
{
    RealTensor4 t(2);
    for (std::size_t i = 0; i < t.size(); ++i) t.data()[i] = static_cast<double>(i + 1);
    // index = 8a + 4b + 2c + d, value = index + 1
    const Eigen::MatrixXd nm = trace_last_pair(t);
    EXPECT_DOUBLE_EQ(nm(0, 1), t(0, 1, 0, 0) + t(0, 1, 1, 1));
    EXPECT_DOUBLE_EQ(nm(1, 0), 9.0 + 12.0);
    const Eigen::MatrixXd kl = trace_first_pair(t);
    EXPECT_DOUBLE_EQ(kl(1, 0), t(0, 0, 1, 0) + t(1, 1, 1, 0));
    const Eigen::MatrixXd mk = trace_outer_pair(t);
    EXPECT_DOUBLE_EQ(mk(0, 1), t(0, 0, 1, 0) + t(1, 0, 1, 1));
}

TEST(Potential, StructureMetrics)
{
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(6, 6) * 2.0;
    EXPECT_EQ(off_diagonal_ratio(a), 0.0);
    EXPECT_EQ(half_max_bandwidth(a), 0);
    a(0, 1) = 1.5;
    a(2, 4) = -1.2;
    a(1, 5) = 0.9;
    EXPECT_DOUBLE_EQ(mean_abs_diagonal(a), 2.0);
    EXPECT_DOUBLE_EQ(off_diagonal_ratio(a), 0.75);
    EXPECT_EQ(half_max_bandwidth(a), 2); // super-diagonals 1 and 2 exceed 1.0; the 0.9 on diagonal 4 does not
}

TEST(Potential, EpsilonHalvingIsStable)
{
    const auto spec = radial(5);
    const auto grid = make_grid(spec);
    const double d = 0.001 * spec.q_max * spec.q_max;
    PvConfig pv;
    const auto a = scattering_potential(spec, d, grid, pv);
    const auto b = scattering_potential(spec, d, grid, pv.halved());
    EXPECT_LT(max_abs_diff(a.entries, b.entries) / a.entries.max_abs(), 1e-6);
}
