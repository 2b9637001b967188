#include <string>

#include <gtest/gtest.h>

#include "spc/config.hpp"

using namespace spc;

TEST(Config, EmptyObjectGivesDefaults)
{
    const auto c = parse_config("{}");
    EXPECT_EQ(c.basis.l_max, 0);
    EXPECT_EQ(c.basis.p_max, 25);
    EXPECT_EQ(c.geometry.kind, GeometryKind::cylinder);
    EXPECT_EQ(c.geometry.count, 2000u);
    EXPECT_EQ(c.deltas, (std::vector<double>{0.001, 0.01, 0.02, 0.05}));
    EXPECT_EQ(c.dynamics.form, HamiltonianForm::lg_diagonal);
    EXPECT_NO_THROW(validate(c));
}

TEST(Config, ReadsNestedSections)
{
    const auto c = parse_config(R"({
        "basis": {"l_max": 1, "p_max": 2, "ordering": "full"},
        "geometry": {"ring": {"radius": 0.7, "count": 5, "gaps": [0.5, 2]}},
        "quadrature": {"n_r": 40},
        "deltas": [0.002],
        "dynamics": {"photons": 2, "linspace": [0, 1, 3], "initial": [1, [0, 1]],
                     "correlators": {"modes": [0], "offsets": [0, 1]}},
        "seed": 9
    })");
    EXPECT_EQ(c.basis.ordering, ModeSet::full);
    EXPECT_EQ(c.geometry.kind, GeometryKind::ring);
    EXPECT_EQ(c.geometry.radius, 0.7);
    EXPECT_EQ(c.geometry.gaps, (std::vector<double>{0.5, 2.0}));
    EXPECT_EQ(c.quadrature.n_r, 40u);
    EXPECT_EQ(c.dynamics.taus, (std::vector<double>{0.0, 0.5, 1.0}));
    EXPECT_EQ(c.dynamics.initial[1], cplx(0.0, 1.0));
    EXPECT_EQ(c.dynamics.correlator_offsets, (std::vector<long>{0, 1}));
    EXPECT_EQ(c.seed, 9u);
}

TEST(Config, UnknownKeysAreRejected)
{
    EXPECT_THROW((void)parse_config(R"({"basis": {"lmax": 1}})"), SchemaError);
    EXPECT_THROW((void)parse_config(R"({"colour": 1})"), SchemaError);
    EXPECT_THROW((void)parse_config(R"({"dynamics": {"correlators": {"mode": [0]}}})"), SchemaError);
    try {
        (void)parse_config(R"({"basis": {"lmax": 1}})");
    } catch (const SchemaError& e) {
        EXPECT_NE(std::string(e.what()).find("basis"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("lmax"), std::string::npos);
    }
}

TEST(Config, WrongTypesAreRejected)
{
    EXPECT_THROW((void)parse_config(R"({"basis": {"l_max": 1.5}})"), SchemaError);
    EXPECT_THROW((void)parse_config(R"({"seed": -1})"), SchemaError);
    EXPECT_THROW((void)parse_config(R"({"deltas": "0.1"})"), SchemaError);
    EXPECT_THROW((void)parse_config(R"({"dynamics": {"linspace": [0, 1]}})"), SchemaError);
    EXPECT_THROW((void)parse_config(R"({"geometry": {}})"), SchemaError);
    EXPECT_THROW((void)parse_config(R"({"geometry": {"ring": {}, "file": "x"}})"), SchemaError);
}

TEST(Config, SyntaxErrorReportsPosition)
{
    try {
        (void)parse_config("{\n  \"seed\": 1,\n  oops\n}");
        FAIL() << "no exception";
    } catch (const ParseError& e) {
        EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
    }
    EXPECT_THROW((void)load_config("/nonexistent/config.json"), ParseError);
}

TEST(Config, ValidationRejectsBadValues)
{
    auto expect_bad = [](const char* text) {
        EXPECT_THROW(validate(parse_config(text)), SchemaError) << text;
    };
    expect_bad(R"({"basis": {"w0": 0}})");
    expect_bad(R"({"geometry": {"cylinder": {"a_over_c": 0.7, "b_over_c": 0.6}}})");
    expect_bad(R"({"geometry": {"cylinder": {"boundary_fraction": 1.0}}})");
    expect_bad(R"({"geometry": {"ring": {"radius": -1}}})");
    expect_bad(R"({"geometry": {"ring": {"count": 0}}})");
    expect_bad(R"({"geometry": {"ring": {"gaps": [-0.1]}}})");
    expect_bad(R"({"quadrature": {"epsilon_pv": 0.5}})");
    expect_bad(R"({"deltas": [1.5]})");
    expect_bad(R"({"dynamics": {"taus": [0, 1, 1]}})");
    expect_bad(R"({"dynamics": {"initial": [0, 0]}})");
    expect_bad(R"({"dynamics": {"hamiltonian": {"interaction": [[1]]}}})");
    expect_bad(R"({"dynamics": {"hamiltonian": {"theta": [[0, 1], [1, 0]], "interaction": [[1]]}}})");
    expect_bad(R"({"preset": "unknown"})");
}

TEST(Config, OverridePrecedence)
{
    auto c = parse_config(R"({"seed": 4, "deltas": [0.002], "output": {"dir": "from-file"}})");
    apply_overrides(c, {});
    EXPECT_EQ(c.seed, 4u);
    EXPECT_EQ(c.output_dir, "from-file");

    CliOverrides o;
    o.seed = 11;
    o.out = "from-cli";
    o.deltas = {0.03, 0.04};
    apply_overrides(c, o);
    EXPECT_EQ(c.seed, 11u);
    EXPECT_EQ(c.output_dir, "from-cli");
    EXPECT_EQ(c.deltas, (std::vector<double>{0.03, 0.04}));
}

TEST(Config, PresetForcesRadialBasisAndCylinder)
{
    auto c = parse_config(R"({"basis": {"l_max": 2, "ordering": "full"}, "geometry": {"ring": {"radius": 1}}})");
    CliOverrides o;
    o.preset = "cylinder-fig4";
    apply_overrides(c, o);
    EXPECT_EQ(c.basis.ordering, ModeSet::radial_sector);
    EXPECT_EQ(c.basis.l_max, 0);
    EXPECT_EQ(c.basis.p_max, 25);
    EXPECT_EQ(c.geometry.kind, GeometryKind::cylinder);
    EXPECT_NO_THROW(validate(c));
}

TEST(Config, HashIgnoresOutputDirectory)
{
    auto a = parse_config(R"({"output": {"dir": "a"}})");
    auto b = parse_config(R"({"output": {"dir": "b"}})");
    EXPECT_EQ(config_hash(a), config_hash(b));
    b.seed = 1;
    EXPECT_NE(config_hash(a), config_hash(b));
    EXPECT_EQ(config_hash(a).size(), 16u);
}

TEST(Config, JsonRoundTrip)
{
    const auto c = parse_config(R"({
        "basis": {"l_max": 1, "p_max": 1, "ordering": "full"},
        "geometry": {"inline": {"omega0": 1, "g_coh": 1, "g_inc": 0.5,
                                 "scatterers": [{"x": 0.1, "y": 0.2, "gaps": [1]}]}},
        "dynamics": {"photons": 2, "interaction_time": 0.5, "initial": [1, [0, 1], 0, 0, 0, 0],
                     "hamiltonian": {"theta": [[0, [1, 2]], [[1, -2], 0]]}},
        "seed": 3
    })");
    const auto back = config_from_json(to_json(c));
    EXPECT_EQ(to_json(back).dump(), to_json(c).dump());
    EXPECT_EQ(config_hash(back), config_hash(c));
    EXPECT_EQ((*back.dynamics.theta)(0, 1), cplx(1.0, 2.0));
}

TEST(Io, FormatNumber)
{
    EXPECT_EQ(format_number(0.0), "0");
    EXPECT_EQ(format_number(-0.0), "0");
    EXPECT_EQ(format_number(0.1), "0.1");
    EXPECT_EQ(format_number(-2.5), "-2.5");
    EXPECT_EQ(format_number(1e-300), "1e-300");
    EXPECT_EQ(std::stod(format_number(1.0 / 3.0)), 1.0 / 3.0);
}

TEST(Io, Fnv1a)
{
    EXPECT_EQ(fnv1a_hex(""), "cbf29ce484222325");
    EXPECT_EQ(fnv1a_hex("a"), "af63dc4c8601ec8c");
}
