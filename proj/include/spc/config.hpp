#pragma once

// Run configuration: JSON file -> RunConfig, with strict key checking.
// Precedence: command-line overrides > file > defaults.

#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "spc/errors.hpp"
#include "spc/evolution.hpp"
#include "spc/geometry.hpp"
#include "spc/interaction.hpp"
#include "spc/io.hpp"
#include "spc/modes.hpp"

namespace spc {

enum class GeometryKind { cylinder, ring, inline_architecture, file };

struct GeometryConfig {
    GeometryKind kind = GeometryKind::cylinder;
    // cylinder: radii in units of the boundary radius c
    double a_over_c = 0.4;
    double b_over_c = 0.6;
    int boundary_p = 25;
    double boundary_fraction = 0.95;
    // ring: radius in waist units
    double radius = 1.0;
    std::size_t count = 2000;
    // shared scatterer properties for generated geometries
    double omega0 = 1.0;
    double g_coh = 1.0;
    double g_inc = 1.0;
    std::vector<double> gaps{1.0};
    double orbital_width = 0.0;
    Architecture architecture; ///< inline
    std::string file;
};

struct QuadratureConfig {
    std::size_t n_r = 200;
    std::size_t n_theta = 128;
    double epsilon_pv = 1e-10; ///< exclusion half-width / q_max^2
    double near_width = 0.02; ///< log-mapped zone / q_max^2
};

struct DynamicsConfig {
    std::size_t photons = 1;
    std::vector<cplx> initial; ///< empty: all photons in mode 0
    std::vector<double> taus{0.0, 0.5, 1.0, 1.5, 2.0};
    EvolutionMethod method = EvolutionMethod::automatic;
    double tol = 1e-12;
    HamiltonianForm form = HamiltonianForm::lg_diagonal;
    std::optional<double> interaction_time;
    std::vector<std::size_t> correlator_modes;
    std::vector<long> correlator_offsets{0};
    std::size_t fock_cap = FockBasis::default_cap;
    /// Optional explicit single-photon Hamiltonian (overrides the derived one).
    std::optional<Eigen::MatrixXcd> theta;
    std::optional<Eigen::MatrixXcd> interaction; ///< LG-form U_nk
};

struct RunConfig {
    BasisSpec basis;
    GeometryConfig geometry;
    QuadratureConfig quadrature;
    std::vector<double> deltas{0.001, 0.01, 0.02, 0.05}; ///< Delta / q_max^2
    bool exact_hopping = false;
    DynamicsConfig dynamics;
    std::string output_dir = "out";
    bool write_tensors = false;
    std::uint64_t seed = 0;
    std::string preset;

    [[nodiscard]] PvConfig pv() const
    {
        PvConfig c;
        c.epsilon_rel = quadrature.epsilon_pv;
        c.near_width_rel = quadrature.near_width;
        return c;
    }
};

inline const char* to_string(GeometryKind k)
{
    switch (k) {
    case GeometryKind::cylinder: return "cylinder";
    case GeometryKind::ring: return "ring";
    case GeometryKind::inline_architecture: return "inline";
    case GeometryKind::file: return "file";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// JSON reading

namespace detail {

class ObjectReader {
public:
    ObjectReader(const nlohmann::json& j, std::string where) : j_(j), where_(std::move(where))
    {
        if (!j_.is_object()) throw SchemaError(where_ + ": expected an object");
    }

    ~ObjectReader() = default;

    /// Call after reading: any key not requested is an error.
    void finish() const
    {
        for (const auto& item : j_.items())
            if (!seen_.count(item.key()))
                throw SchemaError(where_ + ": unknown key '" + item.key() + "'");
    }

    [[nodiscard]] bool has(const std::string& key)
    {
        seen_.insert(key);
        return j_.contains(key);
    }

    [[nodiscard]] const nlohmann::json& at(const std::string& key) const { return j_.at(key); }
    [[nodiscard]] std::string path(const std::string& key) const { return where_ + "." + key; }

    void number(const std::string& key, double& out)
    {
        if (!has(key)) return;
        const auto& v = j_.at(key);
        if (!v.is_number()) throw SchemaError(path(key) + ": expected a number");
        out = v.get<double>();
    }

    template <class Int>
    void integer(const std::string& key, Int& out)
    {
        if (!has(key)) return;
        const auto& v = j_.at(key);
        if (!v.is_number_integer()) throw SchemaError(path(key) + ": expected an integer");
        if constexpr (std::is_unsigned_v<Int>) {
            if (v.get<long long>() < 0) throw SchemaError(path(key) + ": expected a non-negative integer");
        }
        out = v.get<Int>();
    }

    void boolean(const std::string& key, bool& out)
    {
        if (!has(key)) return;
        const auto& v = j_.at(key);
        if (!v.is_boolean()) throw SchemaError(path(key) + ": expected true or false");
        out = v.get<bool>();
    }

    void string(const std::string& key, std::string& out)
    {
        if (!has(key)) return;
        const auto& v = j_.at(key);
        if (!v.is_string()) throw SchemaError(path(key) + ": expected a string");
        out = v.get<std::string>();
    }

    void numbers(const std::string& key, std::vector<double>& out)
    {
        if (!has(key)) return;
        const auto& v = j_.at(key);
        if (!v.is_array()) throw SchemaError(path(key) + ": expected an array of numbers");
        out.clear();
        for (const auto& x : v) {
            if (!x.is_number()) throw SchemaError(path(key) + ": expected an array of numbers");
            out.push_back(x.get<double>());
        }
    }

private:
    const nlohmann::json& j_;
    std::string where_;
    std::set<std::string> seen_;
};

/// A complex number is a number or a [re, im] pair.
inline cplx complex_from_json(const nlohmann::json& v, const std::string& where)
{
    if (v.is_number()) return {v.get<double>(), 0.0};
    if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
        return {v[0].get<double>(), v[1].get<double>()};
    throw SchemaError(where + ": expected a number or a [re, im] pair");
}

inline nlohmann::json complex_to_json(cplx c)
{
    if (c.imag() == 0.0) return c.real();
    return nlohmann::json::array({c.real(), c.imag()});
}

inline Eigen::MatrixXcd matrix_from_json(const nlohmann::json& v, const std::string& where)
{
    if (!v.is_array() || v.empty()) throw SchemaError(where + ": expected a non-empty array of rows");
    const auto rows = static_cast<Eigen::Index>(v.size());
    Eigen::MatrixXcd m(rows, rows);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const auto& row = v[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != rows)
            throw SchemaError(where + ": expected a square matrix");
        for (Eigen::Index j = 0; j < rows; ++j)
            m(i, j) = complex_from_json(row[static_cast<std::size_t>(j)],
                                        where + "[" + std::to_string(i) + "][" + std::to_string(j) + "]");
    }
    return m;
}

inline nlohmann::json matrix_to_json(const Eigen::MatrixXcd& m)
{
    auto out = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        auto row = nlohmann::json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(complex_to_json(m(i, j)));
        out.push_back(row);
    }
    return out;
}

inline EvolutionMethod method_from_string(const std::string& s, const std::string& where)
{
    if (s == "auto") return EvolutionMethod::automatic;
    if (s == "dense_eig") return EvolutionMethod::dense_eig;
    if (s == "krylov") return EvolutionMethod::krylov;
    throw SchemaError(where + ": expected one of auto, dense_eig, krylov");
}

} // namespace detail

inline void validate(const RunConfig& c)
{
    try {
        c.basis.validate();
    } catch (const DomainError& e) {
        throw SchemaError(e.what());
    }
    const auto& g = c.geometry;
    if (g.kind == GeometryKind::cylinder) {
        if (!(g.a_over_c >= 0.0) || !(g.a_over_c < g.b_over_c))
            throw SchemaError("geometry.cylinder: need 0 <= a_over_c < b_over_c");
        if (g.boundary_p < 0) throw SchemaError("geometry.cylinder.boundary_p: must be >= 0");
        if (!(g.boundary_fraction > 0.0 && g.boundary_fraction < 1.0))
            throw SchemaError("geometry.cylinder.boundary_fraction: must lie in (0, 1)");
    }
    if (g.kind == GeometryKind::ring && !(g.radius > 0.0))
        throw SchemaError("geometry.ring.radius: must be positive");
    if ((g.kind == GeometryKind::cylinder || g.kind == GeometryKind::ring) && g.count == 0)
        throw SchemaError("geometry: count must be >= 1");
    if (g.kind == GeometryKind::cylinder || g.kind == GeometryKind::ring) {
        if (!(g.omega0 > 0.0)) throw SchemaError("geometry: omega0 must be positive");
        if (!(g.orbital_width >= 0.0)) throw SchemaError("geometry: orbital_width must be >= 0");
        for (double gap : g.gaps)
            if (!(gap >= 0.0) || !std::isfinite(gap)) throw SchemaError("geometry: gaps must be finite and >= 0");
    }
    if (g.kind == GeometryKind::inline_architecture) g.architecture.validate();
    if (g.kind == GeometryKind::file && g.file.empty()) throw SchemaError("geometry.file: empty path");

    const auto& q = c.quadrature;
    if (q.n_r < 2 || q.n_theta < 2) throw SchemaError("quadrature: n_r and n_theta must be >= 2");
    if (!(q.epsilon_pv > 0.0 && q.epsilon_pv < 0.01))
        throw SchemaError("quadrature.epsilon_pv: must lie in (0, 0.01)");
    if (!(q.near_width > q.epsilon_pv && q.near_width < 1.0))
        throw SchemaError("quadrature.near_width: must lie in (epsilon_pv, 1)");
    for (double d : c.deltas)
        if (!(d >= 0.0) || !std::isfinite(d) || d >= 1.0)
            throw SchemaError("deltas: values are Delta / q_max^2 and must lie in [0, 1)");

    const auto& d = c.dynamics;
    for (std::size_t i = 0; i < d.taus.size(); ++i) {
        if (!(d.taus[i] >= 0.0) || !std::isfinite(d.taus[i])) throw SchemaError("dynamics.taus: must be >= 0");
        if (i > 0 && !(d.taus[i] > d.taus[i - 1]))
            throw SchemaError("dynamics.taus: must be strictly increasing");
    }
    if (!(d.tol > 0.0)) throw SchemaError("dynamics.tol: must be positive");
    if (d.interaction_time && !(*d.interaction_time >= 0.0))
        throw SchemaError("dynamics.interaction_time: must be >= 0");
    if (d.theta) {
        if (d.theta->rows() == 0) throw SchemaError("dynamics.hamiltonian.theta: empty");
        if (d.interaction && d.interaction->rows() != d.theta->rows())
            throw SchemaError("dynamics.hamiltonian: theta and interaction sizes differ");
    } else if (d.interaction) {
        throw SchemaError("dynamics.hamiltonian: interaction given without theta");
    }
    if (!d.initial.empty()) {
        double n = 0.0;
        for (const auto& v : d.initial) n += std::norm(v);
        if (!(n > 0.0)) throw SchemaError("dynamics.initial: coefficient vector is zero");
    }
    if (c.output_dir.empty()) throw SchemaError("output.dir: empty path");
    if (!c.preset.empty() && c.preset != "cylinder-fig4")
        throw SchemaError("preset: unknown preset '" + c.preset + "'");
}

inline RunConfig config_from_json(const nlohmann::json& j)
{
    RunConfig c;
    detail::ObjectReader top(j, "config");
    if (top.has("basis")) {
        detail::ObjectReader r(top.at("basis"), "basis");
        r.number("w0", c.basis.w0);
        r.number("k0", c.basis.k0);
        r.number("q_max", c.basis.q_max);
        r.integer("l_max", c.basis.l_max);
        r.integer("p_max", c.basis.p_max);
        std::string ordering = c.basis.ordering == ModeSet::full ? "full" : "radial";
        r.string("ordering", ordering);
        if (ordering == "full") c.basis.ordering = ModeSet::full;
        else if (ordering == "radial") c.basis.ordering = ModeSet::radial_sector;
        else throw SchemaError("basis.ordering: expected 'full' or 'radial'");
        r.finish();
    }
    if (top.has("geometry")) {
        detail::ObjectReader r(top.at("geometry"), "geometry");
        auto& g = c.geometry;
        auto shared = [&g](detail::ObjectReader& s) {
            s.integer("count", g.count);
            s.number("omega0", g.omega0);
            s.number("g_coh", g.g_coh);
            s.number("g_inc", g.g_inc);
            s.numbers("gaps", g.gaps);
            s.number("orbital_width", g.orbital_width);
        };
        int kinds = 0;
        if (r.has("cylinder")) {
            ++kinds;
            g.kind = GeometryKind::cylinder;
            detail::ObjectReader s(r.at("cylinder"), "geometry.cylinder");
            s.number("a_over_c", g.a_over_c);
            s.number("b_over_c", g.b_over_c);
            s.integer("boundary_p", g.boundary_p);
            s.number("boundary_fraction", g.boundary_fraction);
            shared(s);
            s.finish();
        }
        if (r.has("ring")) {
            ++kinds;
            g.kind = GeometryKind::ring;
            detail::ObjectReader s(r.at("ring"), "geometry.ring");
            s.number("radius", g.radius);
            shared(s);
            s.finish();
        }
        if (r.has("inline")) {
            ++kinds;
            g.kind = GeometryKind::inline_architecture;
            g.architecture = architecture_from_json(r.at("inline"));
        }
        if (r.has("file")) {
            ++kinds;
            g.kind = GeometryKind::file;
            r.string("file", g.file);
        }
        if (kinds != 1)
            throw SchemaError("geometry: give exactly one of 'cylinder', 'ring', 'inline', 'file'");
        r.finish();
    }
    if (top.has("quadrature")) {
        detail::ObjectReader r(top.at("quadrature"), "quadrature");
        r.integer("n_r", c.quadrature.n_r);
        r.integer("n_theta", c.quadrature.n_theta);
        r.number("epsilon_pv", c.quadrature.epsilon_pv);
        r.number("near_width", c.quadrature.near_width);
        r.finish();
    }
    top.numbers("deltas", c.deltas);
    if (top.has("hopping")) {
        detail::ObjectReader r(top.at("hopping"), "hopping");
        r.boolean("exact", c.exact_hopping);
        r.finish();
    }
    if (top.has("dynamics")) {
        detail::ObjectReader r(top.at("dynamics"), "dynamics");
        auto& d = c.dynamics;
        r.integer("photons", d.photons);
        if (r.has("initial")) {
            const auto& v = r.at("initial");
            if (!v.is_array()) throw SchemaError("dynamics.initial: expected an array");
            d.initial.clear();
            for (std::size_t i = 0; i < v.size(); ++i)
                d.initial.push_back(detail::complex_from_json(v[i], "dynamics.initial[" + std::to_string(i) + "]"));
        }
        r.numbers("taus", d.taus);
        if (r.has("linspace")) {
            const auto& v = r.at("linspace");
            if (!v.is_array() || v.size() != 3 || !v[0].is_number() || !v[1].is_number() ||
                !v[2].is_number_integer() || v[2].get<long long>() < 2)
                throw SchemaError("dynamics.linspace: expected [start, stop, count >= 2]");
            const double a = v[0].get<double>();
            const double b = v[1].get<double>();
            const auto n = v[2].get<std::size_t>();
            d.taus.clear();
            for (std::size_t i = 0; i < n; ++i)
                d.taus.push_back(a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
        }
        std::string method = to_string(d.method);
        r.string("method", method);
        d.method = detail::method_from_string(method, "dynamics.method");
        r.number("tol", d.tol);
        std::string form = to_string(d.form);
        r.string("form", form);
        if (form == "full") d.form = HamiltonianForm::full;
        else if (form == "lg_diagonal") d.form = HamiltonianForm::lg_diagonal;
        else throw SchemaError("dynamics.form: expected 'full' or 'lg_diagonal'");
        if (r.has("interaction_time")) {
            double t = 0.0;
            r.number("interaction_time", t);
            d.interaction_time = t;
        }
        if (r.has("correlators")) {
            detail::ObjectReader s(r.at("correlators"), "dynamics.correlators");
            if (s.has("modes")) {
                const auto& v = s.at("modes");
                if (!v.is_array()) throw SchemaError("dynamics.correlators.modes: expected an array");
                d.correlator_modes.clear();
                for (const auto& x : v) {
                    if (!x.is_number_integer() || x.get<long long>() < 0)
                        throw SchemaError("dynamics.correlators.modes: expected non-negative integers");
                    d.correlator_modes.push_back(x.get<std::size_t>());
                }
            }
            if (s.has("offsets")) {
                const auto& v = s.at("offsets");
                if (!v.is_array()) throw SchemaError("dynamics.correlators.offsets: expected an array");
                d.correlator_offsets.clear();
                for (const auto& x : v) {
                    if (!x.is_number_integer()) throw SchemaError("dynamics.correlators.offsets: expected integers");
                    d.correlator_offsets.push_back(x.get<long>());
                }
            }
            s.finish();
        }
        r.integer("fock_cap", d.fock_cap);
        if (r.has("hamiltonian")) {
            detail::ObjectReader s(r.at("hamiltonian"), "dynamics.hamiltonian");
            if (s.has("theta")) d.theta = detail::matrix_from_json(s.at("theta"), "dynamics.hamiltonian.theta");
            if (s.has("interaction"))
                d.interaction = detail::matrix_from_json(s.at("interaction"), "dynamics.hamiltonian.interaction");
            s.finish();
        }
        r.finish();
    }
    if (top.has("output")) {
        detail::ObjectReader r(top.at("output"), "output");
        r.string("dir", c.output_dir);
        r.boolean("write_tensors", c.write_tensors);
        r.finish();
    }
    top.integer("seed", c.seed);
    top.string("preset", c.preset);
    top.finish();
    return c;
}

/// Canonical JSON of the effective configuration (hashed into every sidecar).
inline nlohmann::json to_json(const RunConfig& c)
{
    nlohmann::json j;
    j["basis"] = {{"w0", c.basis.w0},
                  {"k0", c.basis.k0},
                  {"q_max", c.basis.q_max},
                  {"l_max", c.basis.l_max},
                  {"p_max", c.basis.p_max},
                  {"ordering", c.basis.ordering == ModeSet::full ? "full" : "radial"}};
    const auto& g = c.geometry;
    nlohmann::json shared = {{"count", g.count},        {"omega0", g.omega0}, {"g_coh", g.g_coh},
                             {"g_inc", g.g_inc},        {"gaps", g.gaps},     {"orbital_width", g.orbital_width}};
    switch (g.kind) {
    case GeometryKind::cylinder: {
        auto cyl = shared;
        cyl["a_over_c"] = g.a_over_c;
        cyl["b_over_c"] = g.b_over_c;
        cyl["boundary_p"] = g.boundary_p;
        cyl["boundary_fraction"] = g.boundary_fraction;
        j["geometry"] = {{"cylinder", cyl}};
        break;
    }
    case GeometryKind::ring: {
        auto ring = shared;
        ring["radius"] = g.radius;
        j["geometry"] = {{"ring", ring}};
        break;
    }
    case GeometryKind::inline_architecture: j["geometry"] = {{"inline", spc::to_json(g.architecture)}}; break;
    case GeometryKind::file: j["geometry"] = {{"file", g.file}}; break;
    }
    j["quadrature"] = {{"n_r", c.quadrature.n_r},
                       {"n_theta", c.quadrature.n_theta},
                       {"epsilon_pv", c.quadrature.epsilon_pv},
                       {"near_width", c.quadrature.near_width}};
    j["deltas"] = c.deltas;
    j["hopping"] = {{"exact", c.exact_hopping}};
    const auto& d = c.dynamics;
    nlohmann::json dyn = {{"photons", d.photons},
                          {"taus", d.taus},
                          {"method", to_string(d.method)},
                          {"tol", d.tol},
                          {"form", to_string(d.form)},
                          {"fock_cap", d.fock_cap},
                          {"correlators", {{"modes", d.correlator_modes}, {"offsets", d.correlator_offsets}}}};
    auto initial = nlohmann::json::array();
    for (const auto& v : d.initial) initial.push_back(detail::complex_to_json(v));
    dyn["initial"] = initial;
    if (d.interaction_time) dyn["interaction_time"] = *d.interaction_time;
    if (d.theta) {
        nlohmann::json h = {{"theta", detail::matrix_to_json(*d.theta)}};
        if (d.interaction) h["interaction"] = detail::matrix_to_json(*d.interaction);
        dyn["hamiltonian"] = h;
    }
    j["dynamics"] = dyn;
    j["output"] = {{"dir", c.output_dir}, {"write_tensors", c.write_tensors}};
    j["seed"] = c.seed;
    if (!c.preset.empty()) j["preset"] = c.preset;
    return j;
}

/// Hash of the effective configuration; the output directory is excluded so
/// that identical runs into different folders agree.
inline std::string config_hash(const RunConfig& c)
{
    auto j = to_json(c);
    j["output"].erase("dir");
    return fnv1a_hex(j.dump());
}

inline RunConfig parse_config(const std::string& text)
{
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        std::size_t line = 1;
        std::size_t col = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ParseError("config: syntax error at line " + std::to_string(line) + ", column " +
                         std::to_string(col));
    }
    return config_from_json(j);
}

inline RunConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw ParseError("config: cannot open " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

struct CliOverrides {
    std::optional<std::string> out;
    std::optional<std::uint64_t> seed;
    std::vector<double> deltas;
    std::optional<std::string> preset;
};

/// Applies a preset and command-line values on top of a file/default config.
inline void apply_overrides(RunConfig& c, const CliOverrides& o)
{
    if (o.preset) c.preset = *o.preset;
    if (c.preset == "cylinder-fig4") {
        c.basis.ordering = ModeSet::radial_sector;
        c.basis.l_max = 0;
        c.basis.p_max = 25;
        if (c.geometry.kind != GeometryKind::cylinder) c.geometry = GeometryConfig{};
    }
    if (o.out) c.output_dir = *o.out;
    if (o.seed) c.seed = *o.seed;
    if (!o.deltas.empty()) c.deltas = o.deltas;
}

} // namespace spc
