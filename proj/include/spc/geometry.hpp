#pragma once

// Scatterer architectures: generators and JSON persistence.
//
// Positions are transverse (x, y) in waist units. Gaps are the internal
// transition energies eps_ig; the scattering kernels use Delta_i = 2 omega0 eps_ig.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "spc/errors.hpp"
#include "spc/modes.hpp"

namespace spc {

struct Scatterer {
    Vec2 position;
    std::vector<double> gaps{1.0};
    double orbital_width = 0.0;

    friend bool operator==(const Scatterer&, const Scatterer&) = default;
};

struct Architecture {
    std::vector<Scatterer> scatterers;
    double omega0 = 1.0;
    double g_coh = 1.0;
    double g_inc = 1.0;
    std::string label;

    [[nodiscard]] std::size_t size() const { return scatterers.size(); }

    void validate() const
    {
        if (scatterers.empty()) throw SchemaError("architecture: at least one scatterer required");
        if (!(omega0 > 0.0)) throw SchemaError("architecture: omega0 must be positive");
        for (std::size_t i = 0; i < scatterers.size(); ++i) {
            const auto& s = scatterers[i];
            if (!std::isfinite(s.position.x) || !std::isfinite(s.position.y))
                throw SchemaError("scatterers[" + std::to_string(i) + "]: non-finite position");
            for (double gap : s.gaps)
                if (!std::isfinite(gap) || gap < 0.0)
                    throw SchemaError("scatterers[" + std::to_string(i) +
                                      "].gaps: gaps must be finite and >= 0");
            if (!(s.orbital_width >= 0.0))
                throw SchemaError("scatterers[" + std::to_string(i) +
                                  "].orbital_width: must be >= 0");
        }
    }

    friend bool operator==(const Architecture&, const Architecture&) = default;
};

/// Uniform double in [0, 1) from the top 53 bits of a 64-bit Mersenne Twister
/// draw. std::mt19937_64's sequence is fixed by the standard; the conversion
/// is ours so that samples are identical across standard libraries.
class UniformSource {
public:
    explicit UniformSource(std::uint64_t seed) : engine_(seed) {}

    double next() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

private:
    std::mt19937_64 engine_;
};

/// count scatterers area-uniformly distributed over the annulus a <= rho <= b.
inline Architecture gen_uniform_cylinder(double a, double b, std::size_t count, std::uint64_t seed)
{
    if (!(a >= 0.0) || !(a < b)) throw DomainError("gen_uniform_cylinder: need 0 <= a < b");
    if (count == 0) throw DomainError("gen_uniform_cylinder: count must be >= 1");
    UniformSource rng(seed);
    Architecture arch;
    arch.label = "uniform-cylinder";
    arch.scatterers.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const double u = rng.next();
        const double rho = std::sqrt(a * a + u * (b * b - a * a));
        const double phi = 2.0 * std::numbers::pi * rng.next();
        Scatterer s;
        s.position = {rho * std::cos(phi), rho * std::sin(phi)};
        arch.scatterers.push_back(s);
    }
    return arch;
}

/// count scatterers equally spaced on a ring, the first at (radius, 0).
inline Architecture gen_ring(double radius, std::size_t count)
{
    if (!(radius > 0.0)) throw DomainError("gen_ring: radius must be positive");
    if (count == 0) throw DomainError("gen_ring: count must be >= 1");
    Architecture arch;
    arch.label = "ring";
    for (std::size_t i = 0; i < count; ++i) {
        const double phi = 2.0 * std::numbers::pi * static_cast<double>(i) /
                           static_cast<double>(count);
        Scatterer s;
        s.position = {radius * std::cos(phi), radius * std::sin(phi)};
        arch.scatterers.push_back(s);
    }
    return arch;
}

// ---------------------------------------------------------------------------
// JSON persistence

inline nlohmann::json to_json(const Architecture& arch)
{
    nlohmann::json j;
    j["label"] = arch.label;
    j["omega0"] = arch.omega0;
    j["g_coh"] = arch.g_coh;
    j["g_inc"] = arch.g_inc;
    auto& list = j["scatterers"] = nlohmann::json::array();
    for (const auto& s : arch.scatterers) {
        list.push_back({{"x", s.position.x},
                        {"y", s.position.y},
                        {"gaps", s.gaps},
                        {"orbital_width", s.orbital_width}});
    }
    return j;
}

namespace detail {

inline double require_number(const nlohmann::json& obj, const char* key, const std::string& where)
{
    if (!obj.contains(key)) throw SchemaError(where + ": missing required key '" + key + "'");
    const auto& v = obj.at(key);
    if (!v.is_number()) throw SchemaError(where + "." + key + ": expected a number");
    return v.get<double>();
}

inline void reject_unknown(const nlohmann::json& obj, std::initializer_list<const char*> known,
                           const std::string& where)
{
    for (const auto& item : obj.items()) {
        bool ok = false;
        for (const char* k : known) ok = ok || item.key() == k;
        if (!ok) throw SchemaError(where + ": unknown key '" + item.key() + "'");
    }
}

} // namespace detail

inline Architecture architecture_from_json(const nlohmann::json& j)
{
    if (!j.is_object()) throw SchemaError("architecture: expected a JSON object");
    detail::reject_unknown(j, {"label", "omega0", "g_coh", "g_inc", "scatterers"}, "architecture");
    Architecture arch;
    if (j.contains("label")) {
        if (!j["label"].is_string()) throw SchemaError("architecture.label: expected a string");
        arch.label = j["label"].get<std::string>();
    }
    arch.omega0 = detail::require_number(j, "omega0", "architecture");
    arch.g_coh = detail::require_number(j, "g_coh", "architecture");
    arch.g_inc = detail::require_number(j, "g_inc", "architecture");
    if (!j.contains("scatterers") || !j["scatterers"].is_array())
        throw SchemaError("architecture: missing required array 'scatterers'");
    std::size_t i = 0;
    for (const auto& item : j["scatterers"]) {
        const std::string where = "scatterers[" + std::to_string(i++) + "]";
        if (!item.is_object()) throw SchemaError(where + ": expected an object");
        detail::reject_unknown(item, {"x", "y", "gaps", "orbital_width"}, where);
        Scatterer s;
        s.position = {detail::require_number(item, "x", where),
                      detail::require_number(item, "y", where)};
        if (!item.contains("gaps") || !item["gaps"].is_array())
            throw SchemaError(where + ": missing required array 'gaps'");
        s.gaps.clear();
        for (const auto& g : item["gaps"]) {
            if (!g.is_number()) throw SchemaError(where + ".gaps: expected numbers");
            s.gaps.push_back(g.get<double>());
        }
        s.orbital_width = item.contains("orbital_width")
                              ? detail::require_number(item, "orbital_width", where)
                              : 0.0;
        arch.scatterers.push_back(std::move(s));
    }
    arch.validate();
    return arch;
}

/// Parses architecture JSON text; syntax errors report line and column.
inline Architecture parse_architecture(const std::string& text)
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
        throw ParseError("architecture: syntax error at line " + std::to_string(line) +
                         ", column " + std::to_string(col) + ": " + e.what());
    }
    return architecture_from_json(j);
}

inline Architecture load_architecture(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw ParseError("architecture: cannot open " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_architecture(buf.str());
}

inline void save_architecture(const Architecture& arch, const std::filesystem::path& path)
{
    arch.validate();
    std::ofstream out(path);
    if (!out) throw std::runtime_error("architecture: cannot write " + path.string());
    out << to_json(arch).dump(2) << '\n';
}

} // namespace spc
