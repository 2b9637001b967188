// spc: command-line front end for the scattering-photon-coupling pipeline.
//
//   spc <basis-check|potential|hopping|assemble|evolve> [--config PATH]
//       [--out DIR] [--seed INT] [--delta FLOAT]... [--preset cylinder-fig4]
//
// Exit codes: 0 success, 2 config error, 3 convergence failure, 4 capacity,
// 1 anything else.

#include <cstdint>
#include <exception>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "spc/commands.hpp"

namespace {

enum ExitCode : int { ok = 0, other = 1, config_error = 2, convergence = 3, capacity = 4 };

int run(const std::string& name, const spc::RunConfig& cfg)
{
    static const std::map<std::string, std::function<spc::CommandResult(const spc::RunConfig&)>> table{
        {"basis-check", spc::cmd_basis_check}, {"potential", spc::cmd_potential}, {"hopping", spc::cmd_hopping},
        {"assemble", spc::cmd_assemble},       {"evolve", spc::cmd_evolve}};
    const auto res = table.at(name)(cfg);
    for (const auto& w : res.warnings) std::cerr << "warning: " << w << '\n';
    for (const auto& f : res.files) std::cout << f.string() << '\n';
    return ok;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Photon-mode coupling in scattering architectures"};
    app.require_subcommand(1, 1);

    std::optional<std::string> config_path;
    spc::CliOverrides overrides;
    std::optional<std::string> out;
    std::optional<std::uint64_t> seed;
    std::vector<double> deltas;
    std::optional<std::string> preset;

    const std::pair<const char*, const char*> commands[] = {
        {"basis-check", "orthonormality, completeness, power radius and attenuation tables"},
        {"potential", "four-mode scattering potential and its partial traces per delta"},
        {"hopping", "point-particle (and optionally exact) hopping matrices"},
        {"assemble", "effective Hamiltonian coefficients, full and n-n forms"},
        {"evolve", "fixed-photon-number dynamics: densities and correlators"}};
    for (const auto& [name, about] : commands) {
        auto* sub = app.add_subcommand(name, about);
        sub->add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
        sub->add_option("--out", out, "output directory");
        sub->add_option("--seed", seed, "RNG seed");
        sub->add_option("--delta", deltas, "delta / q_max^2 (repeatable)");
        sub->add_option("--preset", preset, "parameter preset")->check(CLI::IsMember({"cylinder-fig4"}));
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return config_error;
    }

    const std::string name = app.get_subcommands().front()->get_name();
    try {
        spc::RunConfig cfg = config_path ? spc::load_config(*config_path) : spc::RunConfig{};
        overrides.out = out;
        overrides.seed = seed;
        overrides.deltas = deltas;
        overrides.preset = preset;
        spc::apply_overrides(cfg, overrides);
        spc::validate(cfg);
        return run(name, cfg);
    } catch (const spc::ParseError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return config_error;
    } catch (const spc::SchemaError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return config_error;
    } catch (const spc::DimensionError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return config_error;
    } catch (const spc::DomainError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return config_error;
    } catch (const spc::ConvergenceError& e) {
        std::cerr << "convergence failure: " << e.what() << '\n';
        return convergence;
    } catch (const spc::CapacityError& e) {
        std::cerr << "capacity exceeded: " << e.what() << '\n';
        return capacity;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return other;
    }
}
