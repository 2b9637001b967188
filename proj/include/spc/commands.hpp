#pragma once

// The five pipeline commands. Each writes CSV files plus .meta.json sidecars
// into the configured output directory and returns what it wrote.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "spc/config.hpp"
#include "spc/evolution.hpp"
#include "spc/exact_hopping.hpp"
#include "spc/fock.hpp"
#include "spc/geometry.hpp"
#include "spc/hopping.hpp"
#include "spc/interaction.hpp"
#include "spc/io.hpp"
#include "spc/modes.hpp"
#include "spc/potential.hpp"

namespace spc {

struct CommandResult {
    std::vector<std::filesystem::path> files;
    std::vector<std::string> warnings;
};

/// Annulus pairs (a/c, b/c) swept by the cylinder preset.
inline const std::vector<std::pair<double, double>>& cylinder_fig4_pairs()
{
    static const std::vector<std::pair<double, double>> pairs{{0.1, 0.9}, {0.2, 0.8}, {0.4, 1.0}, {0.4, 0.6}};
    return pairs;
}

/// Exact hopping is quadratic in scatterers and cubic in quadrature; capped.
inline constexpr std::size_t exact_hopping_max_scatterers = 64;

namespace detail {

class OutputContext {
public:
    OutputContext(const RunConfig& cfg, std::string command)
        : dir_(cfg.output_dir), command_(std::move(command)), hash_(config_hash(cfg)), seed_(cfg.seed)
    {
        std::filesystem::create_directories(dir_);
    }

    [[nodiscard]] const std::filesystem::path& dir() const { return dir_; }

    [[nodiscard]] nlohmann::json meta(nlohmann::json extra = nlohmann::json::object()) const
    {
        extra["command"] = command_;
        extra["config_hash"] = hash_;
        extra["seed"] = seed_;
        extra["versions"] = version_info();
        return extra;
    }

    void matrix(CommandResult& r, const std::string& stem, const Eigen::MatrixXd& m, const nlohmann::json& extra)
    {
        const auto path = dir_ / (stem + ".csv");
        write_matrix_csv(path, m);
        write_sidecar(path, meta(extra));
        r.files.push_back(path);
    }

    void complex_matrix(CommandResult& r, const std::string& stem, const Eigen::MatrixXcd& m,
                        const nlohmann::json& extra)
    {
        for (const auto& path : write_complex_matrix_csv(dir_, stem, m)) {
            write_sidecar(path, meta(extra));
            r.files.push_back(path);
        }
    }

    void sidecar(CommandResult& r, const std::filesystem::path& path, const nlohmann::json& extra)
    {
        write_sidecar(path, meta(extra));
        r.files.push_back(path);
    }

private:
    std::filesystem::path dir_;
    std::string command_;
    std::string hash_;
    std::uint64_t seed_;
};

inline nlohmann::json basis_json(const BasisSpec& b)
{
    return {{"w0", b.w0}, {"k0", b.k0}, {"q_max", b.q_max}, {"l_max", b.l_max}, {"p_max", b.p_max},
            {"ordering", to_string(b.ordering)}, {"modes", b.mode_count()}};
}

inline nlohmann::json grid_json(const RunConfig& cfg)
{
    return {{"N_r", cfg.quadrature.n_r}, {"N_theta", cfg.quadrature.n_theta}};
}

inline std::string tag(double v) { return format_number(v); }

} // namespace detail

/// Boundary radius c of the cylinder geometry.
inline double boundary_radius(const RunConfig& cfg)
{
    return power_radius({0, cfg.geometry.boundary_p}, cfg.geometry.boundary_fraction, cfg.basis);
}

/// Architecture for the configured geometry; cylinder radii may be overridden.
inline Architecture build_architecture(const RunConfig& cfg, std::optional<std::pair<double, double>> annulus = {})
{
    const auto& g = cfg.geometry;
    Architecture arch;
    switch (g.kind) {
    case GeometryKind::inline_architecture: return g.architecture;
    case GeometryKind::file: return load_architecture(g.file);
    case GeometryKind::cylinder: {
        const auto [a, b] = annulus.value_or(std::pair{g.a_over_c, g.b_over_c});
        const double c = boundary_radius(cfg);
        arch = gen_uniform_cylinder(a * c, b * c, g.count, cfg.seed);
        break;
    }
    case GeometryKind::ring: arch = gen_ring(g.radius, g.count); break;
    }
    arch.omega0 = g.omega0;
    arch.g_coh = g.g_coh;
    arch.g_inc = g.g_inc;
    for (auto& s : arch.scatterers) {
        s.gaps = g.gaps;
        s.orbital_width = g.orbital_width;
    }
    arch.validate();
    return arch;
}

// ---------------------------------------------------------------------------
// basis-check

inline CommandResult cmd_basis_check(const RunConfig& cfg)
{
    CommandResult res;
    detail::OutputContext out(cfg, "basis-check");
    const auto& spec = cfg.basis;
    const auto modes = enumerate_modes(spec);
    const auto grid = make_grid(spec, cfg.quadrature.n_r, cfg.quadrature.n_theta);
    const Eigen::MatrixXcd gram = momentum_gram(modes, spec, grid);
    const auto m = gram.rows();
    const Eigen::MatrixXd resid = (gram - Eigen::MatrixXcd::Identity(m, m)).cwiseAbs();
    const double gram_max = resid.maxCoeff();
    out.matrix(res, "gram_residual", resid,
               {{"basis", detail::basis_json(spec)}, {"grid", detail::grid_json(cfg)}, {"max_residual", gram_max}});

    // Completeness at reproducible sample points |q| <= 3/w0, |rho| <= 1.5 w0.
    {
        const auto path = out.dir() / "completeness.csv";
        CsvWriter w(path);
        w.row({"q_x", "q_y", "rho_x", "rho_y", "residual"});
        UniformSource rng(cfg.seed);
        double mean = 0.0;
        const int samples = 16;
        for (int i = 0; i < samples; ++i) {
            const Vec2 q{(2.0 * rng.next() - 1.0) * 3.0 / spec.w0, (2.0 * rng.next() - 1.0) * 3.0 / spec.w0};
            const Vec2 rho{(2.0 * rng.next() - 1.0) * 1.5 * spec.w0, (2.0 * rng.next() - 1.0) * 1.5 * spec.w0};
            const double r = completeness_residual(spec, q, rho);
            mean += r / samples;
            w.row({format_number(q.x), format_number(q.y), format_number(rho.x), format_number(rho.y),
                   format_number(r)});
        }
        out.sidecar(res, path, {{"basis", detail::basis_json(spec)}, {"mean_residual", mean}});
    }

    const double c = boundary_radius(cfg);
    {
        const auto path = out.dir() / "power_radius.csv";
        CsvWriter w(path);
        w.row({"l", "p", "fraction", "radius"});
        std::vector<ModeIndex> rows{{0, 0}, {0, 5}, {0, 10}, {0, 25}};
        if (std::find(rows.begin(), rows.end(), ModeIndex{0, cfg.geometry.boundary_p}) == rows.end())
            rows.push_back({0, cfg.geometry.boundary_p});
        for (const auto& mi : rows) {
            const double r = power_radius(mi, cfg.geometry.boundary_fraction, spec);
            w.row({std::to_string(mi.l), std::to_string(mi.p), format_number(cfg.geometry.boundary_fraction),
                   format_number(r)});
        }
        out.sidecar(res, path, {{"boundary_radius_c", c}, {"boundary_mode", {{"l", 0}, {"p", cfg.geometry.boundary_p}}}});
    }
    {
        const auto path = out.dir() / "attenuation.csv";
        CsvWriter w(path);
        w.row({"l", "p", "factor"});
        for (int l = 1; l <= 3; ++l)
            for (int p = 1; p <= 3; ++p)
                w.row({std::to_string(l), std::to_string(p), format_number(attenuation_factor_decades(l, p))});
        out.sidecar(res, path, {{"definition", "q_max = 10^-p k0, dz = 10^l wavelengths"}});
    }
    {
        const auto path = out.dir() / "basis_check.csv";
        CsvWriter w(path);
        w.row({"quantity", "value"});
        w.row({"gram_max_residual", format_number(gram_max)});
        w.row({"boundary_radius_c", format_number(c)});
        w.row({"attenuation_l2_p2", format_number(attenuation_factor_decades(2, 2))});
        w.row({"paraxiality", format_number(spec.paraxiality())});
        out.sidecar(res, path, {{"basis", detail::basis_json(spec)}});
    }
    if (!(gram_max < 1e-8))
        throw ConvergenceError("basis-check: Gram residual " + format_number(gram_max) +
                               " exceeds 1e-8; increase quadrature.n_r / n_theta or q_max");
    return res;
}

// ---------------------------------------------------------------------------
// potential

/// Anti-diagonal through the centre of a square matrix: (offset = k - m, value).
inline std::vector<std::pair<long, double>> antidiagonal_crossection(const Eigen::MatrixXd& a)
{
    const long n = a.rows();
    const long c = (n - 1) / 2;
    const long reach = std::min(c, n - 1 - c);
    std::vector<std::pair<long, double>> out;
    for (long j = -reach; j <= reach; ++j) out.emplace_back(2 * j, a(c - j, c + j));
    return out;
}

inline CommandResult cmd_potential(const RunConfig& cfg)
{
    CommandResult res;
    detail::OutputContext out(cfg, "potential");
    const auto& spec = cfg.basis;
    const auto grid = make_grid(spec, cfg.quadrature.n_r, cfg.quadrature.n_theta);
    const auto fine = refined_radially(grid);
    const auto pv = cfg.pv();
    const double q2 = spec.q_max * spec.q_max;

    const auto summary_path = out.dir() / "potential_summary.csv";
    const auto cross_path = out.dir() / "crossection.csv";
    CsvWriter summary(summary_path);
    summary.row({"delta_over_qmax2", "off_diagonal_ratio_nm", "off_diagonal_ratio_kl", "bandwidth_mk",
                 "mean_abs_diagonal_mk", "eps_halved_delta", "nr_doubled_delta"});
    CsvWriter cross(cross_path);
    cross.row({"delta_over_qmax2", "offset", "value"});
    nlohmann::json convergence = nlohmann::json::object();

    for (double d : cfg.deltas) {
        const double delta = d * q2;
        const auto v = scattering_potential(spec, delta, grid, pv);
        double eps_delta = 0.0;
        double nr_delta = 0.0;
        const double scale = v.entries.max_abs();
        if (scale > 0.0) {
            eps_delta = max_abs_diff(v.entries, scattering_potential(spec, delta, grid, pv.halved()).entries) / scale;
            nr_delta = max_abs_diff(v.entries, scattering_potential(spec, delta, fine, pv).entries) / scale;
        }
        if (eps_delta > 1e-2 || nr_delta > 1e-2)
            res.warnings.push_back("potential at delta/q_max^2 = " + detail::tag(d) +
                                   " not converged (eps-halving " + format_number(eps_delta) + ", N_r-doubling " +
                                   format_number(nr_delta) + ")");
        const Eigen::MatrixXd vnm = trace_last_pair(v.entries);
        const Eigen::MatrixXd vkl = trace_first_pair(v.entries);
        const Eigen::MatrixXd vmk = trace_outer_pair(v.entries);
        const nlohmann::json meta = {{"dims", {vmk.rows(), vmk.cols()}},
                                     {"delta_over_qmax2", d},
                                     {"epsilon_pv", cfg.quadrature.epsilon_pv},
                                     {"grid", detail::grid_json(cfg)},
                                     {"basis", detail::basis_json(spec)},
                                     {"hermiticity_defect", 0.0},
                                     {"convergence", {{"nr_doubled_delta", nr_delta}, {"eps_halved_delta", eps_delta}}}};
        const std::string t = detail::tag(d);
        out.matrix(res, "v_mk_d" + t, vmk, meta);
        out.matrix(res, "v_nm_d" + t, vnm, meta);
        out.matrix(res, "v_kl_d" + t, vkl, meta);
        summary.row({t, format_number(off_diagonal_ratio(vnm)), format_number(off_diagonal_ratio(vkl)),
                     std::to_string(half_max_bandwidth(vmk)), format_number(mean_abs_diagonal(vmk)),
                     format_number(eps_delta), format_number(nr_delta)});
        for (const auto& [offset, value] : antidiagonal_crossection(vmk))
            cross.row({t, std::to_string(offset), format_number(value)});
        convergence[t] = {{"nr_doubled_delta", nr_delta}, {"eps_halved_delta", eps_delta}};
    }
    const nlohmann::json meta = {{"deltas_over_qmax2", cfg.deltas},
                                 {"epsilon_pv", cfg.quadrature.epsilon_pv},
                                 {"grid", detail::grid_json(cfg)},
                                 {"basis", detail::basis_json(spec)},
                                 {"convergence", convergence},
                                 {"warnings", res.warnings}};
    out.sidecar(res, summary_path, meta);
    out.sidecar(res, cross_path, meta);
    return res;
}

// ---------------------------------------------------------------------------
// hopping

inline CommandResult cmd_hopping(const RunConfig& cfg)
{
    CommandResult res;
    detail::OutputContext out(cfg, "hopping");
    const auto& spec = cfg.basis;

    struct Job {
        std::string prefix;
        std::optional<std::pair<double, double>> annulus;
    };
    std::vector<Job> jobs;
    if (cfg.preset == "cylinder-fig4") {
        for (const auto& pr : cylinder_fig4_pairs())
            jobs.push_back({"cyl_a" + detail::tag(pr.first) + "_b" + detail::tag(pr.second) + "_", pr});
    } else {
        jobs.push_back({"", std::nullopt});
    }

    const auto summary_path = out.dir() / "hopping_summary.csv";
    CsvWriter summary(summary_path);
    summary.row({"label", "scatterers", "coh_norm", "inc_norm", "coh_over_inc", "block_first", "block_last",
                 "block_extent", "flanked", "neighbour_mean", "hermiticity_defect_total"});

    for (const auto& job : jobs) {
        const auto arch = build_architecture(cfg, job.annulus);
        const auto coh = hopping_coherent_pp(arch, spec);
        const auto inc = hopping_incoherent_pp(arch, spec);
        const auto total = hopping_total(arch.omega0, coh, inc);
        const auto blk = half_max_diagonal_block(inc.entries);
        const double defect = hermiticity_defect(total.entries);
        nlohmann::json meta = {{"dims", {total.dim(), total.dim()}},
                               {"basis", detail::basis_json(spec)},
                               {"scatterers", arch.size()},
                               {"geometry", to_string(cfg.geometry.kind)},
                               {"hermiticity_defect", defect}};
        if (cfg.geometry.kind == GeometryKind::cylinder) {
            const auto [a, b] = job.annulus.value_or(std::pair{cfg.geometry.a_over_c, cfg.geometry.b_over_c});
            meta["a_over_c"] = a;
            meta["b_over_c"] = b;
            meta["boundary_radius_c"] = boundary_radius(cfg);
        }
        auto m_coh = meta;
        m_coh["kind"] = "coherent";
        m_coh["hermiticity_defect"] = hermiticity_defect(coh.entries);
        auto m_inc = meta;
        m_inc["kind"] = "incoherent";
        m_inc["hermiticity_defect"] = hermiticity_defect(inc.entries);
        m_inc["positive_block"] = {{"first", blk.first}, {"last", blk.last}, {"flanked", blk.flanked()}};
        auto m_tot = meta;
        m_tot["kind"] = "total";
        out.complex_matrix(res, job.prefix + "theta_coh", coh.entries, m_coh);
        out.complex_matrix(res, job.prefix + "theta_inc", inc.entries, m_inc);
        out.complex_matrix(res, job.prefix + "theta_total", total.entries, m_tot);

        if (cfg.exact_hopping) {
            if (arch.size() > exact_hopping_max_scatterers)
                throw CapacityError("exact hopping: " + std::to_string(arch.size()) + " scatterers exceed the cap of " +
                                    std::to_string(exact_hopping_max_scatterers));
            const auto grid = make_grid(spec, cfg.quadrature.n_r, cfg.quadrature.n_theta);
            const auto fine = refined_radially(grid);
            const auto pv = cfg.pv();
            const auto ecoh = hopping_coherent_exact(arch, spec, grid, pv);
            const auto einc = hopping_incoherent_exact(arch, spec, grid, pv);
            const double coh_nr = relative_change(ecoh.entries, hopping_coherent_exact(arch, spec, fine, pv).entries);
            const double inc_nr = relative_change(einc.assembled(), hopping_incoherent_exact(arch, spec, fine, pv).assembled());
            if (coh_nr > 1e-2 || inc_nr > 1e-2)
                res.warnings.push_back(job.prefix + "exact hopping not converged under N_r doubling (coherent " +
                                       format_number(coh_nr) + ", incoherent " + format_number(inc_nr) + ")");
            auto m_ex = meta;
            m_ex["epsilon_pv"] = cfg.quadrature.epsilon_pv;
            m_ex["grid"] = detail::grid_json(cfg);
            auto m_ecoh = m_ex;
            m_ecoh["kind"] = "coherent_exact";
            m_ecoh["hermiticity_defect"] = hermiticity_defect(ecoh.entries);
            m_ecoh["convergence"] = {{"nr_doubled_delta", coh_nr}};
            m_ecoh["correlation_with_point_particle"] = direction_correlation(ecoh.entries, coh.entries);
            auto m_einc = m_ex;
            m_einc["kind"] = "incoherent_exact_assembled";
            m_einc["hermiticity_defect"] = hermiticity_defect(einc.assembled());
            m_einc["convergence"] = {{"nr_doubled_delta", inc_nr}};
            m_einc["correlation_with_point_particle"] = direction_correlation(einc.assembled(), inc.entries);
            out.complex_matrix(res, job.prefix + "theta_coh_exact", ecoh.entries, m_ecoh);
            out.complex_matrix(res, job.prefix + "theta_inc_exact", einc.assembled(), m_einc);
            m_einc["kind"] = "incoherent_exact_plus";
            out.complex_matrix(res, job.prefix + "theta_inc_exact_plus", einc.plus.entries, m_einc);
            m_einc["kind"] = "incoherent_exact_minus";
            out.complex_matrix(res, job.prefix + "theta_inc_exact_minus", einc.minus.entries, m_einc);
        }

        const double ninc = inc.entries.norm();
        const double ncoh = coh.entries.norm();
        summary.row({job.prefix.empty() ? std::string("config") : job.prefix.substr(0, job.prefix.size() - 1),
                     std::to_string(arch.size()), format_number(ncoh), format_number(ninc),
                     format_number(ninc > 0.0 ? ncoh / ninc : 0.0), std::to_string(blk.first),
                     std::to_string(blk.last), std::to_string(blk.extent()), blk.flanked() ? "1" : "0",
                     format_number(blk.neighbour_mean), format_number(defect)});
    }
    out.sidecar(res, summary_path, {{"basis", detail::basis_json(spec)}, {"warnings", res.warnings}});
    return res;
}

// ---------------------------------------------------------------------------
// assemble

struct AssembledModel {
    Architecture arch;
    HoppingMatrix theta;       ///< total
    HoppingMatrix incoherent;
    ScatteringPotential potential;
    StructuralTensor structure;
    ComplexTensor4 u;
    LgReduction lg;
    ConfinementDomains domains;
};

inline AssembledModel assemble_model(const RunConfig& cfg)
{
    AssembledModel m;
    const auto& spec = cfg.basis;
    m.arch = build_architecture(cfg);
    const auto coh = hopping_coherent_pp(m.arch, spec);
    m.incoherent = hopping_incoherent_pp(m.arch, spec);
    m.theta = hopping_total(m.arch.omega0, coh, m.incoherent);
    const auto grid = make_grid(spec, cfg.quadrature.n_r, cfg.quadrature.n_theta);
    std::vector<double> deltas;
    for (double d : cfg.deltas) deltas.push_back(d * spec.q_max * spec.q_max);
    m.potential = scattering_potential(spec, deltas, grid, cfg.pv());
    m.structure = structural_tensor(m.arch, spec);
    m.u = interaction_tensor(m.structure, m.potential);
    m.lg = reduce_lg_diagonal(m.u);
    m.domains = confinement_domains(m.incoherent, m.potential.entries);
    return m;
}

/// Keeps only U(n, n, k, k).
inline ComplexTensor4 delta_reduced(const ComplexTensor4& u)
{
    ComplexTensor4 out(u.side());
    for (std::size_t n = 0; n < u.side(); ++n)
        for (std::size_t k = 0; k < u.side(); ++k) out(n, n, k, k) = u(n, n, k, k);
    return out;
}

inline CommandResult cmd_assemble(const RunConfig& cfg)
{
    CommandResult res;
    detail::OutputContext out(cfg, "assemble");
    const auto model = assemble_model(cfg);
    const auto h_lg = assemble_hamiltonian(model.theta, model.lg.u);
    const auto h_full = assemble_hamiltonian(model.theta, model.u);
    const auto h_uc = uniform_cylinder_hamiltonian(model.theta, model.lg.u, model.domains);

    // Ordering diagnostic: full-form operator string on the delta-reduced
    // tensor against the n n form, on the configured photon sector.
    double ordering_difference = 0.0;
    {
        const std::size_t photons = std::max<std::size_t>(cfg.dynamics.photons, 2);
        try {
            const FockBasis basis(model.theta.dim(), photons, cfg.dynamics.fock_cap);
            const auto a = hamiltonian_matrix(assemble_hamiltonian(model.theta, delta_reduced(model.u)), basis);
            const auto b = hamiltonian_matrix(h_lg, basis);
            const SparseMatrixC diff = a - b;
            ordering_difference = max_abs(diff);
        } catch (const CapacityError& e) {
            res.warnings.push_back(std::string("ordering diagnostic skipped: ") + e.what());
        }
    }

    const nlohmann::json common = {{"dims", {model.theta.dim(), model.theta.dim()}},
                                   {"basis", detail::basis_json(cfg.basis)},
                                   {"scatterers", model.arch.size()},
                                   {"deltas_over_qmax2", cfg.deltas},
                                   {"epsilon_pv", cfg.quadrature.epsilon_pv},
                                   {"grid", detail::grid_json(cfg)}};
    auto m_theta = common;
    m_theta["hermiticity_defect"] = h_lg.hopping_defect;
    out.complex_matrix(res, "theta_total", model.theta.entries, m_theta);
    auto m_u = common;
    m_u["hermiticity_defect"] = h_lg.interaction_defect;
    m_u["discarded_weight"] = model.lg.discarded_weight;
    out.complex_matrix(res, "u_lg", model.lg.u, m_u);
    auto m_uc = common;
    m_uc["domains"] = {{"D_h", {model.domains.first, model.domains.last}}, {"D_delta_bandwidth", model.domains.bandwidth}};
    m_uc["hermiticity_defect"] = h_uc.hermiticity_defect();
    out.complex_matrix(res, "theta_uc", h_uc.theta.entries, m_uc);
    out.complex_matrix(res, "u_uc", h_uc.reduced, m_uc);
    if (cfg.write_tensors) {
        const auto path = out.dir() / "u_full.csv";
        write_tensor_csv(path, model.u);
        auto m_t = common;
        m_t["hermiticity_defect"] = h_full.interaction_defect;
        out.sidecar(res, path, m_t);
    }

    const auto path = out.dir() / "assemble_summary.csv";
    CsvWriter w(path);
    w.row({"quantity", "value"});
    w.row({"hopping_hermiticity_defect", format_number(h_lg.hopping_defect)});
    w.row({"interaction_defect_lg", format_number(h_lg.interaction_defect)});
    w.row({"interaction_defect_full", format_number(h_full.interaction_defect)});
    w.row({"discarded_weight", format_number(model.lg.discarded_weight)});
    w.row({"structural_min_eigenvalue", format_number(structural_min_eigenvalue(model.structure))});
    w.row({"ordering_difference", format_number(ordering_difference)});
    w.row({"D_h_first", std::to_string(model.domains.first)});
    w.row({"D_h_last", std::to_string(model.domains.last)});
    w.row({"D_delta_bandwidth", std::to_string(model.domains.bandwidth)});
    auto m_s = common;
    m_s["warnings"] = res.warnings;
    out.sidecar(res, path, m_s);
    return res;
}

// ---------------------------------------------------------------------------
// evolve

inline CommandResult cmd_evolve(const RunConfig& cfg)
{
    CommandResult res;
    detail::OutputContext out(cfg, "evolve");
    const auto& dyn = cfg.dynamics;

    EffectiveHamiltonian h;
    if (dyn.theta) {
        const auto m = dyn.theta->rows();
        const Eigen::MatrixXcd u = dyn.interaction ? *dyn.interaction : Eigen::MatrixXcd::Zero(m, m);
        h = assemble_hamiltonian(HoppingMatrix{*dyn.theta, HoppingKind::total}, u);
    } else {
        const auto model = assemble_model(cfg);
        h = dyn.form == HamiltonianForm::full ? assemble_hamiltonian(model.theta, model.u)
                                              : assemble_hamiltonian(model.theta, model.lg.u);
    }
    const std::size_t modes = h.modes();
    auto basis = std::make_shared<const FockBasis>(modes, dyn.photons, dyn.fock_cap);
    for (std::size_t r : dyn.correlator_modes)
        if (r >= modes) throw SchemaError("dynamics.correlators.modes: index " + std::to_string(r) + " >= M");

    std::vector<cplx> c = dyn.initial;
    if (c.empty()) {
        c.assign(modes, cplx{});
        c[0] = 1.0;
    }
    if (c.size() != modes)
        throw SchemaError("dynamics.initial: length " + std::to_string(c.size()) + " differs from M = " +
                          std::to_string(modes));
    const auto s0 = prepare_product_state(c, basis);

    const auto hmat = hamiltonian_matrix(h, *basis);
    const double commutator = number_commutator(hmat, *basis);
    KrylovOptions kopt;
    kopt.tol = dyn.tol;
    Evolver full(hmat, dyn.method, kopt);
    std::optional<Evolver> hopping;
    Propagator prop = make_propagator(full);
    if (dyn.interaction_time) {
        const auto hop = assemble_hamiltonian(h.theta, Eigen::MatrixXcd(Eigen::MatrixXcd::Zero(
                                                           static_cast<Eigen::Index>(modes), static_cast<Eigen::Index>(modes))));
        hopping.emplace(hamiltonian_matrix(hop, *basis), dyn.method, kopt);
        prop = make_quench_propagator(full, *hopping, *dyn.interaction_time);
    }

    ObservableSeries series;
    for (double tau : dyn.taus) {
        StateVector st{prop(s0.amplitudes, tau), basis};
        std::vector<std::pair<std::string, double>> row;
        double total = 0.0;
        for (std::size_t r = 0; r < modes; ++r) {
            const double n = density(st, r);
            total += n;
            row.emplace_back("n[" + std::to_string(r) + "]", n);
        }
        row.emplace_back("total", total);
        row.emplace_back("norm", st.norm());
        for (std::size_t r : dyn.correlator_modes) {
            for (long off : dyn.correlator_offsets) {
                const long t = static_cast<long>(r) + off;
                if (t < 0 || t >= static_cast<long>(modes)) continue;
                row.emplace_back("corr[" + std::to_string(r) + "][" + std::to_string(off) + "]",
                                 two_time_correlator(s0, prop, r, off, tau));
            }
            row.emplace_back("nonlocal[" + std::to_string(r) + "]", nonlocal_sum(s0, prop, r, tau));
        }
        series.push(tau, std::move(row));
    }

    const auto path = out.dir() / "series.csv";
    {
        CsvWriter w(path);
        w.row({"tau", "label", "value"});
        for (std::size_t i = 0; i < series.times.size(); ++i)
            for (const auto& [label, value] : series.values[i])
                w.row({format_number(series.times[i]), label, format_number(value)});
    }
    for (const auto& wmsg : full.warnings()) res.warnings.push_back(wmsg);
    if (hopping)
        for (const auto& wmsg : hopping->warnings()) res.warnings.push_back("post-quench: " + wmsg);
    nlohmann::json meta = {{"modes", modes},
                           {"photons", dyn.photons},
                           {"fock_dimension", basis->dim()},
                           {"method", to_string(full.method())},
                           {"tol", dyn.tol},
                           {"form", to_string(h.form)},
                           {"hermiticity_defect", full.hermiticity_defect_value()},
                           {"number_commutator", commutator},
                           {"warnings", res.warnings}};
    if (dyn.interaction_time) meta["interaction_time"] = *dyn.interaction_time;
    out.sidecar(res, path, meta);
    return res;
}

} // namespace spc
