// Command-line front end: mesh generation and audits, plus the bounded-
// constant studies, with CSV/JSON outputs and a reproducibility manifest.

#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "wmplab/experiments.hpp"
#include "wmplab/manifest.hpp"

using namespace wmplab;

namespace {

struct CommonOpts {
    StudyConfig cfg;
    std::string out;        // CSV path
    std::string json_out;   // JSON path
    std::string levels_arg;
    std::vector<double> x0_arg;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--domain", o.cfg.domain, "cube or prism")->default_val("cube");
    cmd->add_option("--degree", o.cfg.degree, "element degree (1 or 2)")->default_val(1);
    cmd->add_option("--levels", o.levels_arg, "comma-separated cells-per-edge values");
    cmd->add_option("--tol", o.cfg.tol, "CG relative-residual tolerance")->default_val(1e-12);
    cmd->add_option("--quad-degree", o.cfg.quad_degree, "load quadrature degree (default 2r+2)");
    cmd->add_option("--sample-order", o.cfg.sample_order, "sup-norm lattice order")
        ->default_val(4);
    cmd->add_option("--seed", o.cfg.seed, "seed for randomized checks (never affects results)");
    cmd->add_option("--threads", o.cfg.threads, "worker thread cap (0 = all cores)");
    cmd->add_option("--k", o.cfg.k_interior, "interior-estimate constant k")->default_val(1.0);
    cmd->add_option("--rho-factor", o.cfg.rho_factor, "rho = factor * h")->default_val(4.0);
    cmd->add_option("--x0", o.x0_arg, "evaluation point (3 coordinates; default centroid)")
        ->expected(3);
    cmd->add_option("--out,--csv", o.out, "CSV output path");
    cmd->add_option("--json", o.json_out, "JSON output path");
}

std::vector<int> parse_levels(const std::string& s, const std::vector<int>& fallback) {
    if (s.empty()) return fallback;
    std::vector<int> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stoi(tok));
    return out;
}

void finish_config(CommonOpts& o, const std::vector<int>& default_levels) {
    o.cfg.levels = parse_levels(o.levels_arg, default_levels);
    if (!o.x0_arg.empty()) o.cfg.x0 = Vec3{o.x0_arg[0], o.x0_arg[1], o.x0_arg[2]};
    if (o.cfg.threads <= 0) {
        if (const char* env = std::getenv("WMPLAB_THREADS"))
            o.cfg.threads = std::atoi(env);
    }
    if (o.cfg.threads <= 0) o.cfg.threads = 0;  // solve_multi resolves to all cores
}

void print_rows(const StudyResult& r) {
    std::printf("%-6s %-5s %-12s %-8s %-16s %-18s %-12s %-9s %s\n", "level", "n", "h", "dofs",
                "quantity", "name", "ratio", "cg_iters", "seconds");
    for (const auto& row : r.rows) {
        std::printf("%-6d %-5d %-12.6g %-8d %-16.10g %-18s ", row.level, row.n, row.h, row.dofs,
                    row.quantity, row.name.c_str());
        if (row.has_ratio)
            std::printf("%-12.6g ", row.ratio);
        else
            std::printf("%-12s ", "-");
        std::printf("%-9ld %.3f\n", row.cg_iters, row.seconds);
    }
    for (const auto& [k, v] : r.summary) std::printf("  %s = %.10g\n", k.c_str(), v);
}

void emit(const StudyResult& r, const CommonOpts& o, const std::string& cmdline) {
    print_rows(r);
    if (o.out.empty() && o.json_out.empty()) return;
    write_study_outputs(r, o.out, o.json_out);
    RunManifest man;
    man.command_line = cmdline;
    man.config_json = config_json_string(r.cfg, r.study);
    man.timestamp = iso8601_utc_now();
    std::string manifest_path;
    if (!o.out.empty()) {
        man.output_digests[o.out] = payload_digest(o.out);
        manifest_path = o.out + ".manifest.json";
    }
    if (!o.json_out.empty()) {
        man.output_digests[o.json_out] = payload_digest(o.json_out);
        if (manifest_path.empty()) manifest_path = o.json_out + ".manifest.json";
    }
    write_manifest(man, manifest_path);
    std::string wrote;
    for (const auto& [path, digest] : man.output_digests) wrote += path + ", ";
    std::printf("wrote %s%s\n", wrote.c_str(), manifest_path.c_str());
}

std::string join_args(int argc, char** argv) {
    std::string s;
    for (int i = 0; i < argc; ++i) {
        if (i) s += " ";
        s += argv[i];
    }
    return s;
}

void run_mesh_command(const std::string& domain, int n, int refine_steps,
                      const std::string& in_path, const std::string& out_path,
                      const std::string& info_path, const std::string& audit_path, int degree) {
    if (!info_path.empty()) {
        const Mesh m = load_mesh(info_path);
        const QuasiUniformityReport rep = mesh_metrics(m);
        std::printf("mesh %s: %zu vertices, %zu tets, %zu boundary faces\n", info_path.c_str(),
                    m.vertices.size(), m.tets.size(), m.boundary_faces.size());
        std::printf("h = %.12g  min_inradius = %.12g  ratio = %.12g\n", rep.h, rep.min_inradius,
                    rep.ratio);
        std::printf("dihedral angles: [%.6g, %.6g] degrees\n", rep.min_dihedral_deg,
                    rep.max_dihedral_deg);
        std::printf("volume = %.12g  boundary area = %.12g\n", mesh_volume(m), boundary_area(m));
        return;
    }
    if (!audit_path.empty()) {
        const Mesh m = load_mesh(audit_path);
        const FeSpace s = build_space(m, degree);
        const MMatrixReport rep = mmatrix_audit(s);
        std::printf("m-matrix pattern: %s\n", rep.is_m_matrix_pattern ? "yes" : "no");
        std::printf("max positive off-diagonal: %.12g", rep.max_positive_offdiag);
        if (!rep.is_m_matrix_pattern)
            std::printf(" at (%d, %d)", rep.witness_i, rep.witness_j);
        std::printf("\ndihedral angles: [%.6g, %.6g] degrees\n", rep.min_dihedral_deg,
                    rep.max_dihedral_deg);
        return;
    }
    Mesh m = in_path.empty() ? generate_structured(parse_domain(domain), n)
                             : load_mesh(in_path);
    for (int s = 0; s < refine_steps; ++s) m = refine(m);
    if (out_path.empty()) throw Error("mesh: --out is required when generating");
    save_mesh(m, out_path);
    std::printf("wrote %s: %zu vertices, %zu tets, h = %.12g\n", out_path.c_str(),
                m.vertices.size(), m.tets.size(), m.h);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"finite element studies of discrete maximum principles on tetrahedral meshes"};
    app.require_subcommand(1);

    // mesh
    std::string mesh_domain = "cube", mesh_in, mesh_out, mesh_info, mesh_audit;
    int mesh_n = 2, mesh_refine = 0, mesh_degree = 1;
    auto* mesh_cmd = app.add_subcommand("mesh", "generate, refine, inspect, or audit meshes");
    mesh_cmd->add_option("--domain", mesh_domain, "cube or prism");
    mesh_cmd->add_option("--n", mesh_n, "cells per edge");
    mesh_cmd->add_option("--in", mesh_in, "refine this mesh file instead of generating");
    mesh_cmd->add_option("--refine", mesh_refine, "red-refinement steps");
    mesh_cmd->add_option("--out", mesh_out, "output mesh path");
    mesh_cmd->add_option("--info", mesh_info, "print metrics of a mesh file");
    mesh_cmd->add_option("--audit", mesh_audit, "m-matrix audit of a mesh file");
    mesh_cmd->add_option("--degree", mesh_degree, "degree for --audit");
    // Accepted everywhere; no effect on mesh handling.
    double mesh_tol = 1e-12;
    int mesh_qd = -1, mesh_so = 4;
    unsigned mesh_seed = 0;
    mesh_cmd->add_option("--tol", mesh_tol);
    mesh_cmd->add_option("--quad-degree", mesh_qd);
    mesh_cmd->add_option("--sample-order", mesh_so);
    mesh_cmd->add_option("--seed", mesh_seed);

    CommonOpts wmp_o, ritz_o, blayer_o, green_o, conv_o, ext_o;
    auto* wmp_cmd = app.add_subcommand("wmp", "weak maximum principle constant study");
    std::string wmp_profile;
    wmp_cmd->add_option("--profile", wmp_profile,
                        "export the finest level's Lebesgue function as dof CSV");
    add_common(wmp_cmd, wmp_o);
    auto* ritz_cmd = app.add_subcommand("ritz", "Ritz projection sup-norm stability study");
    std::string family = "shrinking_bump";
    ritz_cmd->add_option("--family", family, "shrinking_bump | fixed_smooth | oscillatory");
    add_common(ritz_cmd, ritz_o);
    auto* blayer_cmd = app.add_subcommand("blayer", "boundary-layer gradient error study");
    add_common(blayer_cmd, blayer_o);
    auto* green_cmd = app.add_subcommand("green", "delta scaling and Green representation study");
    add_common(green_cmd, green_o);
    auto* conv_cmd = app.add_subcommand("converge", "manufactured-solution convergence study");
    add_common(conv_cmd, conv_o);
    auto* ext_cmd = app.add_subcommand("extend", "extension-domain Ritz splitting study");
    add_common(ext_cmd, ext_o);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        app.exit(e);
        return 1;
    }

    const std::string cmdline = join_args(argc, argv);
    try {
        if (mesh_cmd->parsed()) {
            run_mesh_command(mesh_domain, mesh_n, mesh_refine, mesh_in, mesh_out, mesh_info,
                             mesh_audit, mesh_degree);
        } else if (wmp_cmd->parsed()) {
            finish_config(wmp_o, {2, 4, 8});
            emit(wmp_study(wmp_o.cfg), wmp_o, cmdline);
            if (!wmp_profile.empty()) {
                const Mesh mesh =
                    generate_structured(parse_domain(wmp_o.cfg.domain), wmp_o.cfg.levels.back());
                const FeSpace space = build_space(mesh, wmp_o.cfg.degree);
                const LebesgueResult leb = lebesgue_constant(
                    space, wmp_o.cfg.sample_order, wmp_o.cfg.tol, wmp_o.cfg.threads);
                FeFunction prof;
                prof.space = &space;
                prof.coeffs = leb.profile;
                export_csv(prof, wmp_profile);
                std::printf("wrote %s (Lebesgue profile, max %.10g at nodes)\n",
                            wmp_profile.c_str(), leb.nodal_c_h);
            }
        } else if (ritz_cmd->parsed()) {
            finish_config(ritz_o, {2, 4, 8});
            emit(ritz_stability_study(ritz_o.cfg, parse_family(family)), ritz_o, cmdline);
        } else if (blayer_cmd->parsed()) {
            finish_config(blayer_o, {4, 8, 16});
            emit(boundary_layer_study(blayer_o.cfg), blayer_o, cmdline);
        } else if (green_cmd->parsed()) {
            finish_config(green_o, {2, 4, 8, 16});
            emit(green_study(green_o.cfg), green_o, cmdline);
        } else if (conv_cmd->parsed()) {
            finish_config(conv_o, {2, 4, 8});
            emit(convergence_study(conv_o.cfg), conv_o, cmdline);
        } else if (ext_cmd->parsed()) {
            finish_config(ext_o, {2, 4, 8});
            emit(extension_study(ext_o.cfg), ext_o, cmdline);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
