#include "wmplab/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include "json.hpp"
#include "wmplab/manifest.hpp"

namespace wmplab {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

void check_config(const StudyConfig& cfg) {
    if (cfg.levels.empty()) throw Error("study config: no refinement levels");
    for (std::size_t i = 1; i < cfg.levels.size(); ++i)
        if (cfg.levels[i] <= cfg.levels[i - 1])
            throw Error("study config: levels must be strictly increasing");
    if (cfg.degree != 1 && cfg.degree != 2) throw Error("study config: degree must be 1 or 2");
    if (cfg.sample_order < 1) throw Error("study config: sample order must be >= 1");
    if (!(cfg.tol > 0 && cfg.tol < 1)) throw Error("study config: tol must be in (0,1)");
    if (cfg.rho_factor <= 0) throw Error("study config: rho factor must be positive");
}

int load_qdegree(const StudyConfig& cfg) {
    return cfg.quad_degree > 0 ? cfg.quad_degree : 2 * cfg.degree + 2;
}

// Append a row, wiring the ratio to the previous row with the same name.
void push_row(StudyResult& res, int level, int n, double h, int dofs, double quantity,
              const std::string& name, long iters, double seconds) {
    StudyRow row;
    row.level = level;
    row.n = n;
    row.h = h;
    row.dofs = dofs;
    row.quantity = quantity;
    row.name = name;
    row.cg_iters = iters;
    row.seconds = seconds;
    for (auto it = res.rows.rbegin(); it != res.rows.rend(); ++it)
        if (it->name == name) {
            row.has_ratio = true;
            row.ratio = quantity / it->quantity;
            break;
        }
    res.rows.push_back(row);
}

}  // namespace

void make_level(const StudyConfig& cfg, int n, LevelContext& ctx) {
    ctx.mesh = generate_structured(parse_domain(cfg.domain), n);
    ctx.space = build_space(ctx.mesh, cfg.degree);
}

StudyResult wmp_study(const StudyConfig& cfg) {
    check_config(cfg);
    StudyResult res;
    res.study = "wmp";
    res.cfg = cfg;
    int level = 0;
    for (int n : cfg.levels) {
        const auto t0 = Clock::now();
        LevelContext ctx;
        make_level(cfg, n, ctx);
        if (ctx.space.interior_dofs.empty())
            throw Error("wmp study: level n=" + std::to_string(n) +
                        " has no interior dofs; refine the mesh");
        const LebesgueResult leb =
            lebesgue_constant(ctx.space, cfg.sample_order, cfg.tol, cfg.threads);
        push_row(res, level, n, ctx.mesh.h, ctx.space.ndofs(), leb.c_h, "C_h",
                 leb.cg_iterations, elapsed(t0));
        res.summary["nodal_c_h_n" + std::to_string(n)] = leb.nodal_c_h;
        res.summary["sampling_correction_n" + std::to_string(n)] = leb.c_h / leb.nodal_c_h;
        ++level;
    }
    const StudyRow& last = res.rows.back();
    res.summary["bounded"] = (!last.has_ratio || last.ratio <= 1.2) ? 1.0 : 0.0;
    return res;
}

double BumpField::value(const Vec3& x) const {
    const double t = dot(x - center, x - center) / (radius * radius);
    if (t >= 1.0) return 0.0;
    const double s = 1.0 - t;
    return s * s;
}

Vec3 BumpField::gradient(const Vec3& x) const {
    const double t = dot(x - center, x - center) / (radius * radius);
    if (t >= 1.0) return {0, 0, 0};
    return (x - center) * (-4.0 * (1.0 - t) / (radius * radius));
}

RitzFamily parse_family(const std::string& name) {
    if (name == "shrinking_bump") return RitzFamily::shrinking_bump;
    if (name == "fixed_smooth") return RitzFamily::fixed_smooth;
    if (name == "oscillatory") return RitzFamily::oscillatory;
    throw Error("unknown ritz family: " + name);
}

namespace {

double sine_product(const Vec3& x) {
    return std::sin(M_PI * x.x) * std::sin(M_PI * x.y) * std::sin(M_PI * x.z);
}

Vec3 sine_product_grad(const Vec3& x) {
    const double sx = std::sin(M_PI * x.x), sy = std::sin(M_PI * x.y), sz = std::sin(M_PI * x.z);
    const double cx = std::cos(M_PI * x.x), cy = std::cos(M_PI * x.y), cz = std::cos(M_PI * x.z);
    return {M_PI * cx * sy * sz, M_PI * sx * cy * sz, M_PI * sx * sy * cz};
}

// Closed-form sup of |u| over the element sample lattices.
double sampled_sup(const Mesh& mesh, const ScalarField& u, int m) {
    double best = 0;
    const double inv = 1.0 / m;
    for (std::size_t e = 0; e < mesh.tets.size(); ++e) {
        const auto& t = mesh.tets[e];
        for (int i = 0; i <= m; ++i)
            for (int j = 0; i + j <= m; ++j)
                for (int k = 0; i + j + k <= m; ++k) {
                    const double b0 = i * inv, b1 = j * inv, b2 = k * inv,
                                 b3 = (m - i - j - k) * inv;
                    const Vec3 x = mesh.vertices[t[0]] * b0 + mesh.vertices[t[1]] * b1 +
                                   mesh.vertices[t[2]] * b2 + mesh.vertices[t[3]] * b3;
                    best = std::max(best, std::abs(u(x)));
                }
    }
    return best;
}

}  // namespace

StudyResult ritz_stability_study(const StudyConfig& cfg, RitzFamily family) {
    check_config(cfg);
    StudyResult res;
    res.study = family == RitzFamily::shrinking_bump
                    ? "ritz_shrinking_bump"
                    : (family == RitzFamily::fixed_smooth ? "ritz_fixed_smooth"
                                                          : "ritz_oscillatory");
    res.cfg = cfg;
    res.summary["sup_stability_degree_ok"] = cfg.degree >= 2 ? 1.0 : 0.0;

    int level = 0;
    for (int n : cfg.levels) {
        const auto t0 = Clock::now();
        LevelContext ctx;
        make_level(cfg, n, ctx);
        const Vec3 c = cfg.x0 ? *cfg.x0 : domain_centroid(ctx.mesh);
        const double dist = boundary_distance(ctx.mesh, c);

        ScalarField u;
        VectorField grad_u;
        switch (family) {
            case RitzFamily::shrinking_bump: {
                // Width follows the mesh but stays inside the domain so the
                // function keeps zero boundary values.
                BumpField bump{c, std::min(4.0 * ctx.mesh.h, dist)};
                u = [bump](const Vec3& x) { return bump.value(x); };
                grad_u = [bump](const Vec3& x) { return bump.gradient(x); };
                break;
            }
            case RitzFamily::fixed_smooth:
                u = sine_product;
                grad_u = sine_product_grad;
                break;
            case RitzFamily::oscillatory: {
                BumpField bump{c, std::min(4.0 * ctx.mesh.h, dist)};
                const double q = 1.0 / (4.0 * ctx.mesh.h);
                u = [bump, q](const Vec3& x) {
                    return std::sin(M_PI * q * x.x) * bump.value(x);
                };
                grad_u = [bump, q](const Vec3& x) {
                    const double s = std::sin(M_PI * q * x.x);
                    Vec3 g = bump.gradient(x) * s;
                    g.x += M_PI * q * std::cos(M_PI * q * x.x) * bump.value(x);
                    return g;
                };
                break;
            }
        }

        const RitzResult rp = ritz_project(ctx.space, u, grad_u, cfg.tol, load_qdegree(cfg));
        const double sup_u = sampled_sup(ctx.mesh, u, cfg.sample_order);
        const double sup_rh = sup_norm(rp.u, cfg.sample_order);
        push_row(res, level, n, ctx.mesh.h, ctx.space.ndofs(), sup_rh / sup_u, "sup_ratio",
                 rp.stats.iterations, elapsed(t0));
        ++level;
    }

    double lo = res.rows.front().quantity, hi = lo;
    for (const auto& r : res.rows) {
        lo = std::min(lo, r.quantity);
        hi = std::max(hi, r.quantity);
    }
    res.summary["min_ratio"] = lo;
    res.summary["max_ratio"] = hi;
    res.summary["spread"] = hi / lo;
    return res;
}

ExactField surrogate_field(const FeFunction& fine, int depth) {
    const FeSpace* fs = fine.space;
    const int block = depth == 1 ? 8 : 64;
    auto locate = [fs, block](int coarse_elem, const Vec3& x, int& elem,
                              std::array<double, 4>& bary) {
        double best = -1e30;
        for (int e = coarse_elem * block; e < (coarse_elem + 1) * block; ++e) {
            const auto b = barycentric_coords(*fs->mesh, e, x);
            const double worst = std::min({b[0], b[1], b[2], b[3]});
            if (worst > best) {
                best = worst;
                elem = e;
                bary = b;
            }
        }
        if (best < -1e-9) throw Error("surrogate lookup failed: point not in refined block");
    };
    ExactField out;
    out.value = [fine, locate](int coarse_elem, const Vec3& x) {
        int elem = 0;
        std::array<double, 4> b{};
        locate(coarse_elem, x, elem, b);
        return evaluate(fine, elem, b);
    };
    out.gradient = [fine, locate](int coarse_elem, const Vec3& x) {
        int elem = 0;
        std::array<double, 4> b{};
        locate(coarse_elem, x, elem, b);
        return evaluate_gradient(fine, elem, b);
    };
    return out;
}

namespace {

// Normalized radial bump with unit L2(Omega) norm, the norm taken by
// element-wise quadrature on the given space.
struct NormalizedBump {
    BumpField bump;
    double inv_norm = 1;

    double operator()(const Vec3& x) const { return inv_norm * bump.value(x); }
};

NormalizedBump make_source_bump(const FeSpace& space, const Vec3& x0, double rho, int qdegree) {
    NormalizedBump nb;
    nb.bump = BumpField{x0, rho};
    const QuadratureRule& rule = quadrature(qdegree);
    const Mesh& mesh = *space.mesh;
    double l2sq = 0;
    for (std::size_t e = 0; e < mesh.tets.size(); ++e) {
        Vec3 g[4];
        const double det = std::abs(lambda_gradients(mesh, static_cast<int>(e), g));
        const auto& t = mesh.tets[e];
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            const auto& b = rule.points[q];
            const Vec3 x = mesh.vertices[t[0]] * b[0] + mesh.vertices[t[1]] * b[1] +
                           mesh.vertices[t[2]] * b[2] + mesh.vertices[t[3]] * b[3];
            const double v = nb.bump.value(x);
            l2sq += rule.weights[q] * det * v * v;
        }
    }
    if (l2sq <= 0) throw Error("source bump vanishes on the mesh (ball does not meet the domain)");
    nb.inv_norm = 1.0 / std::sqrt(l2sq);
    return nb;
}

double layer_volume(const Mesh& mesh, const std::vector<int>& layer) {
    double v = 0;
    for (int e : layer) v += tet_volume(mesh, e);
    return v;
}

}  // namespace

StudyResult boundary_layer_study(const StudyConfig& cfg) {
    check_config(cfg);
    StudyResult res;
    res.study = "boundary_layer";
    res.cfg = cfg;
    const int qdeg = load_qdegree(cfg);

    int level = 0;
    for (int n : cfg.levels) {
        const auto t0 = Clock::now();
        LevelContext ctx;
        make_level(cfg, n, ctx);
        const Vec3 x0 = cfg.x0 ? *cfg.x0 : domain_centroid(ctx.mesh);
        const double h = ctx.mesh.h;
        const double rho = cfg.rho_factor * h;

        const NormalizedBump phi = make_source_bump(ctx.space, x0, rho, qdeg);
        ScalarField phi_fn = [phi](const Vec3& x) { return phi(x); };

        long iters = 0;
        const SourceResult vh = fem_solve_source(ctx.space, phi_fn, cfg.tol, qdeg);
        iters += vh.stats.iterations;

        Mesh fine_mesh = refine(ctx.mesh);
        FeSpace fine_space = build_space(fine_mesh, cfg.degree);
        const SourceResult vref = fem_solve_source(fine_space, phi_fn, cfg.tol, qdeg);
        iters += vref.stats.iterations;

        const std::vector<int> layer = boundary_layer(ctx.mesh, h);
        const ErrorNorms err = error_norms(vh.u, surrogate_field(vref.u, 1), qdeg, &layer);
        const double Q = std::pow(rho, -1.5) / h * err.l1_grad;
        push_row(res, level, n, h, ctx.space.ndofs(), Q, "Q", iters, elapsed(t0));
        res.summary["layer_vol_over_6h_n" + std::to_string(n)] =
            layer_volume(ctx.mesh, layer) / (6.0 * h);

        if (n == cfg.levels.back()) {
            // Surrogate adequacy: rebuild the reference two levels down.
            Mesh fine2_mesh = refine(fine_mesh);
            FeSpace fine2_space = build_space(fine2_mesh, cfg.degree);
            const SourceResult vref2 = fem_solve_source(fine2_space, phi_fn, cfg.tol, qdeg);
            const ErrorNorms err2 = error_norms(vh.u, surrogate_field(vref2.u, 2), qdeg, &layer);
            const double Q2 = std::pow(rho, -1.5) / h * err2.l1_grad;
            res.summary["surrogate_shift"] = std::abs(Q - Q2) / Q2;
            res.summary["Q_two_level_reference"] = Q2;
        }
        ++level;
    }
    return res;
}

std::vector<AnnulusProfileRow> dyadic_profile(const FeFunction& f, const ExactField& exact,
                                              const Vec3& x0, double rho, int qdegree) {
    const FeSpace& space = *f.space;
    const Mesh& mesh = *space.mesh;
    const AnnulusDecomposition dec = annuli(mesh, x0, rho);
    const std::vector<int> layer = boundary_layer(mesh, mesh.h);
    const std::set<int> layer_set(layer.begin(), layer.end());

    std::vector<AnnulusProfileRow> rows;
    auto add_row = [&](int j, double d_out, double d_in, const std::vector<int>& elems) {
        std::vector<int> subset;
        for (int e : elems)
            if (layer_set.count(e)) subset.push_back(e);
        AnnulusProfileRow row;
        row.j = j;
        row.d_outer = d_out;
        row.d_inner = d_in;
        row.elements = subset.size();
        row.norms = subset.empty() ? ErrorNorms{} : error_norms(f, exact, qdegree, &subset);
        rows.push_back(row);
    };
    for (int j = 0; j <= dec.J; ++j) add_row(j, dec.d[j], dec.d[j + 1], dec.annuli[j]);
    add_row(-1, dec.d[dec.J + 1], 0.0, dec.inner);
    return rows;
}

StudyResult convergence_study(const StudyConfig& cfg) {
    check_config(cfg);
    // The sine product vanishes on all faces of the unit cube only; on other
    // domains it is not the solution of the zero-boundary problem.
    if (cfg.domain != "cube")
        throw Error("convergence study's manufactured solution requires the cube domain");
    StudyResult res;
    res.study = "convergence";
    res.cfg = cfg;
    const int qdeg = load_qdegree(cfg);
    ScalarField f = [](const Vec3& x) { return 3.0 * M_PI * M_PI * sine_product(x); };
    const ExactField exact = exact_from_functions(sine_product, sine_product_grad);

    int level = 0;
    for (int n : cfg.levels) {
        const auto t0 = Clock::now();
        LevelContext ctx;
        make_level(cfg, n, ctx);
        const SourceResult vh = fem_solve_source(ctx.space, f, cfg.tol, qdeg);
        const ErrorNorms err = error_norms(vh.u, exact, qdeg);
        const double secs = elapsed(t0);
        push_row(res, level, n, ctx.mesh.h, ctx.space.ndofs(), err.l2, "l2_error",
                 vh.stats.iterations, secs);
        push_row(res, level, n, ctx.mesh.h, ctx.space.ndofs(), err.h1_semi, "h1_semi_error",
                 vh.stats.iterations, secs);
        ++level;
    }

    // Observed order from the last pair of levels, per norm.
    auto order_of = [&](const std::string& name) {
        const StudyRow* prev = nullptr;
        const StudyRow* last = nullptr;
        for (const auto& r : res.rows)
            if (r.name == name) {
                prev = last;
                last = &r;
            }
        if (!prev) return 0.0;
        return std::log(prev->quantity / last->quantity) / std::log(prev->h / last->h);
    };
    res.summary["l2_order"] = order_of("l2_error");
    res.summary["h1_order"] = order_of("h1_semi_error");
    return res;
}

StudyResult green_study(const StudyConfig& cfg) {
    check_config(cfg);
    StudyResult res;
    res.study = "green";
    res.cfg = cfg;

    int level = 0;
    for (int n : cfg.levels) {
        const auto t0 = Clock::now();
        LevelContext ctx;
        make_level(cfg, n, ctx);
        const Vec3 x0 = cfg.x0 ? *cfg.x0 : domain_centroid(ctx.mesh);

        const GreenResult gr = discrete_green(ctx.space, x0, cfg.tol);
        const double dl2 = delta_l2_norm(ctx.space, gr.delta);
        const double secs0 = elapsed(t0);
        push_row(res, level, n, ctx.mesh.h, ctx.space.ndofs(), dl2, "delta_l2",
                 gr.stats.iterations, secs0);

        // Representation error over a fixed set of zero-boundary functions.
        const std::vector<ScalarField> probes = {
            sine_product,
            [&](const Vec3& x) {
                return x.x * (1 - x.x) * x.y * (1 - x.y) * x.z * (1 - x.z);
            },
            [&](const Vec3& x) {
                return std::sin(2 * M_PI * x.x) * std::sin(M_PI * x.y) * std::sin(M_PI * x.z);
            }};
        double worst = 0;
        for (const auto& p : probes) {
            FeFunction w = nodal_mask(interpolate_nodal(ctx.space, p), DofClass::interior);
            const double lhs = evaluate(w, gr.delta.element,
                                        barycentric_coords(ctx.mesh, gr.delta.element, x0));
            const double rhs = dirichlet_inner(w, gr.g);
            worst = std::max(worst, std::abs(lhs - rhs) / h1_norm(w));
        }
        push_row(res, level, n, ctx.mesh.h, ctx.space.ndofs(), worst, "repr_err",
                 gr.stats.iterations, elapsed(t0) - secs0);

        const double energy = dirichlet_inner(gr.g, gr.g);
        res.summary["green_h1_over_delta_l2_n" + std::to_string(n)] =
            std::sqrt(energy) > 0 ? h1_norm(gr.g) / dl2 : 0.0;
        ++level;
    }

    // Least-squares slope of log ||delta|| vs log h.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int cnt = 0;
    for (const auto& r : res.rows)
        if (r.name == "delta_l2") {
            const double lx = std::log(r.h), ly = std::log(r.quantity);
            sx += lx;
            sy += ly;
            sxx += lx * lx;
            sxy += lx * ly;
            ++cnt;
        }
    res.summary["delta_l2_slope"] =
        cnt >= 2 ? (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx) : 0.0;
    return res;
}

StudyResult extension_study(const StudyConfig& cfg) {
    check_config(cfg);
    if (cfg.domain != "cube") throw Error("extension study requires the structured cube domain");
    StudyResult res;
    res.study = "extension";
    res.cfg = cfg;

    int level = 0;
    for (int n : cfg.levels) {
        const auto t0 = Clock::now();
        LevelContext ctx;
        make_level(cfg, n, ctx);
        const Vec3 c = cfg.x0 ? *cfg.x0 : domain_centroid(ctx.mesh);
        const double dist = boundary_distance(ctx.mesh, c);
        const BumpField bump{c, std::min(4.0 * ctx.mesh.h, dist)};
        ScalarField u = [bump](const Vec3& x) { return bump.value(x); };
        VectorField grad_u = [bump](const Vec3& x) { return bump.gradient(x); };

        const int pad = (n + 1) / 2;
        const ExtensionEmbedding emb = embed_in_extension(ctx.mesh, pad);
        FeSpace outer_space = build_space(emb.outer, cfg.degree);

        long iters = 0;
        const RitzResult outer = ritz_project(outer_space, u, grad_u, cfg.tol, load_qdegree(cfg));
        iters += outer.stats.iterations;
        const RitzResult inner = ritz_project(ctx.space, u, grad_u, cfg.tol, load_qdegree(cfg));
        iters += inner.stats.iterations;

        const FeFunction outer_on_inner =
            transfer_to_extension(emb, outer_space, outer.u, ctx.space);
        FeFunction w = outer_on_inner;
        for (int d = 0; d < ctx.space.ndofs(); ++d) w.coeffs[d] -= inner.u.coeffs[d];

        const double resid = galerkin_interior_residual(ctx.space, w);
        const double E1 = sup_error(
            outer_on_inner, [&u](int, const Vec3& x) { return u(x); }, cfg.sample_order);
        const double E2 = sup_norm(w, cfg.sample_order);
        const double bsup = boundary_sup_norm(outer_on_inner, cfg.sample_order);
        const LebesgueResult leb =
            lebesgue_constant(ctx.space, cfg.sample_order, cfg.tol, cfg.threads);
        iters += leb.cg_iterations;

        const double secs = elapsed(t0);
        push_row(res, level, n, ctx.mesh.h, ctx.space.ndofs(), E1, "E1", iters, secs);
        push_row(res, level, n, ctx.mesh.h, ctx.space.ndofs(), E2, "E2", iters, secs);
        push_row(res, level, n, ctx.mesh.h, ctx.space.ndofs(), bsup, "boundary_sup", iters, secs);
        push_row(res, level, n, ctx.mesh.h, ctx.space.ndofs(), leb.c_h, "C_h", iters, secs);
        push_row(res, level, n, ctx.mesh.h, ctx.space.ndofs(), resid, "harmonic_residual", iters,
                 secs);
        res.summary["transfer_bound_ok_n" + std::to_string(n)] =
            E2 <= leb.c_h * bsup + 1e-8 ? 1.0 : 0.0;
        ++level;
    }
    return res;
}

MMatrixReport mmatrix_audit(const FeSpace& space) {
    MMatrixReport rep;
    const SparseMatrix K = assemble_stiffness(space);
    rep.is_m_matrix_pattern = true;
    for (int i = 0; i < K.n; ++i)
        for (int k = K.row_offsets[i]; k < K.row_offsets[i + 1]; ++k) {
            const int j = K.col_indices[k];
            if (j == i) continue;
            if (K.values[k] > rep.max_positive_offdiag) {
                rep.max_positive_offdiag = K.values[k];
                rep.witness_i = i;
                rep.witness_j = j;
            }
            if (K.values[k] > 1e-12) rep.is_m_matrix_pattern = false;
        }
    const QuasiUniformityReport m = mesh_metrics(*space.mesh);
    rep.min_dihedral_deg = m.min_dihedral_deg;
    rep.max_dihedral_deg = m.max_dihedral_deg;
    return rep;
}

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

std::string to_csv(const StudyResult& r) {
    std::string out = "level,n,h,dofs,quantity,name,ratio,cg_iters,seconds\n";
    char buf[64];
    for (const auto& row : r.rows) {
        out += std::to_string(row.level) + "," + std::to_string(row.n) + "," + fmt(row.h) + "," +
               std::to_string(row.dofs) + "," + fmt(row.quantity) + "," + row.name + ",";
        if (row.has_ratio) out += fmt(row.ratio);
        out += "," + std::to_string(row.cg_iters) + ",";
        std::snprintf(buf, sizeof buf, "%.3f", row.seconds);
        out += buf;
        out += "\n";
    }
    return out;
}

std::string config_json_string(const StudyConfig& cfg, const std::string& study) {
    nlohmann::json j;
    j["study"] = study;
    j["domain"] = cfg.domain;
    j["degree"] = cfg.degree;
    j["levels"] = cfg.levels;
    j["sample_order"] = cfg.sample_order;
    j["tol"] = cfg.tol;
    j["quad_degree"] = cfg.quad_degree;
    j["k_interior"] = cfg.k_interior;
    j["rho_factor"] = cfg.rho_factor;
    if (cfg.x0)
        j["x0"] = {cfg.x0->x, cfg.x0->y, cfg.x0->z};
    else
        j["x0"] = nullptr;
    j["threads"] = cfg.threads;
    j["seed"] = cfg.seed;
    return j.dump();
}

std::string to_json_string(const StudyResult& r) {
    nlohmann::json j;
    j["meta"] = nlohmann::json::parse(config_json_string(r.cfg, r.study));
    j["summary"] = r.summary;
    j["rows"] = nlohmann::json::array();
    for (const auto& row : r.rows) {
        nlohmann::json jr;
        jr["level"] = row.level;
        jr["n"] = row.n;
        jr["h"] = row.h;
        jr["dofs"] = row.dofs;
        jr["quantity"] = row.quantity;
        jr["name"] = row.name;
        if (row.has_ratio)
            jr["ratio"] = row.ratio;
        else
            jr["ratio"] = nullptr;
        jr["cg_iters"] = row.cg_iters;
        jr["seconds"] = row.seconds;
        j["rows"].push_back(jr);
    }
    return j.dump(2);
}

void write_study_outputs(const StudyResult& r, const std::string& csv_path,
                         const std::string& json_path) {
    if (!csv_path.empty()) {
        std::ofstream out(csv_path);
        if (!out) throw Error("cannot open " + csv_path + " for writing");
        out << to_csv(r);
    }
    if (!json_path.empty()) {
        std::ofstream out(json_path);
        if (!out) throw Error("cannot open " + json_path + " for writing");
        out << to_json_string(r) << "\n";
    }
}

}  // namespace wmplab
