#include "wmplab/harmonic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>

namespace wmplab {

namespace {

int default_maxit(int n) { return std::max(10000, 40 * n); }

// Interior residual max_i |(K u)_i| of a full coefficient vector.
double interior_residual_inf(const FeSpace& space, const SparseMatrix& K,
                             const std::vector<double>& coeffs) {
    const std::vector<double> Ku = spmv(K, coeffs);
    double r = 0;
    for (int d : space.interior_dofs) r = std::max(r, std::abs(Ku[d]));
    return r;
}

std::vector<double> restrict_interior(const FeSpace& space, const std::vector<double>& full) {
    std::vector<double> out(space.interior_dofs.size());
    for (std::size_t r = 0; r < out.size(); ++r) out[r] = full[space.interior_dofs[r]];
    return out;
}

}  // namespace

HarmonicExtension harmonic_extend(const FeSpace& space, const std::vector<double>& g, double tol,
                                  int maxit) {
    if (g.size() != space.boundary_dofs.size())
        throw Error("harmonic_extend: boundary data size mismatch");
    HarmonicExtension out;
    out.u.space = &space;
    out.u.coeffs.assign(space.ndofs(), 0.0);
    for (std::size_t i = 0; i < g.size(); ++i) out.u.coeffs[space.boundary_dofs[i]] = g[i];

    const SparseMatrix K = assemble_stiffness(space);
    if (space.interior_dofs.empty()) return out;

    const DofSplit split = split_dofs(space, K);
    std::vector<double> gb(g.begin(), g.end());
    std::vector<double> rhs = spmv(split.K_IB, gb);
    for (double& v : rhs) v = -v;
    CgResult cg = cg_solve(split.K_II, rhs, tol, maxit, Precond::jacobi);
    if (!cg.converged) throw Error("harmonic_extend: CG did not converge");
    for (std::size_t r = 0; r < cg.x.size(); ++r)
        out.u.coeffs[space.interior_dofs[r]] = cg.x[r];
    out.stats = cg.stats;
    out.interior_residual = interior_residual_inf(space, K, out.u.coeffs);
    return out;
}

RitzResult ritz_project(const FeSpace& space, const ScalarField& u, const VectorField& grad_u,
                        double tol, int qdegree) {
    if (qdegree < 0) qdegree = 2 * space.degree + 2;
    RitzResult out;
    out.u.space = &space;
    out.u.coeffs.assign(space.ndofs(), 0.0);

    for (int d : space.boundary_dofs)
        out.boundary_node_max = std::max(out.boundary_node_max, std::abs(u(space.dof_coords[d])));
    if (out.boundary_node_max > 1e-10)
        std::cerr << "ritz_project: warning: |u| reaches " << out.boundary_node_max
                  << " at boundary nodes; projection assumes zero boundary values\n";

    const SparseMatrix K = assemble_stiffness(space);
    const DofSplit split = split_dofs(space, K);
    const std::vector<double> load = assemble_grad_load(space, grad_u, qdegree);
    const std::vector<double> rhs = restrict_interior(space, load);
    CgResult cg = cg_solve(split.K_II, rhs, tol, default_maxit(split.K_II.n), Precond::jacobi);
    if (!cg.converged) throw Error("ritz_project: CG did not converge");
    for (std::size_t r = 0; r < cg.x.size(); ++r)
        out.u.coeffs[space.interior_dofs[r]] = cg.x[r];
    out.stats = cg.stats;
    return out;
}

SourceResult fem_solve_source(const FeSpace& space, const ScalarField& f, double tol,
                              int qdegree) {
    if (qdegree < 0) qdegree = 2 * space.degree + 2;
    SourceResult out;
    out.u.space = &space;
    out.u.coeffs.assign(space.ndofs(), 0.0);
    const SparseMatrix K = assemble_stiffness(space);
    const DofSplit split = split_dofs(space, K);
    const std::vector<double> load = assemble_load(space, f, qdegree);
    const std::vector<double> rhs = restrict_interior(space, load);
    CgResult cg = cg_solve(split.K_II, rhs, tol, default_maxit(split.K_II.n), Precond::jacobi);
    if (!cg.converged) throw Error("fem_solve_source: CG did not converge");
    for (std::size_t r = 0; r < cg.x.size(); ++r)
        out.u.coeffs[space.interior_dofs[r]] = cg.x[r];
    out.stats = cg.stats;
    return out;
}

int locate_point(const Mesh& mesh, const Vec3& p) {
    for (std::size_t e = 0; e < mesh.tets.size(); ++e) {
        const auto b = barycentric_coords(mesh, static_cast<int>(e), p);
        if (b[0] >= -1e-12 && b[1] >= -1e-12 && b[2] >= -1e-12 && b[3] >= -1e-12)
            return static_cast<int>(e);
    }
    throw Error("point is outside the mesh");
}

RegularizedDelta regularized_delta(const FeSpace& space, const Vec3& x0) {
    RegularizedDelta d;
    d.x0 = x0;
    d.element = locate_point(*space.mesh, x0);

    const int nloc = space.dofs_per_element();
    Vec3 g[4];
    const double det = std::abs(lambda_gradients(*space.mesh, d.element, g));

    // Local mass matrix of the P_r basis on the element.
    const QuadratureRule& rule = quadrature(2 * space.degree);
    DenseMatrix M;
    M.rows = M.cols = nloc;
    M.a.assign(static_cast<std::size_t>(nloc) * nloc, 0.0);
    double N[10];
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
        shape_values(space.degree, rule.points[q], N);
        const double w = rule.weights[q] * det;
        for (int i = 0; i < nloc; ++i)
            for (int j = 0; j < nloc; ++j) M(i, j) += w * N[i] * N[j];
    }

    const auto b0 = barycentric_coords(*space.mesh, d.element, x0);
    std::vector<double> rhs(nloc);
    shape_values(space.degree, b0, N);
    for (int i = 0; i < nloc; ++i) rhs[i] = N[i];
    d.local_coeffs = dense_solve(M, rhs);
    return d;
}

double delta_l2_norm(const FeSpace& space, const RegularizedDelta& d) {
    const int nloc = space.dofs_per_element();
    Vec3 g[4];
    const double det = std::abs(lambda_gradients(*space.mesh, d.element, g));
    const QuadratureRule& rule = quadrature(2 * space.degree);
    double s = 0;
    double N[10];
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
        shape_values(space.degree, rule.points[q], N);
        double v = 0;
        for (int i = 0; i < nloc; ++i) v += d.local_coeffs[i] * N[i];
        s += rule.weights[q] * det * v * v;
    }
    return std::sqrt(s);
}

double integrate_against(const FeSpace& space, const RegularizedDelta& d, const FeFunction& chi) {
    const int nloc = space.dofs_per_element();
    Vec3 g[4];
    const double det = std::abs(lambda_gradients(*space.mesh, d.element, g));
    const QuadratureRule& rule = quadrature(2 * space.degree);
    double s = 0;
    double N[10];
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
        shape_values(space.degree, rule.points[q], N);
        double v = 0;
        for (int i = 0; i < nloc; ++i) v += d.local_coeffs[i] * N[i];
        s += rule.weights[q] * det * v * evaluate(chi, d.element, rule.points[q]);
    }
    return s;
}

GreenResult discrete_green(const FeSpace& space, const Vec3& x0, double tol) {
    GreenResult out;
    out.delta = regularized_delta(space, x0);
    out.g.space = &space;
    out.g.coeffs.assign(space.ndofs(), 0.0);

    // Load of the delta density: nonzero only for dofs of the host element.
    const int nloc = space.dofs_per_element();
    Vec3 g[4];
    const double det = std::abs(lambda_gradients(*space.mesh, out.delta.element, g));
    const QuadratureRule& rule = quadrature(2 * space.degree);
    std::vector<double> load(space.ndofs(), 0.0);
    int dofs[10];
    space.element_dofs(out.delta.element, dofs);
    double N[10];
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
        shape_values(space.degree, rule.points[q], N);
        double v = 0;
        for (int i = 0; i < nloc; ++i) v += out.delta.local_coeffs[i] * N[i];
        const double w = rule.weights[q] * det * v;
        for (int i = 0; i < nloc; ++i) load[dofs[i]] += w * N[i];
    }

    const SparseMatrix K = assemble_stiffness(space);
    const DofSplit split = split_dofs(space, K);
    const std::vector<double> rhs = restrict_interior(space, load);
    CgResult cg = cg_solve(split.K_II, rhs, tol, default_maxit(split.K_II.n), Precond::jacobi);
    if (!cg.converged) throw Error("discrete_green: CG did not converge");
    for (std::size_t r = 0; r < cg.x.size(); ++r)
        out.g.coeffs[space.interior_dofs[r]] = cg.x[r];
    out.stats = cg.stats;
    return out;
}

double galerkin_interior_residual(const FeSpace& space, const FeFunction& w) {
    const SparseMatrix K = assemble_stiffness(space);
    return interior_residual_inf(space, K, w.coeffs);
}

double dirichlet_inner(const FeFunction& a, const FeFunction& b) {
    const FeSpace& s = *a.space;
    if (b.space != &s) throw Error("dirichlet_inner: functions on different spaces");
    const QuadratureRule& rule = quadrature(s.degree == 1 ? 1 : 2);
    double out = 0;
    for (std::size_t e = 0; e < s.mesh->tets.size(); ++e) {
        Vec3 g[4];
        const double det = std::abs(lambda_gradients(*s.mesh, static_cast<int>(e), g));
        for (std::size_t q = 0; q < rule.points.size(); ++q)
            out += rule.weights[q] * det *
                   dot(evaluate_gradient(a, static_cast<int>(e), rule.points[q]),
                       evaluate_gradient(b, static_cast<int>(e), rule.points[q]));
    }
    return out;
}

double h1_norm(const FeFunction& f) {
    const FeSpace& s = *f.space;
    const QuadratureRule& rule = quadrature(2 * s.degree);
    double out = 0;
    for (std::size_t e = 0; e < s.mesh->tets.size(); ++e) {
        Vec3 g[4];
        const double det = std::abs(lambda_gradients(*s.mesh, static_cast<int>(e), g));
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            const double v = evaluate(f, static_cast<int>(e), rule.points[q]);
            const Vec3 gr = evaluate_gradient(f, static_cast<int>(e), rule.points[q]);
            out += rule.weights[q] * det * (v * v + dot(gr, gr));
        }
    }
    return std::sqrt(out);
}

namespace {

// Shared sampling pass: feed every lattice point's extension values and
// physical location to a visitor.
template <typename Visitor>
void visit_lattice(const FeSpace& space, int m, Visitor&& visit) {
    const Mesh& mesh = *space.mesh;
    const double inv = 1.0 / m;
    int dofs[10];
    double N[10];
    for (std::size_t e = 0; e < mesh.tets.size(); ++e) {
        space.element_dofs(static_cast<int>(e), dofs);
        for (int i = 0; i <= m; ++i)
            for (int j = 0; i + j <= m; ++j)
                for (int k = 0; i + j + k <= m; ++k) {
                    const std::array<double, 4> b{i * inv, j * inv, k * inv,
                                                  (m - i - j - k) * inv};
                    shape_values(space.degree, b, N);
                    visit(static_cast<int>(e), b, dofs, N);
                }
    }
}

}  // namespace

LebesgueResult lebesgue_constant(const FeSpace& space, int sample_order, double tol, int threads,
                                 std::size_t budget_doubles) {
    if (space.interior_dofs.empty())
        throw Error("lebesgue_constant: no interior dofs (mesh too coarse)");
    if (sample_order < 1) throw Error("lebesgue_constant: sample_order must be >= 1");

    const Mesh& mesh = *space.mesh;
    const std::size_t nI = space.interior_dofs.size();
    const std::size_t nB = space.boundary_dofs.size();
    const int nloc = space.dofs_per_element();

    const SparseMatrix K = assemble_stiffness(space);
    const DofSplit split = split_dofs(space, K);

    LebesgueResult out;
    out.profile.assign(space.ndofs(), 1.0);

    if (nI * nB <= budget_doubles) {
        // Forward mode: one solve per boundary basis function.
        std::vector<std::vector<double>> rhs(nB, std::vector<double>(nI, 0.0));
        for (std::size_t r = 0; r < nI; ++r)
            for (int k = split.K_IB.row_offsets[r]; k < split.K_IB.row_offsets[r + 1]; ++k)
                rhs[split.K_IB.col_indices[k]][r] = -split.K_IB.values[k];

        const int maxit = default_maxit(static_cast<int>(nI));
        const std::vector<CgResult> sols = solve_multi(split.K_II, rhs, tol, maxit,
                                                       Precond::jacobi, threads);

        // Extension table, row-major interior-rank x boundary-rank.
        std::vector<double> Y(nI * nB);
        for (std::size_t j = 0; j < nB; ++j) {
            out.cg_iterations += sols[j].stats.iterations;
            for (std::size_t r = 0; r < nI; ++r) Y[r * nB + j] = sols[j].x[r];
        }

        for (std::size_t r = 0; r < nI; ++r) {
            double s = 0;
            for (std::size_t j = 0; j < nB; ++j) s += std::abs(Y[r * nB + j]);
            out.profile[space.interior_dofs[r]] = s;
        }

        std::vector<double> t(nB);
        visit_lattice(space, sample_order, [&](int e, const std::array<double, 4>& b,
                                               const int* dofs, const double* N) {
            std::fill(t.begin(), t.end(), 0.0);
            for (int i = 0; i < nloc; ++i) {
                const int d = dofs[i];
                if (space.dof_on_boundary[d]) {
                    t[space.dof_rank[d]] += N[i];
                } else {
                    const double* row = &Y[static_cast<std::size_t>(space.dof_rank[d]) * nB];
                    const double w = N[i];
                    if (w == 0.0) continue;
                    for (std::size_t j = 0; j < nB; ++j) t[j] += w * row[j];
                }
            }
            double s = 0;
            for (std::size_t j = 0; j < nB; ++j) s += std::abs(t[j]);
            if (s > out.c_h) {
                out.c_h = s;
                const auto& tt = mesh.tets[e];
                out.argmax = mesh.vertices[tt[0]] * b[0] + mesh.vertices[tt[1]] * b[1] +
                             mesh.vertices[tt[2]] * b[2] + mesh.vertices[tt[3]] * b[3];
            }
        });
    } else {
        // Adjoint mode: one solve per sample point, using symmetry of K_II.
        out.used_adjoint = true;
        const int maxit = default_maxit(static_cast<int>(nI));
        std::vector<double> a(nI), kz(nB);
        auto lebesgue_at = [&](const int* dofs, const double* N) {
            std::fill(a.begin(), a.end(), 0.0);
            for (int i = 0; i < nloc; ++i)
                if (!space.dof_on_boundary[dofs[i]]) a[space.dof_rank[dofs[i]]] = N[i];
            CgResult cg = cg_solve(split.K_II, a, tol, maxit, Precond::jacobi);
            if (!cg.converged) throw Error("lebesgue_constant: adjoint solve did not converge");
            out.cg_iterations += cg.stats.iterations;
            std::fill(kz.begin(), kz.end(), 0.0);
            for (std::size_t r = 0; r < nI; ++r)
                for (int k = split.K_IB.row_offsets[r]; k < split.K_IB.row_offsets[r + 1]; ++k)
                    kz[split.K_IB.col_indices[k]] += split.K_IB.values[k] * cg.x[r];
            double s = 0;
            for (std::size_t j = 0; j < nB; ++j) {
                double bval = 0;
                for (int i = 0; i < nloc; ++i)
                    if (space.dof_on_boundary[dofs[i]] &&
                        space.dof_rank[dofs[i]] == static_cast<int>(j))
                        bval += N[i];
                s += std::abs(bval - kz[j]);
            }
            return s;
        };

        visit_lattice(space, sample_order, [&](int e, const std::array<double, 4>& b,
                                               const int* dofs, const double* N) {
            const double s = lebesgue_at(dofs, N);
            if (s > out.c_h) {
                out.c_h = s;
                const auto& tt = mesh.tets[e];
                out.argmax = mesh.vertices[tt[0]] * b[0] + mesh.vertices[tt[1]] * b[1] +
                             mesh.vertices[tt[2]] * b[2] + mesh.vertices[tt[3]] * b[3];
            }
        });

        // Profile at interior nodes: unit nodal vector as sample weights.
        double N[10];
        int dofs[10];
        for (std::size_t r = 0; r < nI; ++r) {
            std::fill(N, N + nloc, 0.0);
            std::fill(dofs, dofs + nloc, 0);
            dofs[0] = space.interior_dofs[r];
            N[0] = 1.0;
            out.profile[space.interior_dofs[r]] = lebesgue_at(dofs, N);
        }
    }

    for (int d = 0; d < space.ndofs(); ++d) out.nodal_c_h = std::max(out.nodal_c_h, out.profile[d]);
    return out;
}

}  // namespace wmplab
