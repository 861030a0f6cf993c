#include "wmplab/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

namespace wmplab {

namespace {

void push_orbit31(QuadratureRule& r, double b, double w) {
    const double a = 1.0 - 3.0 * b;
    r.points.push_back({a, b, b, b});
    r.points.push_back({b, a, b, b});
    r.points.push_back({b, b, a, b});
    r.points.push_back({b, b, b, a});
    for (int i = 0; i < 4; ++i) r.weights.push_back(w / 6.0);
}

void push_orbit22(QuadratureRule& r, double c, double w) {
    const double d = 0.5 - c;
    // All placements of the two c's.
    const int pos[6][2] = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
    for (auto& p : pos) {
        std::array<double, 4> q{d, d, d, d};
        q[p[0]] = c;
        q[p[1]] = c;
        r.points.push_back(q);
        r.weights.push_back(w / 6.0);
    }
}

void push_orbit211(QuadratureRule& r, double a, double b, double c, double w) {
    // All distinct permutations of (a, a, b, c).
    const int pos[12][4] = {{0, 1, 2, 3}, {0, 1, 3, 2}, {0, 2, 1, 3}, {0, 3, 1, 2},
                            {0, 2, 3, 1}, {0, 3, 2, 1}, {1, 2, 0, 3}, {1, 3, 0, 2},
                            {1, 2, 3, 0}, {1, 3, 2, 0}, {2, 3, 0, 1}, {2, 3, 1, 0}};
    for (auto& p : pos) {
        std::array<double, 4> q;
        q[p[0]] = a;
        q[p[1]] = a;
        q[p[2]] = b;
        q[p[3]] = c;
        r.points.push_back(q);
        r.weights.push_back(w / 6.0);
    }
}

QuadratureRule make_rule(int degree) {
    QuadratureRule r;
    r.degree = degree;
    switch (degree) {
        case 1:
            r.points.push_back({0.25, 0.25, 0.25, 0.25});
            r.weights.push_back(1.0 / 6.0);
            break;
        case 2:
            // 4-point rule, barycentric ((5+3*sqrt5)/20, (5-sqrt5)/20 x3).
            push_orbit31(r, (5.0 - std::sqrt(5.0)) / 20.0, 0.25);
            break;
        case 4:
            // Keast 14-point rule.
            push_orbit31(r, 0.3108859192633005, 0.1126879257180162);
            push_orbit31(r, 0.0927352503108912, 0.0734930431163619);
            push_orbit22(r, 0.0455037041256497, 0.0425460207770812);
            break;
        case 6:
            // Keast 24-point rule.
            push_orbit31(r, 0.2146028712591517, 0.0399227502581679);
            push_orbit31(r, 0.0406739585346113, 0.0100772110553207);
            push_orbit31(r, 0.3223378901422757, 0.0553571815436544);
            push_orbit211(r, 0.0636610018750175, 0.2696723314583159, 0.6030056647916491,
                          0.0482142857142857);
            break;
        default:
            throw Error("unsupported quadrature degree " + std::to_string(degree));
    }
    return r;
}

}  // namespace

const QuadratureRule& quadrature(int degree) {
    static const QuadratureRule r1 = make_rule(1);
    static const QuadratureRule r2 = make_rule(2);
    static const QuadratureRule r4 = make_rule(4);
    static const QuadratureRule r6 = make_rule(6);
    switch (degree) {
        case 1: return r1;
        case 2: return r2;
        case 4: return r4;
        case 6: return r6;
        default: throw Error("unsupported quadrature degree " + std::to_string(degree));
    }
}

namespace {

// Local stiffness of element e into k (row-major nloc x nloc).
void element_stiffness(const FeSpace& s, int e, double* k) {
    Vec3 g[4];
    const double det = std::abs(lambda_gradients(*s.mesh, e, g));
    const int nloc = s.dofs_per_element();
    if (s.degree == 1) {
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) k[i * 4 + j] = det / 6.0 * dot(g[i], g[j]);
        return;
    }
    const QuadratureRule& rule = quadrature(2);
    std::fill(k, k + nloc * nloc, 0.0);
    const int le[6][2] = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
        const auto& b = rule.points[q];
        Vec3 gn[10];
        for (int i = 0; i < 4; ++i) gn[i] = g[i] * (4.0 * b[i] - 1.0);
        for (int x = 0; x < 6; ++x) {
            const int p = le[x][0], qv = le[x][1];
            gn[4 + x] = (g[p] * b[qv] + g[qv] * b[p]) * 4.0;
        }
        const double w = rule.weights[q] * det;
        for (int i = 0; i < nloc; ++i)
            for (int j = 0; j < nloc; ++j) k[i * nloc + j] += w * dot(gn[i], gn[j]);
    }
}

}  // namespace

SparseMatrix assemble_stiffness(const FeSpace& space) {
    const Mesh& mesh = *space.mesh;
    const int nloc = space.dofs_per_element();

    std::vector<std::pair<int, int>> pattern;
    pattern.reserve(mesh.tets.size() * nloc * nloc);
    int dofs[10];
    for (std::size_t e = 0; e < mesh.tets.size(); ++e) {
        space.element_dofs(static_cast<int>(e), dofs);
        for (int i = 0; i < nloc; ++i)
            for (int j = 0; j < nloc; ++j) pattern.emplace_back(dofs[i], dofs[j]);
    }
    SparseMatrix K = build_pattern(space.ndofs(), space.ndofs(), std::move(pattern), true);

    double k[100];
    for (std::size_t e = 0; e < mesh.tets.size(); ++e) {
        element_stiffness(space, static_cast<int>(e), k);
        space.element_dofs(static_cast<int>(e), dofs);
        for (int i = 0; i < nloc; ++i)
            for (int j = 0; j < nloc; ++j) K.at(dofs[i], dofs[j]) += k[i * nloc + j];
    }
    return K;
}

namespace {

Vec3 physical_point(const Mesh& mesh, int e, const std::array<double, 4>& b) {
    const auto& t = mesh.tets[e];
    return mesh.vertices[t[0]] * b[0] + mesh.vertices[t[1]] * b[1] +
           mesh.vertices[t[2]] * b[2] + mesh.vertices[t[3]] * b[3];
}

}  // namespace

std::vector<double> assemble_load(const FeSpace& space, const ScalarField& f, int qdegree) {
    const QuadratureRule& rule = quadrature(qdegree);
    const Mesh& mesh = *space.mesh;
    const int nloc = space.dofs_per_element();
    std::vector<double> load(space.ndofs(), 0.0);
    int dofs[10];
    double N[10];
    for (std::size_t e = 0; e < mesh.tets.size(); ++e) {
        Vec3 g[4];
        const double det = std::abs(lambda_gradients(mesh, static_cast<int>(e), g));
        space.element_dofs(static_cast<int>(e), dofs);
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            const double fx = f(physical_point(mesh, static_cast<int>(e), rule.points[q]));
            shape_values(space.degree, rule.points[q], N);
            const double w = rule.weights[q] * det * fx;
            for (int i = 0; i < nloc; ++i) load[dofs[i]] += w * N[i];
        }
    }
    return load;
}

std::vector<double> assemble_grad_load(const FeSpace& space, const VectorField& g, int qdegree) {
    const QuadratureRule& rule = quadrature(qdegree);
    const Mesh& mesh = *space.mesh;
    const int le[6][2] = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
    std::vector<double> load(space.ndofs(), 0.0);
    int dofs[10];
    for (std::size_t e = 0; e < mesh.tets.size(); ++e) {
        Vec3 gl[4];
        const double det = std::abs(lambda_gradients(mesh, static_cast<int>(e), gl));
        space.element_dofs(static_cast<int>(e), dofs);
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            const auto& b = rule.points[q];
            const Vec3 gx = g(physical_point(mesh, static_cast<int>(e), b));
            const double w = rule.weights[q] * det;
            if (space.degree == 1) {
                for (int i = 0; i < 4; ++i) load[dofs[i]] += w * dot(gx, gl[i]);
            } else {
                for (int i = 0; i < 4; ++i)
                    load[dofs[i]] += w * (4.0 * b[i] - 1.0) * dot(gx, gl[i]);
                for (int x = 0; x < 6; ++x) {
                    const int p = le[x][0], qv = le[x][1];
                    load[dofs[4 + x]] +=
                        w * 4.0 * (b[qv] * dot(gx, gl[p]) + b[p] * dot(gx, gl[qv]));
                }
            }
        }
    }
    return load;
}

DofSplit split_dofs(const FeSpace& space, const SparseMatrix& K) {
    if (space.interior_dofs.empty())
        throw Error("split_dofs: no interior dofs (mesh too coarse for interior solves)");
    const int nI = static_cast<int>(space.interior_dofs.size());
    const int nB = static_cast<int>(space.boundary_dofs.size());

    DofSplit out;
    out.K_II.n = out.K_II.m = nI;
    out.K_II.symmetric = true;
    out.K_IB.n = nI;
    out.K_IB.m = nB;
    out.K_II.row_offsets.assign(nI + 1, 0);
    out.K_IB.row_offsets.assign(nI + 1, 0);

    for (int r = 0; r < nI; ++r) {
        const int i = space.interior_dofs[r];
        for (int k = K.row_offsets[i]; k < K.row_offsets[i + 1]; ++k) {
            const int j = K.col_indices[k];
            if (space.dof_on_boundary[j]) {
                out.K_IB.col_indices.push_back(space.dof_rank[j]);
                out.K_IB.values.push_back(K.values[k]);
            } else {
                out.K_II.col_indices.push_back(space.dof_rank[j]);
                out.K_II.values.push_back(K.values[k]);
            }
        }
        out.K_II.row_offsets[r + 1] = static_cast<int>(out.K_II.col_indices.size());
        out.K_IB.row_offsets[r + 1] = static_cast<int>(out.K_IB.col_indices.size());
    }
    return out;
}

ExactField exact_from_functions(const ScalarField& u, const VectorField& grad_u) {
    ExactField f;
    f.value = [u](int, const Vec3& x) { return u(x); };
    f.gradient = [grad_u](int, const Vec3& x) { return grad_u(x); };
    return f;
}

ErrorNorms error_norms(const FeFunction& f, const ExactField& exact, int qdegree,
                       const std::vector<int>* subset) {
    const FeSpace& s = *f.space;
    const Mesh& mesh = *s.mesh;
    const QuadratureRule& rule = quadrature(qdegree);

    std::vector<int> all;
    if (!subset) {
        all.resize(mesh.tets.size());
        for (std::size_t e = 0; e < all.size(); ++e) all[e] = static_cast<int>(e);
        subset = &all;
    }

    ErrorNorms out;
    double l2_sq = 0, h1_sq = 0, l1 = 0;
    for (int e : *subset) {
        Vec3 g[4];
        const double det = std::abs(lambda_gradients(mesh, e, g));
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            const auto& b = rule.points[q];
            const Vec3 x = physical_point(mesh, e, b);
            const double w = rule.weights[q] * det;
            const double dv = evaluate(f, e, b) - exact.value(e, x);
            const Vec3 dg = evaluate_gradient(f, e, b) - exact.gradient(e, x);
            l2_sq += w * dv * dv;
            h1_sq += w * dot(dg, dg);
            l1 += w * norm(dg);
        }
    }
    out.l2 = std::sqrt(l2_sq);
    out.h1_semi = std::sqrt(h1_sq);
    out.l1_grad = l1;
    return out;
}

double sup_error(const FeFunction& f, const std::function<double(int, const Vec3&)>& exact,
                 int sample_order, const std::vector<int>* subset) {
    const FeSpace& s = *f.space;
    const Mesh& mesh = *s.mesh;
    std::vector<int> all;
    if (!subset) {
        all.resize(mesh.tets.size());
        for (std::size_t e = 0; e < all.size(); ++e) all[e] = static_cast<int>(e);
        subset = &all;
    }
    const int m = sample_order;
    const double inv = 1.0 / m;
    double best = 0;
    for (int e : *subset)
        for (int i = 0; i <= m; ++i)
            for (int j = 0; i + j <= m; ++j)
                for (int k = 0; i + j + k <= m; ++k) {
                    const std::array<double, 4> b{i * inv, j * inv, k * inv,
                                                  (m - i - j - k) * inv};
                    const Vec3 x = physical_point(mesh, e, b);
                    best = std::max(best, std::abs(evaluate(f, e, b) - exact(e, x)));
                }
    return best;
}

void export_matrix(const SparseMatrix& A, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path + " for writing");
    char buf[96];
    for (int i = 0; i < A.n; ++i)
        for (int k = A.row_offsets[i]; k < A.row_offsets[i + 1]; ++k) {
            std::snprintf(buf, sizeof buf, "%d %d %.17g\n", i, A.col_indices[k], A.values[k]);
            out << buf;
        }
}

}  // namespace wmplab
