#include "wmplab/fe_space.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>

namespace wmplab {

namespace {
const int kLocalEdges[6][2] = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
}

void FeSpace::element_dofs(int e, int* out) const {
    const auto& t = mesh->tets[e];
    for (int i = 0; i < 4; ++i) out[i] = t[i];
    if (degree == 2) {
        const int nv = static_cast<int>(mesh->vertices.size());
        for (int i = 0; i < 6; ++i) out[4 + i] = nv + tet_edges[e][i];
    }
}

FeSpace build_space(const Mesh& mesh, int degree) {
    if (degree != 1 && degree != 2) throw Error("unsupported degree " + std::to_string(degree));
    FeSpace s;
    s.mesh = &mesh;
    s.degree = degree;
    s.dof_coords = mesh.vertices;

    std::set<int> bverts;
    for (const auto& f : mesh.boundary_faces)
        for (int v : f) bverts.insert(v);

    std::set<std::array<int, 2>> bedges;
    if (degree == 2) {
        for (const auto& f : mesh.boundary_faces)
            for (int a = 0; a < 3; ++a)
                for (int b = a + 1; b < 3; ++b)
                    bedges.insert({std::min(f[a], f[b]), std::max(f[a], f[b])});

        s.edges = mesh_edges(mesh);
        std::map<std::array<int, 2>, int> edge_id;
        for (std::size_t i = 0; i < s.edges.size(); ++i) {
            edge_id[s.edges[i]] = static_cast<int>(i);
            s.dof_coords.push_back(
                (mesh.vertices[s.edges[i][0]] + mesh.vertices[s.edges[i][1]]) * 0.5);
        }
        s.tet_edges.resize(mesh.tets.size());
        for (std::size_t e = 0; e < mesh.tets.size(); ++e) {
            const auto& t = mesh.tets[e];
            for (int le = 0; le < 6; ++le) {
                const int a = t[kLocalEdges[le][0]], b = t[kLocalEdges[le][1]];
                s.tet_edges[e][le] = edge_id.at({std::min(a, b), std::max(a, b)});
            }
        }
    }

    const int nv = static_cast<int>(mesh.vertices.size());
    s.dof_on_boundary.assign(s.dof_coords.size(), 0);
    for (int v : bverts) s.dof_on_boundary[v] = 1;
    if (degree == 2)
        for (std::size_t i = 0; i < s.edges.size(); ++i)
            if (bedges.count(s.edges[i])) s.dof_on_boundary[nv + i] = 1;

    s.dof_rank.resize(s.dof_coords.size());
    for (std::size_t d = 0; d < s.dof_coords.size(); ++d) {
        if (s.dof_on_boundary[d]) {
            s.dof_rank[d] = static_cast<int>(s.boundary_dofs.size());
            s.boundary_dofs.push_back(static_cast<int>(d));
        } else {
            s.dof_rank[d] = static_cast<int>(s.interior_dofs.size());
            s.interior_dofs.push_back(static_cast<int>(d));
        }
    }
    return s;
}

void shape_values(int degree, const std::array<double, 4>& bary, double* out) {
    if (degree == 1) {
        for (int i = 0; i < 4; ++i) out[i] = bary[i];
        return;
    }
    for (int i = 0; i < 4; ++i) out[i] = bary[i] * (2.0 * bary[i] - 1.0);
    for (int le = 0; le < 6; ++le)
        out[4 + le] = 4.0 * bary[kLocalEdges[le][0]] * bary[kLocalEdges[le][1]];
}

double lambda_gradients(const Mesh& mesh, int e, Vec3 grads[4]) {
    const auto& t = mesh.tets[e];
    const Vec3 p0 = mesh.vertices[t[0]];
    const Vec3 a = mesh.vertices[t[1]] - p0;
    const Vec3 b = mesh.vertices[t[2]] - p0;
    const Vec3 c = mesh.vertices[t[3]] - p0;
    const double det = dot(a, cross(b, c));
    if (det == 0) throw Error("degenerate element " + std::to_string(e));
    const double inv = 1.0 / det;
    // Rows of the inverse of [a b c] (columns).
    grads[1] = cross(b, c) * inv;
    grads[2] = cross(c, a) * inv;
    grads[3] = cross(a, b) * inv;
    grads[0] = (grads[1] + grads[2] + grads[3]) * -1.0;
    return det;
}

double evaluate(const FeFunction& f, int elem, const std::array<double, 4>& bary) {
    const FeSpace& s = *f.space;
    if (elem < 0 || elem >= static_cast<int>(s.mesh->tets.size()))
        throw Error("element index out of range");
    double N[10];
    shape_values(s.degree, bary, N);
    int dofs[10];
    s.element_dofs(elem, dofs);
    double v = 0;
    for (int i = 0; i < s.dofs_per_element(); ++i) v += N[i] * f.coeffs[dofs[i]];
    return v;
}

Vec3 evaluate_gradient(const FeFunction& f, int elem, const std::array<double, 4>& bary) {
    const FeSpace& s = *f.space;
    if (elem < 0 || elem >= static_cast<int>(s.mesh->tets.size()))
        throw Error("element index out of range");
    Vec3 g[4];
    lambda_gradients(*s.mesh, elem, g);
    int dofs[10];
    s.element_dofs(elem, dofs);
    Vec3 out{0, 0, 0};
    if (s.degree == 1) {
        for (int i = 0; i < 4; ++i) out = out + g[i] * f.coeffs[dofs[i]];
        return out;
    }
    for (int i = 0; i < 4; ++i)
        out = out + g[i] * ((4.0 * bary[i] - 1.0) * f.coeffs[dofs[i]]);
    for (int le = 0; le < 6; ++le) {
        const int a = kLocalEdges[le][0], b = kLocalEdges[le][1];
        const double c = 4.0 * f.coeffs[dofs[4 + le]];
        out = out + (g[a] * bary[b] + g[b] * bary[a]) * c;
    }
    return out;
}

std::array<double, 4> barycentric_coords(const Mesh& mesh, int e, const Vec3& p) {
    Vec3 g[4];
    lambda_gradients(mesh, e, g);
    const Vec3 p0 = mesh.vertices[mesh.tets[e][0]];
    std::array<double, 4> bary;
    bary[1] = dot(g[1], p - p0);
    bary[2] = dot(g[2], p - p0);
    bary[3] = dot(g[3], p - p0);
    bary[0] = 1.0 - bary[1] - bary[2] - bary[3];
    return bary;
}

FeFunction interpolate_nodal(const FeSpace& space, const std::function<double(const Vec3&)>& f) {
    FeFunction out;
    out.space = &space;
    out.coeffs.resize(space.ndofs());
    for (int d = 0; d < space.ndofs(); ++d) out.coeffs[d] = f(space.dof_coords[d]);
    return out;
}

FeFunction nodal_mask(const FeFunction& f, DofClass keep) {
    FeFunction out = f;
    const FeSpace& s = *f.space;
    for (int d = 0; d < s.ndofs(); ++d) {
        const bool on_boundary = s.dof_on_boundary[d] != 0;
        if ((keep == DofClass::boundary) != on_boundary) out.coeffs[d] = 0.0;
    }
    return out;
}

namespace {

template <typename Fn>
void for_lattice4(int m, Fn&& fn) {
    const double inv = 1.0 / m;
    for (int i = 0; i <= m; ++i)
        for (int j = 0; i + j <= m; ++j)
            for (int k = 0; i + j + k <= m; ++k)
                fn(std::array<double, 4>{i * inv, j * inv, k * inv, (m - i - j - k) * inv});
}

}  // namespace

double sup_norm(const FeFunction& f, int sample_order) {
    if (sample_order < 1) throw Error("sample_order must be >= 1");
    const FeSpace& s = *f.space;
    double best = 0;
    for (std::size_t e = 0; e < s.mesh->tets.size(); ++e)
        for_lattice4(sample_order, [&](const std::array<double, 4>& b) {
            best = std::max(best, std::abs(evaluate(f, static_cast<int>(e), b)));
        });
    return best;
}

double boundary_sup_norm(const FeFunction& f, int sample_order) {
    if (sample_order < 1) throw Error("sample_order must be >= 1");
    const FeSpace& s = *f.space;
    const Mesh& mesh = *s.mesh;
    double best = 0;
    const double inv = 1.0 / sample_order;
    for (std::size_t bf = 0; bf < mesh.boundary_faces.size(); ++bf) {
        const auto& face = mesh.boundary_faces[bf];
        const int e = mesh.boundary_face_tet[bf];
        const auto& t = mesh.tets[e];
        int local[3];
        for (int c = 0; c < 3; ++c) {
            local[c] = -1;
            for (int i = 0; i < 4; ++i)
                if (t[i] == face[c]) local[c] = i;
            if (local[c] < 0) throw Error("boundary face not found in owning tet");
        }
        for (int i = 0; i <= sample_order; ++i)
            for (int j = 0; i + j <= sample_order; ++j) {
                std::array<double, 4> b{0, 0, 0, 0};
                b[local[0]] = i * inv;
                b[local[1]] = j * inv;
                b[local[2]] = (sample_order - i - j) * inv;
                best = std::max(best, std::abs(evaluate(f, e, b)));
            }
    }
    return best;
}

FeFunction transfer_to_extension(const ExtensionEmbedding& emb, const FeSpace& outer_space,
                                 const FeFunction& outer_f, const FeSpace& inner_space) {
    if (outer_space.degree != inner_space.degree)
        throw Error("transfer_to_extension: spaces must have equal degree");
    if (outer_f.space != &outer_space) throw Error("transfer_to_extension: function/space mismatch");
    FeFunction out;
    out.space = &inner_space;
    out.coeffs.resize(inner_space.ndofs());

    const int inner_nv = static_cast<int>(emb.inner.vertices.size());
    for (int v = 0; v < inner_nv; ++v) out.coeffs[v] = outer_f.coeffs[emb.vertex_map[v]];

    if (inner_space.degree == 2) {
        std::map<std::array<int, 2>, int> outer_edge_id;
        const int outer_nv = static_cast<int>(emb.outer.vertices.size());
        for (std::size_t i = 0; i < outer_space.edges.size(); ++i)
            outer_edge_id[outer_space.edges[i]] = outer_nv + static_cast<int>(i);
        for (std::size_t i = 0; i < inner_space.edges.size(); ++i) {
            const int a = emb.vertex_map[inner_space.edges[i][0]];
            const int b = emb.vertex_map[inner_space.edges[i][1]];
            auto it = outer_edge_id.find({std::min(a, b), std::max(a, b)});
            if (it == outer_edge_id.end())
                throw Error("embedding inconsistency: inner edge missing from outer mesh");
            out.coeffs[inner_nv + i] = outer_f.coeffs[it->second];
        }
    }
    return out;
}

std::vector<double> boundary_trace(const FeSpace& space,
                                   const std::function<double(const Vec3&)>& g) {
    std::vector<double> out(space.boundary_dofs.size());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = g(space.dof_coords[space.boundary_dofs[i]]);
    return out;
}

void export_csv(const FeFunction& f, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path + " for writing");
    out << "dof_index,x,y,z,value\n";
    char buf[160];
    const FeSpace& s = *f.space;
    for (int d = 0; d < s.ndofs(); ++d) {
        const Vec3& p = s.dof_coords[d];
        std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g\n", d, p.x, p.y, p.z,
                      f.coeffs[d]);
        out << buf;
    }
}

}  // namespace wmplab
