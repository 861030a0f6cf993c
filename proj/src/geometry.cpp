#include "wmplab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <unordered_map>

namespace wmplab {

double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
double distance(const Vec3& a, const Vec3& b) { return norm(a - b); }

Domain parse_domain(const std::string& tag) {
    if (tag == "cube" || tag == "unit_cube") return Domain::unit_cube;
    if (tag == "prism") return Domain::prism;
    throw Error("unsupported domain tag: " + tag);
}

namespace {

double signed_volume(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
    return dot(cross(b - a, c - a), d - a) / 6.0;
}

std::array<int, 3> sorted_face(int a, int b, int c) {
    std::array<int, 3> f{a, b, c};
    std::sort(f.begin(), f.end());
    return f;
}

double tet_diameter(const Mesh& m, const std::array<int, 4>& t) {
    double d = 0;
    for (int a = 0; a < 4; ++a)
        for (int b = a + 1; b < 4; ++b)
            d = std::max(d, distance(m.vertices[t[a]], m.vertices[t[b]]));
    return d;
}

// Orient tets positively, derive boundary faces and h.
void finalize_mesh(Mesh& m) {
    double scale = 0;
    for (auto& t : m.tets) scale = std::max(scale, tet_diameter(m, t));
    for (std::size_t e = 0; e < m.tets.size(); ++e) {
        auto& t = m.tets[e];
        const double v = signed_volume(m.vertices[t[0]], m.vertices[t[1]],
                                       m.vertices[t[2]], m.vertices[t[3]]);
        if (std::abs(v) < 1e-14 * scale * scale * scale)
            throw Error("degenerate tet (zero volume) at index " + std::to_string(e));
        if (v < 0) std::swap(t[2], t[3]);
    }

    std::map<std::array<int, 3>, std::pair<int, int>> face_count;  // face -> (count, tet)
    for (std::size_t e = 0; e < m.tets.size(); ++e) {
        const auto& t = m.tets[e];
        const int local[4][3] = {{1, 2, 3}, {0, 2, 3}, {0, 1, 3}, {0, 1, 2}};
        for (auto& f : local) {
            auto key = sorted_face(t[f[0]], t[f[1]], t[f[2]]);
            auto it = face_count.find(key);
            if (it == face_count.end())
                face_count.emplace(key, std::make_pair(1, static_cast<int>(e)));
            else {
                if (++it->second.first > 2)
                    throw Error("non-conforming mesh: face shared by more than two tets");
            }
        }
    }
    m.boundary_faces.clear();
    m.boundary_face_tet.clear();
    for (const auto& [face, ct] : face_count)
        if (ct.first == 1) {
            m.boundary_faces.push_back(face);
            m.boundary_face_tet.push_back(ct.second);
        }

    m.h = 0;
    for (auto& t : m.tets) m.h = std::max(m.h, tet_diameter(m, t));
}

// Structured box grid: (count+1)^3 vertices at coordinates (i+offset)/denom,
// 6 Kuhn tets per cell, vertices in lexicographic (x,y,z) order.
Mesh generate_box(int count, int offset, int denom, const std::string& tag) {
    Mesh m;
    m.domain_tag = tag;
    const int np = count + 1;
    auto vid = [np](int i, int j, int k) { return (i * np + j) * np + k; };
    m.vertices.reserve(static_cast<std::size_t>(np) * np * np);
    for (int i = 0; i < np; ++i)
        for (int j = 0; j < np; ++j)
            for (int k = 0; k < np; ++k)
                m.vertices.push_back({double(i + offset) / denom, double(j + offset) / denom,
                                      double(k + offset) / denom});

    static const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                                    {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
    m.tets.reserve(static_cast<std::size_t>(count) * count * count * 6);
    for (int i = 0; i < count; ++i)
        for (int j = 0; j < count; ++j)
            for (int k = 0; k < count; ++k)
                for (auto& p : perms) {
                    int c[3] = {i, j, k};
                    std::array<int, 4> t;
                    t[0] = vid(c[0], c[1], c[2]);
                    for (int s = 0; s < 3; ++s) {
                        ++c[p[s]];
                        t[s + 1] = vid(c[0], c[1], c[2]);
                    }
                    m.tets.push_back(t);
                }
    finalize_mesh(m);
    return m;
}

// Prism {x,y >= 0, x+y <= 1, 0 <= z <= 1}. Each grid cell is subdivided by
// the y-reflected Kuhn pattern (paths in (x, 1-y, z)), which respects the
// cutting plane x + y = 1; diagonal cells keep the 3 tets on the prism side.
Mesh generate_prism(int n) {
    Mesh m;
    m.domain_tag = "prism";
    const int np = n + 1;
    std::vector<int> vid(static_cast<std::size_t>(np) * np * np, -1);
    auto vidx = [np](int i, int j, int k) { return (i * np + j) * np + k; };
    for (int i = 0; i < np; ++i)
        for (int j = 0; j < np; ++j)
            for (int k = 0; k < np; ++k)
                if (i + j <= n) {
                    vid[vidx(i, j, k)] = static_cast<int>(m.vertices.size());
                    m.vertices.push_back({double(i) / n, double(j) / n, double(k) / n});
                }

    // Paths start at the cell corner (i, j+1, k) and step along +x, -y, +z.
    static const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                                    {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
    static const int step[3][3] = {{1, 0, 0}, {0, -1, 0}, {0, 0, 1}};
    for (int i = 0; i < n; ++i)
        for (int j = 0; j + i < n; ++j)
            for (int k = 0; k < n; ++k) {
                const bool diagonal = (i + j == n - 1);
                for (auto& p : perms) {
                    // Keep the half u <= v, i.e. the -y step before the +x step.
                    if (diagonal) {
                        int pos_u = 0, pos_v = 0;
                        for (int s = 0; s < 3; ++s) {
                            if (p[s] == 0) pos_u = s;
                            if (p[s] == 1) pos_v = s;
                        }
                        if (pos_u < pos_v) continue;
                    }
                    int c[3] = {i, j + 1, k};
                    std::array<int, 4> t;
                    t[0] = vid[vidx(c[0], c[1], c[2])];
                    for (int s = 0; s < 3; ++s) {
                        c[0] += step[p[s]][0];
                        c[1] += step[p[s]][1];
                        c[2] += step[p[s]][2];
                        t[s + 1] = vid[vidx(c[0], c[1], c[2])];
                    }
                    for (int v : t)
                        if (v < 0) throw Error("prism generator indexed a vertex outside the domain");
                    m.tets.push_back(t);
                }
            }
    finalize_mesh(m);
    return m;
}

}  // namespace

Mesh generate_structured(Domain domain, int cells_per_edge) {
    if (cells_per_edge < 1) throw Error("cells_per_edge must be >= 1");
    switch (domain) {
        case Domain::unit_cube:
            return generate_box(cells_per_edge, 0, cells_per_edge, "cube");
        case Domain::prism:
            return generate_prism(cells_per_edge);
    }
    throw Error("unsupported domain");
}

std::vector<std::array<int, 2>> mesh_edges(const Mesh& mesh) {
    std::vector<std::array<int, 2>> edges;
    edges.reserve(mesh.tets.size() * 6);
    for (const auto& t : mesh.tets)
        for (int a = 0; a < 4; ++a)
            for (int b = a + 1; b < 4; ++b)
                edges.push_back({std::min(t[a], t[b]), std::max(t[a], t[b])});
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    return edges;
}

Mesh refine(const Mesh& mesh) {
    validate_mesh(mesh);
    const auto edges = mesh_edges(mesh);
    const int nv = static_cast<int>(mesh.vertices.size());

    Mesh fine;
    fine.domain_tag = mesh.domain_tag;
    fine.vertices = mesh.vertices;
    fine.vertices.reserve(nv + edges.size());
    std::map<std::array<int, 2>, int> midpoint;
    for (const auto& e : edges) {
        midpoint[e] = static_cast<int>(fine.vertices.size());
        fine.vertices.push_back((mesh.vertices[e[0]] + mesh.vertices[e[1]]) * 0.5);
    }
    auto mid = [&](int a, int b) {
        return midpoint.at({std::min(a, b), std::max(a, b)});
    };

    fine.tets.reserve(mesh.tets.size() * 8);
    for (const auto& tet : mesh.tets) {
        std::array<int, 4> v = tet;
        std::sort(v.begin(), v.end());
        const int m01 = mid(v[0], v[1]), m02 = mid(v[0], v[2]), m03 = mid(v[0], v[3]);
        const int m12 = mid(v[1], v[2]), m13 = mid(v[1], v[3]), m23 = mid(v[2], v[3]);

        fine.tets.push_back({v[0], m01, m02, m03});
        fine.tets.push_back({v[1], m01, m12, m13});
        fine.tets.push_back({v[2], m02, m12, m23});
        fine.tets.push_back({v[3], m03, m13, m23});

        // Octahedron diagonals with their equator cycles. The equator lists
        // the remaining four midpoints so that neighbours share a tet vertex.
        // Each diagonal bisects a pair of opposite tet edges; the selection
        // key is purely metric (congruence-invariant) so that congruence
        // classes are stable under repeated refinement, with vertex indices
        // as the last resort for fully symmetric tets.
        struct Diag {
            int p, q;
            std::array<int, 4> equator;
            std::array<int, 2> e1, e2;  // the opposite parent edges it bisects
        };
        const Diag cand[3] = {
            {m01, m23, {m02, m03, m13, m12}, {v[0], v[1]}, {v[2], v[3]}},
            {m02, m13, {m01, m03, m23, m12}, {v[0], v[2]}, {v[1], v[3]}},
            {m03, m12, {m01, m02, m23, m13}, {v[0], v[3]}, {v[1], v[2]}},
        };
        auto edge_len = [&](const std::array<int, 2>& e) {
            return distance(mesh.vertices[e[0]], mesh.vertices[e[1]]);
        };
        std::array<std::array<double, 3>, 3> key;  // (diag, max pair edge, min pair edge)
        for (int c = 0; c < 3; ++c) {
            const double len = distance(fine.vertices[cand[c].p], fine.vertices[cand[c].q]);
            const double l1 = edge_len(cand[c].e1), l2 = edge_len(cand[c].e2);
            key[c] = {len, std::max(l1, l2), std::min(l1, l2)};
        }
        auto metric_less = [](const std::array<double, 3>& a, const std::array<double, 3>& b) {
            for (int k = 0; k < 3; ++k) {
                if (a[k] < b[k] * (1.0 - 1e-12)) return true;
                if (a[k] > b[k] * (1.0 + 1e-12)) return false;
            }
            return false;  // metric tie; defer to vertex indices
        };
        int pick = 0;
        for (int c = 1; c < 3; ++c)
            if (metric_less(key[c], key[pick])) pick = c;
        const Diag& d = cand[pick];
        for (int s = 0; s < 4; ++s)
            fine.tets.push_back({d.p, d.q, d.equator[s], d.equator[(s + 1) % 4]});
    }
    finalize_mesh(fine);
    return fine;
}

namespace {

void tet_dihedrals(const Mesh& m, const std::array<int, 4>& t, double& lo, double& hi) {
    Vec3 p[4] = {m.vertices[t[0]], m.vertices[t[1]], m.vertices[t[2]], m.vertices[t[3]]};
    Vec3 n[4];  // outward normal of face opposite vertex i
    for (int i = 0; i < 4; ++i) {
        const int f[3] = {(i + 1) % 4, (i + 2) % 4, (i + 3) % 4};
        Vec3 nn = cross(p[f[1]] - p[f[0]], p[f[2]] - p[f[0]]);
        if (dot(nn, p[i] - p[f[0]]) > 0) nn = nn * -1.0;
        n[i] = nn * (1.0 / norm(nn));
    }
    // Edge (a,b) is shared by the faces opposite the other two vertices.
    for (int a = 0; a < 4; ++a)
        for (int b = a + 1; b < 4; ++b) {
            int others[2], c = 0;
            for (int i = 0; i < 4; ++i)
                if (i != a && i != b) others[c++] = i;
            const double cosang = std::clamp(-dot(n[others[0]], n[others[1]]), -1.0, 1.0);
            const double ang = std::acos(cosang) * 180.0 / M_PI;
            lo = std::min(lo, ang);
            hi = std::max(hi, ang);
        }
}

}  // namespace

double tet_volume(const Mesh& mesh, int e) {
    const auto& t = mesh.tets[e];
    return signed_volume(mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]],
                         mesh.vertices[t[3]]);
}

double mesh_volume(const Mesh& mesh) {
    double v = 0;
    for (std::size_t e = 0; e < mesh.tets.size(); ++e) v += tet_volume(mesh, static_cast<int>(e));
    return v;
}

double boundary_area(const Mesh& mesh) {
    double a = 0;
    for (const auto& f : mesh.boundary_faces) {
        const Vec3 u = mesh.vertices[f[1]] - mesh.vertices[f[0]];
        const Vec3 w = mesh.vertices[f[2]] - mesh.vertices[f[0]];
        a += 0.5 * norm(cross(u, w));
    }
    return a;
}

QuasiUniformityReport mesh_metrics(const Mesh& mesh) {
    QuasiUniformityReport r;
    r.h = 0;
    r.min_inradius = std::numeric_limits<double>::max();
    r.min_dihedral_deg = 360;
    r.max_dihedral_deg = 0;
    double scale = 0;
    for (const auto& t : mesh.tets) scale = std::max(scale, tet_diameter(mesh, t));
    for (std::size_t e = 0; e < mesh.tets.size(); ++e) {
        const auto& t = mesh.tets[e];
        const double vol = std::abs(tet_volume(mesh, static_cast<int>(e)));
        if (vol < 1e-14 * scale * scale * scale)
            throw Error("degenerate tet at index " + std::to_string(e));
        double area = 0;
        const int faces[4][3] = {{1, 2, 3}, {0, 2, 3}, {0, 1, 3}, {0, 1, 2}};
        for (auto& f : faces) {
            const Vec3 u = mesh.vertices[t[f[1]]] - mesh.vertices[t[f[0]]];
            const Vec3 w = mesh.vertices[t[f[2]]] - mesh.vertices[t[f[0]]];
            area += 0.5 * norm(cross(u, w));
        }
        r.min_inradius = std::min(r.min_inradius, 3.0 * vol / area);
        r.h = std::max(r.h, tet_diameter(mesh, t));
        tet_dihedrals(mesh, t, r.min_dihedral_deg, r.max_dihedral_deg);
    }
    r.ratio = r.min_inradius / r.h;
    return r;
}

namespace {

// Closest-point distance from p to triangle (a,b,c), Ericson's region test.
double point_triangle_distance(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
    const Vec3 ab = b - a, ac = c - a, ap = p - a;
    const double d1 = dot(ab, ap), d2 = dot(ac, ap);
    if (d1 <= 0 && d2 <= 0) return distance(p, a);
    const Vec3 bp = p - b;
    const double d3 = dot(ab, bp), d4 = dot(ac, bp);
    if (d3 >= 0 && d4 <= d3) return distance(p, b);
    const double vc = d1 * d4 - d3 * d2;
    if (vc <= 0 && d1 >= 0 && d3 <= 0) {
        const double v = d1 / (d1 - d3);
        return distance(p, a + ab * v);
    }
    const Vec3 cp = p - c;
    const double d5 = dot(ab, cp), d6 = dot(ac, cp);
    if (d6 >= 0 && d5 <= d6) return distance(p, c);
    const double vb = d5 * d2 - d1 * d6;
    if (vb <= 0 && d2 >= 0 && d6 <= 0) {
        const double w = d2 / (d2 - d6);
        return distance(p, a + ac * w);
    }
    const double va = d3 * d6 - d5 * d4;
    if (va <= 0 && (d4 - d3) >= 0 && (d5 - d6) >= 0) {
        const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return distance(p, b + (c - b) * w);
    }
    const double denom = 1.0 / (va + vb + vc);
    const double v = vb * denom, w = vc * denom;
    return distance(p, a + ab * v + ac * w);
}

void bounding_box(const Mesh& m, Vec3& lo, Vec3& hi) {
    lo = hi = m.vertices.at(0);
    for (const auto& v : m.vertices)
        for (int c = 0; c < 3; ++c) {
            lo[c] = std::min(lo[c], v[c]);
            hi[c] = std::max(hi[c], v[c]);
        }
}

}  // namespace

double boundary_distance(const Mesh& mesh, const Vec3& p) {
    if (mesh.domain_tag.rfind("cube", 0) == 0) {
        Vec3 lo, hi;
        bounding_box(mesh, lo, hi);
        double d = std::numeric_limits<double>::max();
        for (int c = 0; c < 3; ++c) d = std::min({d, p[c] - lo[c], hi[c] - p[c]});
        return d;
    }
    if (mesh.domain_tag.rfind("prism", 0) == 0) {
        Vec3 lo, hi;
        bounding_box(mesh, lo, hi);
        const double s = hi.x - lo.x;  // unit prism scaled by s
        return std::min({p.x - lo.x, p.y - lo.y, p.z - lo.z, hi.z - p.z,
                         (s - (p.x - lo.x) - (p.y - lo.y)) / std::sqrt(2.0)});
    }
    double d = std::numeric_limits<double>::max();
    for (const auto& f : mesh.boundary_faces)
        d = std::min(d, point_triangle_distance(p, mesh.vertices[f[0]], mesh.vertices[f[1]],
                                                mesh.vertices[f[2]]));
    return d;
}

std::vector<int> boundary_layer(const Mesh& mesh, double width) {
    if (width <= 0) throw Error("boundary_layer width must be positive");
    std::vector<double> vdist(mesh.vertices.size());
    for (std::size_t v = 0; v < mesh.vertices.size(); ++v)
        vdist[v] = boundary_distance(mesh, mesh.vertices[v]);
    std::vector<int> out;
    for (std::size_t e = 0; e < mesh.tets.size(); ++e)
        for (int v : mesh.tets[e])
            if (vdist[v] < width) {
                out.push_back(static_cast<int>(e));
                break;
            }
    return out;
}

Vec3 barycenter(const Mesh& mesh, int e) {
    const auto& t = mesh.tets[e];
    return (mesh.vertices[t[0]] + mesh.vertices[t[1]] + mesh.vertices[t[2]] +
            mesh.vertices[t[3]]) *
           0.25;
}

Vec3 domain_centroid(const Mesh& mesh) {
    Vec3 c{0, 0, 0};
    double vol = 0;
    for (std::size_t e = 0; e < mesh.tets.size(); ++e) {
        const double v = tet_volume(mesh, static_cast<int>(e));
        c = c + barycenter(mesh, static_cast<int>(e)) * v;
        vol += v;
    }
    return c * (1.0 / vol);
}

double domain_diameter(const Mesh& mesh) {
    std::vector<int> bverts;
    {
        std::vector<char> seen(mesh.vertices.size(), 0);
        for (const auto& f : mesh.boundary_faces)
            for (int v : f) seen[v] = 1;
        for (std::size_t v = 0; v < mesh.vertices.size(); ++v)
            if (seen[v]) bverts.push_back(static_cast<int>(v));
    }
    double d = 0;
    for (std::size_t a = 0; a < bverts.size(); ++a)
        for (std::size_t b = a + 1; b < bverts.size(); ++b)
            d = std::max(d, distance(mesh.vertices[bverts[a]], mesh.vertices[bverts[b]]));
    return d;
}

AnnulusDecomposition annuli(const Mesh& mesh, const Vec3& x0, double rho) {
    if (rho <= 0) throw Error("annuli: rho must be positive");
    AnnulusDecomposition a;
    a.x0 = x0;
    a.rho = rho;
    a.R0 = domain_diameter(mesh);
    if (8.0 * rho > a.R0 * (1.0 + 1e-12))
        throw Error("annuli: rho too large (8*rho exceeds the domain diameter)");
    double t = std::log2(a.R0 / (8.0 * rho));
    if (std::abs(t - std::round(t)) < 1e-9) t = std::round(t);
    a.J = static_cast<int>(std::floor(t)) + 1;
    if (a.J < 0) throw Error("annuli: rho too large (J negative)");
    a.d.resize(a.J + 2);
    for (int j = 0; j <= a.J + 1; ++j) a.d[j] = a.R0 * std::pow(2.0, -j);
    if (!(2.0 * rho <= a.d[a.J + 1] * (1 + 1e-12) && a.d[a.J + 1] <= 4.0 * rho * (1 + 1e-12)))
        throw Error("annuli: bracket 2*rho <= d_{J+1} <= 4*rho violated");

    a.annuli.assign(a.J + 1, {});
    for (std::size_t e = 0; e < mesh.tets.size(); ++e) {
        const double r = distance(barycenter(mesh, static_cast<int>(e)), x0);
        if (r < a.d[a.J + 1]) {
            a.inner.push_back(static_cast<int>(e));
            continue;
        }
        int j = a.J;
        while (j > 0 && r >= a.d[j]) --j;  // now d[j+1] <= r < d[j] (or j == 0)
        a.annuli[j].push_back(static_cast<int>(e));
    }
    return a;
}

ExtensionEmbedding embed_in_extension(const Mesh& mesh, int pad_cells) {
    if (mesh.domain_tag != "cube")
        throw Error("embed_in_extension requires a structured cube mesh");
    if (pad_cells < 1) throw Error("pad_cells must be >= 1");
    // Infer n from the vertex count.
    const auto nv = mesh.vertices.size();
    int n = static_cast<int>(std::round(std::cbrt(double(nv)))) - 1;
    if (static_cast<std::size_t>(n + 1) * (n + 1) * (n + 1) != nv)
        throw Error("embed_in_extension: vertex count is not a structured grid");

    ExtensionEmbedding emb;
    emb.inner = mesh;
    emb.pad_cells = pad_cells;
    emb.outer = generate_box(n + 2 * pad_cells, -pad_cells, n, "cube");

    const int np_out = n + 2 * pad_cells + 1;
    emb.vertex_map.resize(nv);
    for (int i = 0; i <= n; ++i)
        for (int j = 0; j <= n; ++j)
            for (int k = 0; k <= n; ++k) {
                const int inner_id = (i * (n + 1) + j) * (n + 1) + k;
                const int outer_id =
                    ((i + pad_cells) * np_out + (j + pad_cells)) * np_out + (k + pad_cells);
                if (distance(mesh.vertices[inner_id], emb.outer.vertices[outer_id]) > 1e-12)
                    throw Error("embedding inconsistency: vertex coordinates do not match");
                emb.vertex_map[inner_id] = outer_id;
            }
    return emb;
}

void save_mesh(const Mesh& mesh, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path + " for writing");
    out << "tetmesh 1";
    if (!mesh.domain_tag.empty()) out << " " << mesh.domain_tag;
    out << "\n";
    char buf[96];
    out << "V " << mesh.vertices.size() << "\n";
    for (const auto& v : mesh.vertices) {
        std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g\n", v.x, v.y, v.z);
        out << buf;
    }
    out << "T " << mesh.tets.size() << "\n";
    for (const auto& t : mesh.tets)
        out << t[0] << " " << t[1] << " " << t[2] << " " << t[3] << "\n";
    if (!out) throw Error("write failure on " + path);
}

namespace {

std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> tok;
    std::istringstream in(s);
    std::string t;
    while (in >> t) tok.push_back(t);
    return tok;
}

[[noreturn]] void parse_fail(const std::string& path, int line, const std::string& what) {
    throw Error(path + ":" + std::to_string(line) + ": " + what);
}

}  // namespace

Mesh load_mesh(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    Mesh m;
    std::string line;
    int lineno = 0;
    auto next_line = [&]() -> std::vector<std::string> {
        while (std::getline(in, line)) {
            ++lineno;
            auto tok = split_ws(line);
            if (!tok.empty()) return tok;
        }
        parse_fail(path, lineno, "unexpected end of file");
    };

    auto tok = next_line();
    if (tok.size() < 2 || tok[0] != "tetmesh" || tok[1] != "1")
        parse_fail(path, lineno, "expected header 'tetmesh 1'");
    if (tok.size() >= 3) m.domain_tag = tok[2];

    tok = next_line();
    if (tok.size() != 2 || tok[0] != "V") parse_fail(path, lineno, "expected 'V <count>'");
    const long nv = std::stol(tok[1]);
    if (nv <= 0) parse_fail(path, lineno, "vertex count must be positive");
    m.vertices.reserve(nv);
    for (long i = 0; i < nv; ++i) {
        tok = next_line();
        if (tok.size() != 3)
            parse_fail(path, lineno, "expected 3 coordinates, got " + std::to_string(tok.size()));
        try {
            m.vertices.push_back({std::stod(tok[0]), std::stod(tok[1]), std::stod(tok[2])});
        } catch (const std::exception&) {
            parse_fail(path, lineno, "bad coordinate value");
        }
    }

    tok = next_line();
    if (tok.size() != 2 || tok[0] != "T") parse_fail(path, lineno, "expected 'T <count>'");
    const long nt = std::stol(tok[1]);
    if (nt <= 0) parse_fail(path, lineno, "tet count must be positive");
    m.tets.reserve(nt);
    for (long i = 0; i < nt; ++i) {
        tok = next_line();
        if (tok.size() != 4)
            parse_fail(path, lineno, "expected 4 vertex indices, got " + std::to_string(tok.size()));
        std::array<int, 4> t;
        for (int c = 0; c < 4; ++c) {
            try {
                t[c] = std::stoi(tok[c]);
            } catch (const std::exception&) {
                parse_fail(path, lineno, "bad vertex index");
            }
            if (t[c] < 0 || t[c] >= nv) parse_fail(path, lineno, "vertex index out of range");
        }
        m.tets.push_back(t);
    }

    finalize_mesh(m);
    validate_mesh(m);
    return m;
}

void validate_mesh(const Mesh& mesh) {
    if (mesh.tets.empty()) throw Error("mesh has no tets");

    // Duplicate vertices.
    std::vector<int> order(mesh.vertices.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        const Vec3 &u = mesh.vertices[a], &v = mesh.vertices[b];
        if (u.x != v.x) return u.x < v.x;
        if (u.y != v.y) return u.y < v.y;
        return u.z < v.z;
    });
    for (std::size_t i = 1; i < order.size(); ++i)
        if (distance(mesh.vertices[order[i - 1]], mesh.vertices[order[i]]) < 1e-12 * (mesh.h + 1))
            throw Error("duplicate vertices " + std::to_string(order[i - 1]) + " and " +
                        std::to_string(order[i]));

    for (std::size_t e = 0; e < mesh.tets.size(); ++e) {
        const auto& t = mesh.tets[e];
        for (int a = 0; a < 4; ++a)
            for (int b = a + 1; b < 4; ++b)
                if (t[a] == t[b])
                    throw Error("tet " + std::to_string(e) + " repeats a vertex");
        if (tet_volume(mesh, static_cast<int>(e)) <= 0)
            throw Error("tet " + std::to_string(e) + " has nonpositive volume");
    }

    // Face counts and connectivity across shared faces.
    std::map<std::array<int, 3>, std::vector<int>> faces;
    for (std::size_t e = 0; e < mesh.tets.size(); ++e) {
        const auto& t = mesh.tets[e];
        const int local[4][3] = {{1, 2, 3}, {0, 2, 3}, {0, 1, 3}, {0, 1, 2}};
        for (auto& f : local)
            faces[sorted_face(t[f[0]], t[f[1]], t[f[2]])].push_back(static_cast<int>(e));
    }
    std::vector<std::vector<int>> adj(mesh.tets.size());
    for (const auto& [face, owners] : faces) {
        if (owners.size() > 2) throw Error("face shared by more than two tets");
        if (owners.size() == 2) {
            adj[owners[0]].push_back(owners[1]);
            adj[owners[1]].push_back(owners[0]);
        }
    }
    std::vector<char> seen(mesh.tets.size(), 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    std::size_t count = 1;
    while (!stack.empty()) {
        const int e = stack.back();
        stack.pop_back();
        for (int o : adj[e])
            if (!seen[o]) {
                seen[o] = 1;
                ++count;
                stack.push_back(o);
            }
    }
    if (count != mesh.tets.size())
        throw Error("mesh is not connected (" + std::to_string(count) + " of " +
                    std::to_string(mesh.tets.size()) + " tets reachable)");

    // Boundary faces must form closed loops: every boundary edge is shared
    // by exactly two boundary faces.
    std::map<std::array<int, 2>, int> bedge;
    for (const auto& f : mesh.boundary_faces) {
        for (int a = 0; a < 3; ++a)
            for (int b = a + 1; b < 3; ++b)
                ++bedge[{std::min(f[a], f[b]), std::max(f[a], f[b])}];
    }
    for (const auto& [e, c] : bedge)
        if (c != 2)
            throw Error("boundary is not closed at edge (" + std::to_string(e[0]) + "," +
                        std::to_string(e[1]) + ")");
}

}  // namespace wmplab
