#ifndef WMPLAB_GEOMETRY_HPP
#define WMPLAB_GEOMETRY_HPP

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace wmplab {

struct Vec3 {
    double x = 0, y = 0, z = 0;

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }
    double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
};

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
double norm(const Vec3& a);
double distance(const Vec3& a, const Vec3& b);

/// Error type for all mesh/solver failures; carries a plain message.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

enum class Domain { unit_cube, prism };
Domain parse_domain(const std::string& tag);

/// Conforming tetrahedral mesh of a convex polyhedron.
/// Tets are positively oriented; boundary faces are derived (faces incident
/// to exactly one tet) and stored as sorted vertex triples alongside the
/// owning tet index.
struct Mesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 4>> tets;
    std::vector<std::array<int, 3>> boundary_faces;
    std::vector<int> boundary_face_tet;  // owning tet per boundary face
    double h = 0;                        // max element diameter
    std::string domain_tag;
};

struct QuasiUniformityReport {
    double h = 0;
    double min_inradius = 0;
    double ratio = 0;  // min_inradius / h
    double min_dihedral_deg = 0;
    double max_dihedral_deg = 0;
};

/// Dyadic decomposition around x0: d[j] = R0 * 2^-j for j = 0..J+1,
/// elements binned by barycenter distance. Elements closer than d[J+1]
/// form the inner ball set.
struct AnnulusDecomposition {
    Vec3 x0;
    double rho = 0;
    double R0 = 0;
    int J = 0;
    std::vector<double> d;                 // size J+2
    std::vector<std::vector<int>> annuli;  // size J+1
    std::vector<int> inner;
};

struct ExtensionEmbedding {
    Mesh inner;
    Mesh outer;
    std::vector<int> vertex_map;  // inner vertex -> outer vertex
    int pad_cells = 0;
};

Mesh generate_structured(Domain domain, int cells_per_edge);
Mesh refine(const Mesh& mesh);  // children of tet e occupy indices [8e, 8e+8)
QuasiUniformityReport mesh_metrics(const Mesh& mesh);
std::vector<int> boundary_layer(const Mesh& mesh, double width);
AnnulusDecomposition annuli(const Mesh& mesh, const Vec3& x0, double rho);
ExtensionEmbedding embed_in_extension(const Mesh& mesh, int pad_cells);
void save_mesh(const Mesh& mesh, const std::string& path);
Mesh load_mesh(const std::string& path);

/// Structural conformity checks (orientation, face counts, connectivity,
/// duplicate vertices). Throws Error on violation.
void validate_mesh(const Mesh& mesh);

double tet_volume(const Mesh& mesh, int e);
double mesh_volume(const Mesh& mesh);
double boundary_area(const Mesh& mesh);
Vec3 barycenter(const Mesh& mesh, int e);
Vec3 domain_centroid(const Mesh& mesh);
double domain_diameter(const Mesh& mesh);

/// Distance from a point inside the domain to the boundary. Exact plane
/// distances for the structured cube/prism tags, point-to-triangle over
/// boundary faces otherwise.
double boundary_distance(const Mesh& mesh, const Vec3& p);

/// Sorted list of mesh edges (pairs of vertex indices, lo < hi).
std::vector<std::array<int, 2>> mesh_edges(const Mesh& mesh);

}  // namespace wmplab

#endif
