#ifndef WMPLAB_FE_SPACE_HPP
#define WMPLAB_FE_SPACE_HPP

#include <functional>

#include "wmplab/geometry.hpp"

namespace wmplab {

/// Lagrange finite element space of degree 1 or 2 on a tetrahedral mesh.
/// Dof order: mesh vertices first, then (degree 2) edge midpoints with
/// edges sorted by (lo, hi) endpoint index.
struct FeSpace {
    const Mesh* mesh = nullptr;
    int degree = 1;
    std::vector<Vec3> dof_coords;
    std::vector<std::array<int, 2>> edges;       // degree 2 only
    std::vector<std::array<int, 6>> tet_edges;   // per tet: global edge ids, local
                                                 // edge order (01,02,03,12,13,23)
    std::vector<uint8_t> dof_on_boundary;
    std::vector<int> boundary_dofs;
    std::vector<int> interior_dofs;
    std::vector<int> dof_rank;  // rank within its class (interior or boundary)

    int ndofs() const { return static_cast<int>(dof_coords.size()); }
    int dofs_per_element() const { return degree == 1 ? 4 : 10; }
    void element_dofs(int e, int* out) const;  // out has dofs_per_element() slots
};

struct FeFunction {
    const FeSpace* space = nullptr;
    std::vector<double> coeffs;
};

FeSpace build_space(const Mesh& mesh, int degree);

/// Shape values / barycentric-gradient weights at a barycentric point.
/// For gradients the caller contracts with the element's lambda-gradients.
void shape_values(int degree, const std::array<double, 4>& bary, double* out);

/// Gradients of the element's lambda functions (constant per element).
/// grads[0..3] are nabla lambda_i; also returns det of the affine map.
double lambda_gradients(const Mesh& mesh, int e, Vec3 grads[4]);

double evaluate(const FeFunction& f, int elem, const std::array<double, 4>& bary);
Vec3 evaluate_gradient(const FeFunction& f, int elem, const std::array<double, 4>& bary);

/// Barycentric coordinates of a physical point w.r.t. element e.
std::array<double, 4> barycentric_coords(const Mesh& mesh, int e, const Vec3& p);

FeFunction interpolate_nodal(const FeSpace& space, const std::function<double(const Vec3&)>& f);

enum class DofClass { interior, boundary };
FeFunction nodal_mask(const FeFunction& f, DofClass keep);

/// Max |f| over the order-m barycentric lattice of every element
/// (exact for degree 1; a convergent lower bound for degree 2).
double sup_norm(const FeFunction& f, int sample_order);
double boundary_sup_norm(const FeFunction& f, int sample_order);

/// Nodal values of outer_f copied onto the inner space through the embedding.
FeFunction transfer_to_extension(const ExtensionEmbedding& emb, const FeSpace& outer_space,
                                 const FeFunction& outer_f, const FeSpace& inner_space);

/// Dof values of f on the boundary, indexed like space.boundary_dofs.
std::vector<double> boundary_trace(const FeSpace& space,
                                   const std::function<double(const Vec3&)>& g);

void export_csv(const FeFunction& f, const std::string& path);

}  // namespace wmplab

#endif
