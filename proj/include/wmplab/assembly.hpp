#ifndef WMPLAB_ASSEMBLY_HPP
#define WMPLAB_ASSEMBLY_HPP

#include <functional>

#include "wmplab/fe_space.hpp"
#include "wmplab/linalg.hpp"

namespace wmplab {

/// Quadrature on the reference tetrahedron: barycentric points with
/// weights normalized to the reference volume (sum 1/6).
struct QuadratureRule {
    int degree = 0;
    std::vector<std::array<double, 4>> points;
    std::vector<double> weights;
};

/// Supported exactness degrees: 1, 2, 4, 6.
const QuadratureRule& quadrature(int degree);

using ScalarField = std::function<double(const Vec3&)>;
using VectorField = std::function<Vec3(const Vec3&)>;

/// Full stiffness matrix (nabla phi_i, nabla phi_j) over all dofs,
/// exact quadrature, deterministic element-order accumulation.
SparseMatrix assemble_stiffness(const FeSpace& space);

std::vector<double> assemble_load(const FeSpace& space, const ScalarField& f, int qdegree);
std::vector<double> assemble_grad_load(const FeSpace& space, const VectorField& g, int qdegree);

/// Interior/interior and interior/boundary blocks of K, rows and columns
/// renumbered by class rank. Throws when the interior set is empty.
struct DofSplit {
    SparseMatrix K_II;
    SparseMatrix K_IB;
};
DofSplit split_dofs(const FeSpace& space, const SparseMatrix& K);

struct ErrorNorms {
    double l2 = 0;
    double h1_semi = 0;
    double l1_grad = 0;
};

/// Reference field evaluated at physical points; the element index of the
/// enclosing coarse element is passed through for surrogate evaluators.
struct ExactField {
    std::function<double(int elem, const Vec3&)> value;
    std::function<Vec3(int elem, const Vec3&)> gradient;
};

ExactField exact_from_functions(const ScalarField& u, const VectorField& grad_u);

ErrorNorms error_norms(const FeFunction& f, const ExactField& exact, int qdegree,
                       const std::vector<int>* subset = nullptr);

/// Max over the order-m element lattice of |f - exact|.
double sup_error(const FeFunction& f, const std::function<double(int, const Vec3&)>& exact,
                 int sample_order, const std::vector<int>* subset = nullptr);

void export_matrix(const SparseMatrix& A, const std::string& path);  // "i j value" lines

}  // namespace wmplab

#endif
