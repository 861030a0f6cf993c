#ifndef WMPLAB_HARMONIC_HPP
#define WMPLAB_HARMONIC_HPP

#include "wmplab/assembly.hpp"

namespace wmplab {

struct HarmonicExtension {
    FeFunction u;
    SolveStats stats;
    double interior_residual = 0;  // max_i |(K u)_i| over interior dofs
};

/// Discrete harmonic extension of nodal boundary data g (indexed like
/// space.boundary_dofs): boundary coeffs g, interior solving
/// K_II u_I = -K_IB g.
HarmonicExtension harmonic_extend(const FeSpace& space, const std::vector<double>& g,
                                  double tol = 1e-12, int maxit = 100000);

struct RitzResult {
    FeFunction u;
    SolveStats stats;
    double boundary_node_max = 0;  // max |u| sampled at boundary dof nodes
};

/// Energy projection onto the zero-boundary subspace: interior coeffs
/// solve K_II x = (grad u, grad phi_i); boundary coeffs zero. Warns on
/// stderr when u fails to vanish at boundary nodes.
RitzResult ritz_project(const FeSpace& space, const ScalarField& u, const VectorField& grad_u,
                        double tol = 1e-12, int qdegree = -1);

struct SourceResult {
    FeFunction u;
    SolveStats stats;
};

/// Zero-boundary solution of (grad v_h, grad chi) = (f, chi).
SourceResult fem_solve_source(const FeSpace& space, const ScalarField& f, double tol = 1e-12,
                              int qdegree = -1);

/// Degree-r polynomial density on one element reproducing point evaluation:
/// integral of chi_h * delta equals chi_h(x0) for every chi_h in S_h.
struct RegularizedDelta {
    int element = -1;
    Vec3 x0;
    std::vector<double> local_coeffs;  // coefficients in the element's local basis
};

RegularizedDelta regularized_delta(const FeSpace& space, const Vec3& x0);
double delta_l2_norm(const FeSpace& space, const RegularizedDelta& d);
double integrate_against(const FeSpace& space, const RegularizedDelta& d, const FeFunction& chi);

struct GreenResult {
    FeFunction g;
    RegularizedDelta delta;
    SolveStats stats;
};

/// Zero-boundary solve with the regularized delta as source; satisfies the
/// representation identity w_h(x0) = (grad w_h, grad G_h) for w_h with zero
/// boundary values.
GreenResult discrete_green(const FeSpace& space, const Vec3& x0, double tol = 1e-12);

struct LebesgueResult {
    double c_h = 0;        // max over the sample lattice
    double nodal_c_h = 0;  // max over dof nodes
    Vec3 argmax;
    std::vector<double> profile;  // per-dof Lebesgue function values
    long cg_iterations = 0;
    bool used_adjoint = false;
};

/// Operator norm of discrete harmonic extension from nodal-max boundary
/// data to the sampled sup norm: max over sample points of
/// sum_j |(E_h phi_j)(x)| over boundary basis functions. Forward mode
/// solves one system per boundary dof; when the dense extension table
/// would exceed budget_doubles, the adjoint mode solves one system per
/// sample point instead.
LebesgueResult lebesgue_constant(const FeSpace& space, int sample_order, double tol = 1e-12,
                                 int threads = 1, std::size_t budget_doubles = std::size_t(1) << 28);

/// Element containing p (all barycentric coords >= -1e-12); ties broken by
/// lowest element index. Throws when p is outside the mesh.
int locate_point(const Mesh& mesh, const Vec3& p);

/// (grad a, grad b) over the whole mesh via the stiffness form, computed
/// element-wise (no assembled matrix required).
double dirichlet_inner(const FeFunction& a, const FeFunction& b);

/// max_i |(K w)_i| over interior dofs: how far w is from discrete harmonic.
double galerkin_interior_residual(const FeSpace& space, const FeFunction& w);

double h1_norm(const FeFunction& f);

}  // namespace wmplab

#endif
