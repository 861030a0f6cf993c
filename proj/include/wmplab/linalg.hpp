#ifndef WMPLAB_LINALG_HPP
#define WMPLAB_LINALG_HPP

#include <cstddef>
#include <vector>

namespace wmplab {

/// Row-compressed sparse matrix. Column indices are strictly increasing
/// within each row.
struct SparseMatrix {
    int n = 0;  // rows
    int m = 0;  // cols
    std::vector<int> row_offsets;
    std::vector<int> col_indices;
    std::vector<double> values;
    bool symmetric = false;

    double& at(int i, int j);  // entry must exist in the pattern
};

/// Build a CSR matrix from an (i, j) pattern; duplicate pairs are merged.
SparseMatrix build_pattern(int rows, int cols, std::vector<std::pair<int, int>> entries,
                           bool symmetric);

std::vector<double> spmv(const SparseMatrix& A, const std::vector<double>& x);

struct SolveStats {
    int iterations = 0;
    double final_relative_residual = 0;
    double seconds = 0;
};

enum class Precond { none, jacobi };

struct CgResult {
    std::vector<double> x;
    SolveStats stats;
    bool converged = false;
};

/// Conjugate gradients for SPD systems; deterministic (fixed reduction
/// order). Throws on an indefinite direction; returns the best iterate
/// with converged=false when maxit is exceeded.
CgResult cg_solve(const SparseMatrix& A, const std::vector<double>& b, double tol, int maxit,
                  Precond precond);

/// Independent right-hand sides, optionally across threads; per-column
/// results are identical regardless of batch order or thread count.
std::vector<CgResult> solve_multi(const SparseMatrix& A,
                                  const std::vector<std::vector<double>>& rhs, double tol,
                                  int maxit, Precond precond, int threads);

struct DenseMatrix {
    int rows = 0, cols = 0;
    std::vector<double> a;  // row-major

    double& operator()(int i, int j) { return a[static_cast<std::size_t>(i) * cols + j]; }
    double operator()(int i, int j) const { return a[static_cast<std::size_t>(i) * cols + j]; }
};

DenseMatrix to_dense(const SparseMatrix& A);

/// LU with partial pivoting (oracle; n <= 2000). Throws on singular input.
std::vector<double> dense_solve(DenseMatrix A, std::vector<double> b);

}  // namespace wmplab

#endif
