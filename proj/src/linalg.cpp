#include "wmplab/linalg.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>

#include "wmplab/geometry.hpp"  // Error

namespace wmplab {

double& SparseMatrix::at(int i, int j) {
    for (int k = row_offsets[i]; k < row_offsets[i + 1]; ++k)
        if (col_indices[k] == j) return values[k];
    throw Error("entry (" + std::to_string(i) + "," + std::to_string(j) + ") not in pattern");
}

SparseMatrix build_pattern(int rows, int cols, std::vector<std::pair<int, int>> entries,
                           bool symmetric) {
    std::sort(entries.begin(), entries.end());
    entries.erase(std::unique(entries.begin(), entries.end()), entries.end());
    SparseMatrix A;
    A.n = rows;
    A.m = cols;
    A.symmetric = symmetric;
    A.row_offsets.assign(rows + 1, 0);
    for (const auto& [i, j] : entries) ++A.row_offsets[i + 1];
    for (int i = 0; i < rows; ++i) A.row_offsets[i + 1] += A.row_offsets[i];
    A.col_indices.resize(entries.size());
    for (std::size_t k = 0; k < entries.size(); ++k) A.col_indices[k] = entries[k].second;
    A.values.assign(entries.size(), 0.0);
    return A;
}

std::vector<double> spmv(const SparseMatrix& A, const std::vector<double>& x) {
    if (static_cast<int>(x.size()) != A.m) throw Error("spmv: dimension mismatch");
    std::vector<double> y(A.n);
    for (int i = 0; i < A.n; ++i) {
        double s = 0;
        for (int k = A.row_offsets[i]; k < A.row_offsets[i + 1]; ++k)
            s += A.values[k] * x[A.col_indices[k]];
        y[i] = s;
    }
    return y;
}

namespace {

double dot_seq(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(const std::vector<double>& a) { return std::sqrt(dot_seq(a, a)); }

}  // namespace

CgResult cg_solve(const SparseMatrix& A, const std::vector<double>& b, double tol, int maxit,
                  Precond precond) {
    if (A.n != A.m) throw Error("cg_solve: matrix must be square");
    if (static_cast<int>(b.size()) != A.n) throw Error("cg_solve: dimension mismatch");
    if (!(tol > 0 && tol < 1)) throw Error("cg_solve: tol must be in (0,1)");
    const auto t0 = std::chrono::steady_clock::now();

    CgResult res;
    res.x.assign(A.n, 0.0);
    const double bnorm = norm2(b);
    if (bnorm == 0.0) {
        res.converged = true;
        return res;
    }

    std::vector<double> diag_inv;
    if (precond == Precond::jacobi) {
        diag_inv.resize(A.n);
        for (int i = 0; i < A.n; ++i) {
            double d = 0;
            for (int k = A.row_offsets[i]; k < A.row_offsets[i + 1]; ++k)
                if (A.col_indices[k] == i) d = A.values[k];
            if (d <= 0) throw Error("cg_solve: nonpositive diagonal, matrix not SPD");
            diag_inv[i] = 1.0 / d;
        }
    }

    std::vector<double> r = b;  // x0 = 0
    std::vector<double> z(A.n);
    auto apply_precond = [&](const std::vector<double>& in, std::vector<double>& out) {
        if (precond == Precond::jacobi)
            for (int i = 0; i < A.n; ++i) out[i] = diag_inv[i] * in[i];
        else
            out = in;
    };
    apply_precond(r, z);
    std::vector<double> p = z;
    double rz = dot_seq(r, z);

    int it = 0;
    double rnorm = norm2(r);
    while (rnorm > tol * bnorm && it < maxit) {
        const std::vector<double> Ap = spmv(A, p);
        const double pAp = dot_seq(p, Ap);
        if (pAp <= 0) throw Error("cg_solve: indefinite direction (p'Ap <= 0), matrix not SPD");
        const double alpha = rz / pAp;
        for (int i = 0; i < A.n; ++i) {
            res.x[i] += alpha * p[i];
            r[i] -= alpha * Ap[i];
        }
        apply_precond(r, z);
        const double rz_new = dot_seq(r, z);
        const double beta = rz_new / rz;
        for (int i = 0; i < A.n; ++i) p[i] = z[i] + beta * p[i];
        rz = rz_new;
        rnorm = norm2(r);
        ++it;
    }

    // True residual for the reported figure.
    std::vector<double> rr = spmv(A, res.x);
    for (int i = 0; i < A.n; ++i) rr[i] = b[i] - rr[i];
    res.stats.iterations = it;
    res.stats.final_relative_residual = norm2(rr) / bnorm;
    res.converged = res.stats.final_relative_residual <= tol * 1.001 || rnorm <= tol * bnorm;
    res.stats.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

std::vector<CgResult> solve_multi(const SparseMatrix& A,
                                  const std::vector<std::vector<double>>& rhs, double tol,
                                  int maxit, Precond precond, int threads) {
    std::vector<CgResult> out(rhs.size());
    if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
    threads = std::max(1, std::min<int>(threads, static_cast<int>(rhs.size())));

    std::mutex err_mutex;
    std::exception_ptr first_error = nullptr;
    auto worker = [&](int tid) {
        for (std::size_t c = tid; c < rhs.size(); c += threads) {
            try {
                out[c] = cg_solve(A, rhs[c], tol, maxit, precond);
                if (!out[c].converged)
                    throw Error("solve_multi: column " + std::to_string(c) +
                                " did not converge in " + std::to_string(maxit) + " iterations");
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    if (threads == 1) {
        worker(0);
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker, t);
        for (auto& t : pool) t.join();
    }
    if (first_error) std::rethrow_exception(first_error);
    return out;
}

DenseMatrix to_dense(const SparseMatrix& A) {
    DenseMatrix D;
    D.rows = A.n;
    D.cols = A.m;
    D.a.assign(static_cast<std::size_t>(A.n) * A.m, 0.0);
    for (int i = 0; i < A.n; ++i)
        for (int k = A.row_offsets[i]; k < A.row_offsets[i + 1]; ++k)
            D(i, A.col_indices[k]) = A.values[k];
    return D;
}

std::vector<double> dense_solve(DenseMatrix A, std::vector<double> b) {
    if (A.rows != A.cols) throw Error("dense_solve: matrix must be square");
    const int n = A.rows;
    if (n > 2000) throw Error("dense_solve: n exceeds the 2000 oracle limit");
    if (static_cast<int>(b.size()) != n) throw Error("dense_solve: dimension mismatch");

    double scale = 0;
    for (double v : A.a) scale = std::max(scale, std::abs(v));
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int i = col + 1; i < n; ++i)
            if (std::abs(A(i, col)) > std::abs(A(piv, col))) piv = i;
        if (std::abs(A(piv, col)) < 1e-14 * scale)
            throw Error("dense_solve: matrix is singular to machine precision");
        if (piv != col) {
            for (int j = 0; j < n; ++j) std::swap(A(piv, j), A(col, j));
            std::swap(b[piv], b[col]);
        }
        const double inv = 1.0 / A(col, col);
        for (int i = col + 1; i < n; ++i) {
            const double f = A(i, col) * inv;
            if (f == 0.0) continue;
            for (int j = col; j < n; ++j) A(i, j) -= f * A(col, j);
            b[i] -= f * b[col];
        }
    }
    std::vector<double> x(n);
    for (int i = n - 1; i >= 0; --i) {
        double s = b[i];
        for (int j = i + 1; j < n; ++j) s -= A(i, j) * x[j];
        x[i] = s / A(i, i);
    }
    return x;
}

}  // namespace wmplab
