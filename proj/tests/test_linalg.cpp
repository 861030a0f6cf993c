#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "wmplab/assembly.hpp"
#include "wmplab/linalg.hpp"

using namespace wmplab;

namespace {

SparseMatrix random_spd(int n, std::mt19937& rng) {
    // Diagonally dominant random symmetric matrix with ~8 off-diagonals/row.
    std::uniform_int_distribution<int> col(0, n - 1);
    std::uniform_real_distribution<double> val(-1.0, 1.0);
    std::vector<std::pair<int, int>> pattern;
    std::vector<std::tuple<int, int, double>> offdiag;
    for (int i = 0; i < n; ++i) {
        pattern.emplace_back(i, i);
        for (int k = 0; k < 4; ++k) {
            const int j = col(rng);
            if (j == i) continue;
            const double v = val(rng);
            offdiag.emplace_back(i, j, v);
            offdiag.emplace_back(j, i, v);
            pattern.emplace_back(i, j);
            pattern.emplace_back(j, i);
        }
    }
    SparseMatrix A = build_pattern(n, n, pattern, true);
    std::vector<double> rowsum(n, 0.0);
    for (const auto& [i, j, v] : offdiag) {
        A.at(i, j) += v;
        rowsum[i] += std::abs(v);
    }
    for (int i = 0; i < n; ++i) A.at(i, i) = rowsum[i] + 1.0;
    return A;
}

double inf_rel_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double num = 0, den = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num = std::max(num, std::abs(a[i] - b[i]));
        den = std::max(den, std::abs(b[i]));
    }
    return den > 0 ? num / den : num;
}

// Closed-form inverse of the n x n Hilbert matrix (1-based indices):
// (H^-1)_{ij} = (-1)^{i+j} (i+j-1) C(n+i-1, n-j) C(n+j-1, n-i) C(i+j-2, i-1)^2.
double hilbert_inverse_entry(int n, int i, int j) {
    auto binom = [](int a, int b) {
        double r = 1;
        for (int k = 1; k <= b; ++k) r = r * (a - b + k) / k;
        return r;
    };
    const double sign = ((i + j) % 2 == 0) ? 1.0 : -1.0;
    const double c = binom(i + j - 2, i - 1);
    return sign * (i + j - 1) * binom(n + i - 1, n - j) * binom(n + j - 1, n - i) * c * c;
}

}  // namespace

TEST_CASE("spmv") {
    SUBCASE("identity pattern") {
        std::vector<std::pair<int, int>> diag;
        for (int i = 0; i < 5; ++i) diag.emplace_back(i, i);
        SparseMatrix I = build_pattern(5, 5, diag, true);
        for (int i = 0; i < 5; ++i) I.at(i, i) = 1.0;
        const std::vector<double> x{1, -2, 3, -4, 5};
        CHECK(spmv(I, x) == x);
        CHECK_THROWS_AS(spmv(I, std::vector<double>(4, 0.0)), Error);
    }
    SUBCASE("stiffness times ones vanishes") {
        const Mesh m = generate_structured(Domain::unit_cube, 2);
        const FeSpace s = build_space(m, 2);
        const SparseMatrix K = assemble_stiffness(s);
        const auto y = spmv(K, std::vector<double>(K.n, 1.0));
        for (double v : y) CHECK(std::abs(v) < 1e-12);
    }
    SUBCASE("random matrix against the dense multiply oracle") {
        std::mt19937 rng(99);
        SparseMatrix A = random_spd(50, rng);
        const DenseMatrix D = to_dense(A);
        std::normal_distribution<double> gauss;
        std::vector<double> x(50);
        for (double& v : x) v = gauss(rng);
        const auto y = spmv(A, x);
        for (int i = 0; i < 50; ++i) {
            double yi = 0;
            for (int j = 0; j < 50; ++j) yi += D(i, j) * x[j];
            CHECK(std::abs(y[i] - yi) < 1e-13);
        }
    }
}

TEST_CASE("cg basics") {
    SUBCASE("zero right-hand side") {
        std::mt19937 rng(7);
        const SparseMatrix A = random_spd(20, rng);
        const CgResult r = cg_solve(A, std::vector<double>(20, 0.0), 1e-12, 100, Precond::jacobi);
        CHECK(r.converged);
        CHECK(r.stats.iterations == 0);
        for (double v : r.x) CHECK(v == 0.0);
    }
    SUBCASE("diagonal system solves in <= 10 iterations") {
        std::vector<std::pair<int, int>> diag;
        for (int i = 0; i < 10; ++i) diag.emplace_back(i, i);
        SparseMatrix A = build_pattern(10, 10, diag, true);
        for (int i = 0; i < 10; ++i) A.at(i, i) = i + 1.0;
        const CgResult r = cg_solve(A, std::vector<double>(10, 1.0), 1e-12, 50, Precond::none);
        CHECK(r.converged);
        CHECK(r.stats.iterations <= 10);
        for (int i = 0; i < 10; ++i)
            CHECK(r.x[i] == doctest::Approx(1.0 / (i + 1)).epsilon(1e-11));
    }
    SUBCASE("non-SPD is detected") {
        std::vector<std::pair<int, int>> diag;
        for (int i = 0; i < 3; ++i) diag.emplace_back(i, i);
        SparseMatrix A = build_pattern(3, 3, diag, true);
        A.at(0, 0) = 1.0;
        A.at(1, 1) = -1.0;
        A.at(2, 2) = 1.0;
        CHECK_THROWS_AS(cg_solve(A, std::vector<double>{1, 1, 1}, 1e-10, 10, Precond::none),
                        Error);
    }
    SUBCASE("maxit exceeded returns the best iterate flagged") {
        std::mt19937 rng(3);
        const SparseMatrix A = random_spd(200, rng);
        std::vector<double> b(200, 1.0);
        const CgResult r = cg_solve(A, b, 1e-14, 2, Precond::none);
        CHECK_FALSE(r.converged);
        CHECK(r.stats.iterations == 2);
    }
}

TEST_CASE("cg agrees with dense LU on stiffness systems") {
    for (int n : {4, 6}) {
        const Mesh m = generate_structured(Domain::unit_cube, n);
        const FeSpace s = build_space(m, 1);
        const DofSplit split = split_dofs(s, assemble_stiffness(s));
        std::mt19937 rng(1000 + n);
        std::normal_distribution<double> gauss;
        std::vector<double> b(split.K_II.n);
        for (double& v : b) v = gauss(rng);

        const CgResult cg = cg_solve(split.K_II, b, 1e-12, 10000, Precond::jacobi);
        REQUIRE(cg.converged);
        const auto lu = dense_solve(to_dense(split.K_II), b);
        CHECK(inf_rel_diff(cg.x, lu) < 1e-8);
    }
}

TEST_CASE("dense solve") {
    SUBCASE("identity") {
        DenseMatrix I;
        I.rows = I.cols = 3;
        I.a = {1, 0, 0, 0, 1, 0, 0, 0, 1};
        const std::vector<double> b{3, -1, 2};
        CHECK(dense_solve(I, b) == b);
    }
    SUBCASE("2x2 hand check") {
        DenseMatrix A;
        A.rows = A.cols = 2;
        A.a = {2, 1, 1, 2};
        const auto x = dense_solve(A, {3, 3});
        CHECK(x[0] == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(x[1] == doctest::Approx(1.0).epsilon(1e-14));
    }
    SUBCASE("Hilbert 6x6 against the closed-form inverse") {
        const int n = 6;
        DenseMatrix H;
        H.rows = H.cols = n;
        H.a.resize(n * n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) H(i, j) = 1.0 / (i + j + 1);
        for (int col = 0; col < n; ++col) {
            std::vector<double> e(n, 0.0);
            e[col] = 1.0;
            const auto x = dense_solve(H, e);  // column of H^-1
            for (int i = 0; i < n; ++i) {
                const double exact = hilbert_inverse_entry(n, i + 1, col + 1);
                CHECK(std::abs(x[i] - exact) <= 1e-6 * std::abs(exact));
            }
        }
    }
    SUBCASE("singular matrix") {
        DenseMatrix A;
        A.rows = A.cols = 2;
        A.a = {1, 2, 2, 4};
        CHECK_THROWS_AS(dense_solve(A, {1, 1}), Error);
    }
}

TEST_CASE("solve_multi") {
    std::mt19937 rng(5);
    const SparseMatrix A = random_spd(60, rng);
    std::normal_distribution<double> gauss;
    std::vector<std::vector<double>> rhs(5, std::vector<double>(60));
    for (auto& b : rhs)
        for (double& v : b) v = gauss(rng);

    const auto sols = solve_multi(A, rhs, 1e-12, 1000, Precond::jacobi, 1);

    SUBCASE("batch of one matches cg_solve") {
        const CgResult single = cg_solve(A, rhs[0], 1e-12, 1000, Precond::jacobi);
        CHECK(sols[0].x == single.x);
    }
    SUBCASE("permuted batch gives bit-identical columns") {
        std::vector<std::vector<double>> perm{rhs[3], rhs[1], rhs[4], rhs[0], rhs[2]};
        const auto psols = solve_multi(A, perm, 1e-12, 1000, Precond::jacobi, 2);
        CHECK(psols[0].x == sols[3].x);
        CHECK(psols[1].x == sols[1].x);
        CHECK(psols[2].x == sols[4].x);
        CHECK(psols[3].x == sols[0].x);
        CHECK(psols[4].x == sols[2].x);
    }
    SUBCASE("linearity up to solver tolerance") {
        std::vector<double> combo(60);
        const double c0 = 2.0, c1 = -3.0;
        for (int i = 0; i < 60; ++i) combo[i] = c0 * rhs[0][i] + c1 * rhs[1][i];
        const CgResult rc = cg_solve(A, combo, 1e-12, 1000, Precond::jacobi);
        double scale = 0;
        for (int i = 0; i < 60; ++i) scale = std::max(scale, std::abs(rc.x[i]));
        for (int i = 0; i < 60; ++i) {
            const double expect = c0 * sols[0].x[i] + c1 * sols[1].x[i];
            CHECK(std::abs(rc.x[i] - expect) <= 3e-12 * std::max(1.0, scale) + 3e-12);
        }
    }
}

TEST_CASE("cg determinism across repeated runs") {
    const Mesh m = generate_structured(Domain::unit_cube, 4);
    const FeSpace s = build_space(m, 1);
    const DofSplit split = split_dofs(s, assemble_stiffness(s));
    std::vector<double> b(split.K_II.n, 1.0);
    const CgResult r1 = cg_solve(split.K_II, b, 1e-12, 10000, Precond::jacobi);
    const CgResult r2 = cg_solve(split.K_II, b, 1e-12, 10000, Precond::jacobi);
    CHECK(r1.x == r2.x);
    CHECK(r1.stats.iterations == r2.stats.iterations);
}
