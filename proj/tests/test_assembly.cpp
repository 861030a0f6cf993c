#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include "wmplab/assembly.hpp"

using namespace wmplab;

namespace {

// Reference-tet monomial integral: x^a y^b z^c over {x,y,z >= 0, x+y+z <= 1}
// equals a! b! c! / (a+b+c+3)!.
double monomial_integral(int a, int b, int c) {
    auto fact = [](int k) {
        double f = 1;
        for (int i = 2; i <= k; ++i) f *= i;
        return f;
    };
    return fact(a) * fact(b) * fact(c) / fact(a + b + c + 3);
}

Mesh reference_tet() {
    const std::string path = "ref_tet.tmp.tet";
    std::ofstream out(path);
    out << "tetmesh 1\nV 4\n0 0 0\n1 0 0\n0 1 0\n0 0 1\nT 1\n0 1 2 3\n";
    out.close();
    Mesh m = load_mesh(path);
    std::remove(path.c_str());
    return m;
}

// Brute-force dense stiffness from the closed-form constant-gradient formula
// (degree 1), an independent route from the CSR assembly.
DenseMatrix dense_p1_stiffness(const Mesh& m) {
    DenseMatrix K;
    K.rows = K.cols = static_cast<int>(m.vertices.size());
    K.a.assign(static_cast<std::size_t>(K.rows) * K.cols, 0.0);
    for (std::size_t e = 0; e < m.tets.size(); ++e) {
        Vec3 g[4];
        const double det = std::abs(lambda_gradients(m, static_cast<int>(e), g));
        const auto& t = m.tets[e];
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) K(t[i], t[j]) += det / 6.0 * dot(g[i], g[j]);
    }
    return K;
}

}  // namespace

TEST_CASE("quadrature exactness vs factorial formula") {
    for (int degree : {1, 2, 4, 6}) {
        const QuadratureRule& rule = quadrature(degree);
        double wsum = 0;
        for (double w : rule.weights) {
            CHECK(w > 0);
            wsum += w;
        }
        CHECK(wsum == doctest::Approx(1.0 / 6.0).epsilon(1e-14));

        for (int a = 0; a <= degree; ++a)
            for (int b = 0; a + b <= degree; ++b)
                for (int c = 0; a + b + c <= degree; ++c) {
                    double s = 0;
                    for (std::size_t q = 0; q < rule.points.size(); ++q) {
                        const auto& p = rule.points[q];
                        // (x, y, z) = (lambda1, lambda2, lambda3).
                        s += rule.weights[q] * std::pow(p[1], a) * std::pow(p[2], b) *
                             std::pow(p[3], c);
                    }
                    const double exact = monomial_integral(a, b, c);
                    INFO("degree ", degree, " monomial ", a, " ", b, " ", c);
                    CHECK(std::abs(s - exact) < 1e-14);
                }
    }
    CHECK_THROWS_AS(quadrature(3), Error);

    // Spot values from the formula itself.
    CHECK(monomial_integral(0, 0, 0) == doctest::Approx(1.0 / 6.0));
    CHECK(monomial_integral(2, 0, 0) == doctest::Approx(1.0 / 60.0));
    CHECK(monomial_integral(2, 2, 0) == doctest::Approx(4.0 / 5040.0));
}

TEST_CASE("stiffness on the reference tet, degree 1") {
    const Mesh m = reference_tet();
    const FeSpace s = build_space(m, 1);
    SparseMatrix K = assemble_stiffness(s);
    // Vertex (0,0,0): |T| * |grad lambda0|^2 = (1/6) * 3; towards (1,0,0): -1/6.
    CHECK(K.at(0, 0) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(K.at(0, 1) == doctest::Approx(-1.0 / 6.0).epsilon(1e-14));
    CHECK(K.at(1, 1) == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
}

TEST_CASE("stiffness invariants") {
    const Mesh m = generate_structured(Domain::unit_cube, 2);
    for (int degree : {1, 2}) {
        const FeSpace s = build_space(m, degree);
        SparseMatrix K = assemble_stiffness(s);

        // Zero row sums.
        for (int i = 0; i < K.n; ++i) {
            double rs = 0;
            for (int k = K.row_offsets[i]; k < K.row_offsets[i + 1]; ++k) rs += K.values[k];
            CHECK(std::abs(rs) < 1e-12);
        }
        // Exact symmetry.
        for (int i = 0; i < K.n; ++i)
            for (int k = K.row_offsets[i]; k < K.row_offsets[i + 1]; ++k) {
                const int j = K.col_indices[k];
                CHECK(K.values[k] == K.at(j, i));
            }
        // Bit-identical re-assembly.
        const SparseMatrix K2 = assemble_stiffness(s);
        REQUIRE(K2.values.size() == K.values.size());
        for (std::size_t k = 0; k < K.values.size(); ++k) CHECK(K.values[k] == K2.values[k]);
    }
}

TEST_CASE("degree-1 stiffness matches the dense closed-form oracle") {
    const Mesh m = generate_structured(Domain::unit_cube, 2);
    const FeSpace s = build_space(m, 1);
    const SparseMatrix K = assemble_stiffness(s);
    const DenseMatrix D = dense_p1_stiffness(m);
    const DenseMatrix Kd = to_dense(K);
    for (int i = 0; i < K.n; ++i)
        for (int j = 0; j < K.n; ++j) CHECK(std::abs(Kd(i, j) - D(i, j)) < 1e-13);
}

TEST_CASE("loads") {
    SUBCASE("constant load sums to the volume") {
        const Mesh m = generate_structured(Domain::unit_cube, 2);
        for (int degree : {1, 2}) {
            const FeSpace s = build_space(m, degree);
            const auto load = assemble_load(s, [](const Vec3&) { return 1.0; }, 2 * degree + 2);
            double sum = 0;
            for (double v : load) sum += v;
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
    SUBCASE("reference tet, f = 1, degree 1: entries 1/24") {
        const Mesh m = reference_tet();
        const FeSpace s = build_space(m, 1);
        const auto load = assemble_load(s, [](const Vec3&) { return 1.0; }, 4);
        for (double v : load) CHECK(v == doctest::Approx(1.0 / 24.0).epsilon(1e-14));
    }
    SUBCASE("grad load of grad(x1) equals K * I_h(x1)") {
        const Mesh m = generate_structured(Domain::unit_cube, 2);
        for (int degree : {1, 2}) {
            const FeSpace s = build_space(m, degree);
            const SparseMatrix K = assemble_stiffness(s);
            const auto gl =
                assemble_grad_load(s, [](const Vec3&) { return Vec3{1, 0, 0}; }, 2 * degree + 2);
            const FeFunction xh = interpolate_nodal(s, [](const Vec3& x) { return x.x; });
            const auto Kx = spmv(K, xh.coeffs);
            for (std::size_t i = 0; i < gl.size(); ++i) CHECK(std::abs(gl[i] - Kx[i]) < 1e-12);
        }
    }
}

TEST_CASE("split dofs") {
    const Mesh m = generate_structured(Domain::unit_cube, 2);
    const FeSpace s = build_space(m, 1);
    const SparseMatrix K = assemble_stiffness(s);
    const DofSplit split = split_dofs(s, K);

    SUBCASE("cube(2) degree 1: single interior entry matches dense assembly") {
        REQUIRE(split.K_II.n == 1);
        const DenseMatrix D = dense_p1_stiffness(m);
        const int center = s.interior_dofs[0];
        CHECK(split.K_II.values[0] == doctest::Approx(D(center, center)).epsilon(1e-14));
    }
    SUBCASE("restricted row sums vanish") {
        for (int r = 0; r < split.K_II.n; ++r) {
            double rs = 0;
            for (int k = split.K_II.row_offsets[r]; k < split.K_II.row_offsets[r + 1]; ++k)
                rs += split.K_II.values[k];
            for (int k = split.K_IB.row_offsets[r]; k < split.K_IB.row_offsets[r + 1]; ++k)
                rs += split.K_IB.values[k];
            CHECK(std::abs(rs) < 1e-12);
        }
    }
    SUBCASE("positive definiteness on random vectors") {
        const Mesh m4 = generate_structured(Domain::unit_cube, 4);
        const FeSpace s4 = build_space(m4, 1);
        const DofSplit sp4 = split_dofs(s4, assemble_stiffness(s4));
        std::mt19937 rng(42);
        std::normal_distribution<double> gauss;
        for (int trial = 0; trial < 100; ++trial) {
            std::vector<double> x(sp4.K_II.n);
            for (double& v : x) v = gauss(rng);
            const auto Ax = spmv(sp4.K_II, x);
            double xAx = 0;
            for (int i = 0; i < sp4.K_II.n; ++i) xAx += x[i] * Ax[i];
            CHECK(xAx > 0);
        }
    }
    SUBCASE("empty interior set is flagged") {
        const Mesh m1 = generate_structured(Domain::unit_cube, 1);
        const FeSpace s1 = build_space(m1, 1);
        const SparseMatrix K1 = assemble_stiffness(s1);
        CHECK_THROWS_AS(split_dofs(s1, K1), Error);
    }
}

TEST_CASE("error norms") {
    const Mesh m = generate_structured(Domain::unit_cube, 2);
    const FeSpace s = build_space(m, 1);

    SUBCASE("zero error when the reference is the function itself") {
        const FeFunction f = interpolate_nodal(s, [](const Vec3& x) { return 2 * x.x - x.y; });
        const ExactField exact = exact_from_functions(
            [](const Vec3& x) { return 2 * x.x - x.y; },
            [](const Vec3&) { return Vec3{2, -1, 0}; });
        const ErrorNorms e = error_norms(f, exact, 4);
        CHECK(e.l2 < 1e-12);
        CHECK(e.h1_semi < 1e-12);
        CHECK(e.l1_grad < 1e-12);
    }
    SUBCASE("f_h = 0 against x1 on the unit cube") {
        FeFunction zero;
        zero.space = &s;
        zero.coeffs.assign(s.ndofs(), 0.0);
        const ExactField exact = exact_from_functions([](const Vec3& x) { return x.x; },
                                                      [](const Vec3&) { return Vec3{1, 0, 0}; });
        const ErrorNorms e = error_norms(zero, exact, 4);
        CHECK(e.h1_semi == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(e.l2 == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-12));
        CHECK(e.l1_grad == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("subset monotonicity for l1_grad") {
        const Mesh m4 = generate_structured(Domain::unit_cube, 4);
        const FeSpace s4 = build_space(m4, 1);
        FeFunction zero;
        zero.space = &s4;
        zero.coeffs.assign(s4.ndofs(), 0.0);
        const ExactField exact =
            exact_from_functions([](const Vec3& x) { return std::sin(3 * x.x) * x.y; },
                                 [](const Vec3& x) {
                                     return Vec3{3 * std::cos(3 * x.x) * x.y,
                                                 std::sin(3 * x.x), 0.0};
                                 });
        const auto layer = boundary_layer(m4, m4.h);
        const double sub = error_norms(zero, exact, 4, &layer).l1_grad;
        const double all = error_norms(zero, exact, 4).l1_grad;
        CHECK(sub <= all + 1e-15);
    }
}

TEST_CASE("matrix export format") {
    const Mesh m = reference_tet();
    const FeSpace s = build_space(m, 1);
    export_matrix(assemble_stiffness(s), "mat.tmp.txt");
    std::ifstream in("mat.tmp.txt");
    int i, j;
    double v;
    REQUIRE((in >> i >> j >> v));
    CHECK(i == 0);
    CHECK(j == 0);
    CHECK(v == doctest::Approx(0.5));
    std::remove("mat.tmp.txt");
}
