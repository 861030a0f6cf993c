#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "wmplab/experiments.hpp"
#include "wmplab/manifest.hpp"

using namespace wmplab;

namespace {

StudyConfig base_cfg(int degree, std::vector<int> levels) {
    StudyConfig cfg;
    cfg.degree = degree;
    cfg.levels = std::move(levels);
    cfg.sample_order = 2;
    return cfg;
}

// CSV lines with the wall-clock column blanked.
std::vector<std::string> masked_csv_lines(const std::string& csv) {
    std::vector<std::string> out;
    std::istringstream in(csv);
    std::string line;
    while (std::getline(in, line)) {
        const auto pos = line.rfind(',');
        out.push_back(line.substr(0, pos));
    }
    return out;
}

}  // namespace

TEST_CASE("wmp study on M-matrix meshes") {
    StudyConfig cfg = base_cfg(1, {2, 4});
    const StudyResult res = wmp_study(cfg);
    REQUIRE(res.rows.size() == 2);
    for (const auto& row : res.rows) {
        CHECK(row.name == "C_h");
        CHECK(std::abs(row.quantity - 1.0) < 1e-8);
    }
    CHECK_FALSE(res.rows[0].has_ratio);
    CHECK(res.rows[1].has_ratio);
    CHECK(res.summary.at("bounded") == 1.0);
    CHECK(res.summary.at("nodal_c_h_n2") == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("wmp study rejects meshes without interior dofs") {
    StudyConfig cfg = base_cfg(1, {1, 2});
    try {
        wmp_study(cfg);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("n=1") != std::string::npos);
        CHECK(std::string(e.what()).find("interior") != std::string::npos);
    }
}

TEST_CASE("ritz stability study families") {
    SUBCASE("fixed smooth at a resolved level is near one") {
        StudyConfig cfg = base_cfg(2, {4});
        cfg.sample_order = 4;
        const StudyResult res = ritz_stability_study(cfg, RitzFamily::fixed_smooth);
        CHECK(res.rows[0].quantity == doctest::Approx(1.012).epsilon(0.02));
        CHECK(res.summary.at("sup_stability_degree_ok") == 1.0);
    }
    SUBCASE("degree 1 runs are labeled outside the stability hypothesis") {
        StudyConfig cfg = base_cfg(1, {4});
        const StudyResult res = ritz_stability_study(cfg, RitzFamily::fixed_smooth);
        CHECK(res.summary.at("sup_stability_degree_ok") == 0.0);
    }
    SUBCASE("shrinking bump keeps zero boundary values") {
        // The width rule clamps at the distance from x0 to the boundary, so
        // the bump vanishes on the boundary at every level.
        StudyConfig cfg = base_cfg(2, {2, 4});
        const StudyResult res = ritz_stability_study(cfg, RitzFamily::shrinking_bump);
        for (const auto& row : res.rows) {
            CHECK(row.quantity > 0.8);
            CHECK(row.quantity < 1.3);
        }
    }
    SUBCASE("family parsing") {
        CHECK(parse_family("oscillatory") == RitzFamily::oscillatory);
        CHECK_THROWS_AS(parse_family("squarewave"), Error);
    }
}

TEST_CASE("boundary layer study") {
    StudyConfig cfg = base_cfg(1, {4, 8});
    const StudyResult res = boundary_layer_study(cfg);
    REQUIRE(res.rows.size() == 2);
    for (const auto& row : res.rows) {
        CHECK(row.name == "Q");
        CHECK(row.quantity > 0);
    }
    CHECK(res.summary.count("surrogate_shift") == 1);
    // Band volume against 6h once the layer no longer saturates the domain.
    CHECK(res.summary.at("layer_vol_over_6h_n8") > 0.5);
    CHECK(res.summary.at("layer_vol_over_6h_n8") < 2.0);
}

TEST_CASE("source solve is linear in the source") {
    const Mesh m = generate_structured(Domain::unit_cube, 4);
    const FeSpace s = build_space(m, 1);
    BumpField bump{{0.5, 0.5, 0.5}, 0.4};
    const auto v1 = fem_solve_source(s, [&](const Vec3& x) { return bump.value(x); });
    const auto v3 = fem_solve_source(s, [&](const Vec3& x) { return 3.0 * bump.value(x); });
    for (int d = 0; d < s.ndofs(); ++d)
        CHECK(std::abs(v3.u.coeffs[d] - 3.0 * v1.u.coeffs[d]) < 1e-10);
}

TEST_CASE("dyadic profile") {
    const Mesh m = generate_structured(Domain::unit_cube, 8);
    const FeSpace s = build_space(m, 1);
    const Vec3 x0{0.5, 0.5, 0.5};
    const double rho = 0.5 * m.h;

    const SourceResult vh =
        fem_solve_source(s, [&](const Vec3& x) { return BumpField{x0, 0.3}.value(x); });
    Mesh fine = refine(m);
    const FeSpace fs = build_space(fine, 1);
    const SourceResult vref =
        fem_solve_source(fs, [&](const Vec3& x) { return BumpField{x0, 0.3}.value(x); });
    const ExactField exact = surrogate_field(vref.u, 1);

    SUBCASE("zero rows when the reference equals the function") {
        const ExactField self{
            [&](int e, const Vec3& x) { return evaluate(vh.u, e, barycentric_coords(m, e, x)); },
            [&](int e, const Vec3& x) {
                return evaluate_gradient(vh.u, e, barycentric_coords(m, e, x));
            }};
        const auto rows = dyadic_profile(vh.u, self, x0, rho, 4);
        for (const auto& r : rows) {
            CHECK(r.norms.l2 < 1e-12);
            CHECK(r.norms.l1_grad < 1e-12);
        }
    }
    SUBCASE("additivity over the layer and matching bracket") {
        const auto rows = dyadic_profile(vh.u, exact, x0, rho, 4);
        const AnnulusDecomposition dec = annuli(m, x0, rho);
        REQUIRE(rows.size() == static_cast<std::size_t>(dec.J + 2));
        for (int j = 0; j <= dec.J; ++j) {
            CHECK(rows[j].j == j);
            CHECK(rows[j].d_outer == doctest::Approx(dec.d[j]));
            CHECK(rows[j].d_inner == doctest::Approx(dec.d[j + 1]));
        }
        CHECK(rows.back().j == -1);

        const auto layer = boundary_layer(m, m.h);
        const ErrorNorms total = error_norms(vh.u, exact, 4, &layer);
        double sum_l1 = 0, sum_l2sq = 0, sum_h1sq = 0;
        std::size_t count = 0;
        for (const auto& r : rows) {
            sum_l1 += r.norms.l1_grad;
            sum_l2sq += r.norms.l2 * r.norms.l2;
            sum_h1sq += r.norms.h1_semi * r.norms.h1_semi;
            count += r.elements;
        }
        CHECK(count == layer.size());
        CHECK(std::abs(sum_l1 - total.l1_grad) < 1e-12);
        CHECK(std::abs(sum_l2sq - total.l2 * total.l2) < 1e-12);
        CHECK(std::abs(sum_h1sq - total.h1_semi * total.h1_semi) < 1e-12);
    }
}

TEST_CASE("convergence study orders") {
    SUBCASE("degree 1") {
        const StudyResult res = convergence_study(base_cfg(1, {4, 8}));
        CHECK(res.summary.at("l2_order") == doctest::Approx(2.0).epsilon(0.15));
        CHECK(res.summary.at("h1_order") == doctest::Approx(1.0).epsilon(0.15));
        // Errors shrink monotonically.
        CHECK(res.rows[2].quantity < res.rows[0].quantity);
        CHECK(res.rows[3].quantity < res.rows[1].quantity);
    }
    SUBCASE("degree 2") {
        const StudyResult res = convergence_study(base_cfg(2, {2, 4}));
        CHECK(res.summary.at("l2_order") == doctest::Approx(3.0).epsilon(0.12));
        CHECK(res.summary.at("h1_order") == doctest::Approx(2.0).epsilon(0.12));
    }
}

TEST_CASE("green study slope") {
    const StudyResult res = green_study(base_cfg(1, {2, 4, 8}));
    CHECK(std::abs(res.summary.at("delta_l2_slope") + 1.5) < 0.1);
    for (const auto& row : res.rows)
        if (row.name == "repr_err") CHECK(row.quantity < 1e-9);
}

TEST_CASE("extension study") {
    StudyConfig cfg = base_cfg(2, {2, 4});
    const StudyResult res = extension_study(cfg);
    for (const auto& row : res.rows) {
        if (row.name == "harmonic_residual") CHECK(row.quantity <= 1e-9);
        if (row.name == "C_h") CHECK(row.quantity >= 1.0 - 1e-8);
    }
    CHECK(res.summary.at("transfer_bound_ok_n2") == 1.0);
    CHECK(res.summary.at("transfer_bound_ok_n4") == 1.0);

    // E2 <= C_h * E1 * (1 + eps) whenever the boundary sup is below E1.
    auto find = [&](const std::string& name, int level) {
        for (const auto& row : res.rows)
            if (row.name == name && row.level == level) return row.quantity;
        REQUIRE(false);
        return 0.0;
    };
    for (int level : {0, 1}) {
        const double E1 = find("E1", level), E2 = find("E2", level);
        const double ch = find("C_h", level), bsup = find("boundary_sup", level);
        CHECK(bsup <= E1 * (1 + 1e-9));
        CHECK(E2 <= ch * E1 * (1 + 1e-6) + 1e-8);
    }
    CHECK_THROWS_AS(extension_study(base_cfg(2, std::vector<int>{})), Error);
}

TEST_CASE("m-matrix audit") {
    SUBCASE("degree 1 Kuhn meshes pass") {
        const Mesh m = generate_structured(Domain::unit_cube, 2);
        const FeSpace s = build_space(m, 1);
        const MMatrixReport rep = mmatrix_audit(s);
        CHECK(rep.is_m_matrix_pattern);
        CHECK(rep.max_positive_offdiag <= 1e-12);
        CHECK(rep.min_dihedral_deg == doctest::Approx(45.0).epsilon(1e-9));
        CHECK(rep.max_dihedral_deg == doctest::Approx(90.0).epsilon(1e-9));
    }
    SUBCASE("degree 2 always fails with a witness") {
        const Mesh m = generate_structured(Domain::unit_cube, 2);
        const FeSpace s = build_space(m, 2);
        const MMatrixReport rep = mmatrix_audit(s);
        CHECK_FALSE(rep.is_m_matrix_pattern);
        CHECK(rep.max_positive_offdiag > 1e-12);
        CHECK(rep.witness_i >= 0);
        CHECK(rep.witness_j >= 0);
        // The witness entry really is positive in the assembled matrix.
        SparseMatrix K = assemble_stiffness(s);
        CHECK(K.at(rep.witness_i, rep.witness_j) == doctest::Approx(rep.max_positive_offdiag));
    }
    SUBCASE("single regular tet, degree 1") {
        std::ofstream out("reg_tet.tmp.tet");
        const double s3 = std::sqrt(3.0), s6 = std::sqrt(6.0);
        char buf[200];
        std::snprintf(buf, sizeof buf,
                      "tetmesh 1\nV 4\n0 0 0\n1 0 0\n0.5 %.17g 0\n0.5 %.17g %.17g\nT 1\n0 1 2 3\n",
                      s3 / 2, s3 / 6, s6 / 3);
        out << buf;
        out.close();
        const Mesh m = load_mesh("reg_tet.tmp.tet");
        const FeSpace s = build_space(m, 1);
        const MMatrixReport rep = mmatrix_audit(s);
        CHECK(rep.is_m_matrix_pattern);
        // All off-diagonals of the regular-tet stiffness are equal and negative.
        SparseMatrix K = assemble_stiffness(s);
        CHECK(K.at(0, 1) < -1e-3);
        std::remove("reg_tet.tmp.tet");
    }
}

TEST_CASE("study outputs: csv schema, json mirror, determinism") {
    StudyConfig cfg = base_cfg(1, {2, 4});
    const StudyResult res = wmp_study(cfg);
    const std::string csv = to_csv(res);

    SUBCASE("csv header and ratio blank on the first row") {
        std::istringstream in(csv);
        std::string header, first;
        std::getline(in, header);
        CHECK(header == "level,n,h,dofs,quantity,name,ratio,cg_iters,seconds");
        std::getline(in, first);
        std::vector<std::string> fields;
        std::stringstream fs(first);
        std::string tok;
        while (std::getline(fs, tok, ',')) fields.push_back(tok);
        REQUIRE(fields.size() >= 8);
        CHECK(fields[6].empty());
    }
    SUBCASE("identical numeric payloads in csv and json") {
        const auto j = nlohmann::json::parse(to_json_string(res));
        REQUIRE(j["rows"].size() == res.rows.size());
        std::istringstream in(csv);
        std::string line;
        std::getline(in, line);  // header
        for (std::size_t r = 0; r < res.rows.size(); ++r) {
            std::getline(in, line);
            std::vector<std::string> fields;
            std::stringstream fs(line);
            std::string tok;
            while (std::getline(fs, tok, ',')) fields.push_back(tok);
            CHECK(std::stoi(fields[0]) == j["rows"][r]["level"].get<int>());
            CHECK(std::stoi(fields[1]) == j["rows"][r]["n"].get<int>());
            CHECK(std::stod(fields[2]) == j["rows"][r]["h"].get<double>());
            CHECK(std::stoi(fields[3]) == j["rows"][r]["dofs"].get<int>());
            CHECK(std::stod(fields[4]) == j["rows"][r]["quantity"].get<double>());
            CHECK(fields[5] == j["rows"][r]["name"].get<std::string>());
            if (fields[6].empty())
                CHECK(j["rows"][r]["ratio"].is_null());
            else
                CHECK(std::stod(fields[6]) == j["rows"][r]["ratio"].get<double>());
            CHECK(std::stol(fields[7]) == j["rows"][r]["cg_iters"].get<long>());
        }
        CHECK(j["meta"]["degree"] == 1);
        CHECK(j["meta"]["levels"] == nlohmann::json({2, 4}));
    }
    SUBCASE("bit-identical reruns apart from wall time") {
        const StudyResult res2 = wmp_study(cfg);
        CHECK(masked_csv_lines(csv) == masked_csv_lines(to_csv(res2)));

        write_study_outputs(res, "det1.tmp.csv", "det1.tmp.json");
        write_study_outputs(res2, "det2.tmp.csv", "det2.tmp.json");
        CHECK(payload_digest("det1.tmp.csv") == payload_digest("det2.tmp.csv"));
        CHECK(payload_digest("det1.tmp.json") == payload_digest("det2.tmp.json"));
        for (const char* f : {"det1.tmp.csv", "det1.tmp.json", "det2.tmp.csv", "det2.tmp.json"})
            std::remove(f);
    }
    SUBCASE("config validation") {
        CHECK_THROWS_AS(wmp_study(base_cfg(1, {4, 2})), Error);
        CHECK_THROWS_AS(wmp_study(base_cfg(3, {2})), Error);
        StudyConfig bad = base_cfg(1, {2});
        bad.tol = 2.0;
        CHECK_THROWS_AS(wmp_study(bad), Error);
    }
}

TEST_CASE("manifest digest masks wall time only") {
    {
        std::ofstream a("dig_a.tmp.csv"), b("dig_b.tmp.csv");
        a << "level,n,h,dofs,quantity,name,ratio,cg_iters,seconds\n0,2,0.5,27,1,C_h,,6,0.123\n";
        b << "level,n,h,dofs,quantity,name,ratio,cg_iters,seconds\n0,2,0.5,27,1,C_h,,6,9.876\n";
    }
    CHECK(payload_digest("dig_a.tmp.csv") == payload_digest("dig_b.tmp.csv"));
    {
        std::ofstream c("dig_c.tmp.csv");
        c << "level,n,h,dofs,quantity,name,ratio,cg_iters,seconds\n0,2,0.5,27,2,C_h,,6,0.123\n";
    }
    CHECK(payload_digest("dig_a.tmp.csv") != payload_digest("dig_c.tmp.csv"));
    for (const char* f : {"dig_a.tmp.csv", "dig_b.tmp.csv", "dig_c.tmp.csv"}) std::remove(f);
}
