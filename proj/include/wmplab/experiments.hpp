#ifndef WMPLAB_EXPERIMENTS_HPP
#define WMPLAB_EXPERIMENTS_HPP

#include <map>
#include <optional>
#include <string>

#include "wmplab/harmonic.hpp"

namespace wmplab {

/// Parameters shared by every study. Levels are cells-per-edge values,
/// strictly increasing.
struct StudyConfig {
    std::string domain = "cube";
    int degree = 1;
    std::vector<int> levels;
    int sample_order = 4;
    double tol = 1e-12;
    int quad_degree = -1;          // -1: 2r+2
    double k_interior = 1.0;       // k of the interior-estimate radius d + 2kh
    double rho_factor = 4.0;       // rho = rho_factor * h
    std::optional<Vec3> x0;        // default: domain centroid
    int threads = 0;               // 0: all hardware cores
    unsigned seed = 0;             // affects randomized tests only, never results
};

struct StudyRow {
    int level = 0;  // index within the run
    int n = 0;      // cells per edge
    double h = 0;
    int dofs = 0;
    double quantity = 0;
    std::string name;
    bool has_ratio = false;
    double ratio = 0;  // quantity / previous-level quantity (same name)
    long cg_iters = 0;
    double seconds = 0;
};

struct StudyResult {
    std::string study;
    StudyConfig cfg;
    std::vector<StudyRow> rows;
    std::map<std::string, double> summary;
};

/// Weak-maximum-principle constant across the refinement family; summary
/// carries per-level nodal constants and the boundedness flag.
StudyResult wmp_study(const StudyConfig& cfg);

enum class RitzFamily { shrinking_bump, fixed_smooth, oscillatory };
RitzFamily parse_family(const std::string& name);

StudyResult ritz_stability_study(const StudyConfig& cfg, RitzFamily family);

/// Scaled boundary-layer gradient error of a source problem against a
/// one-level-finer surrogate; the finest level also reports the shift
/// under a two-level reference (surrogate adequacy).
StudyResult boundary_layer_study(const StudyConfig& cfg);

struct AnnulusProfileRow {
    int j = 0;  // -1: inner ball
    double d_outer = 0, d_inner = 0;
    std::size_t elements = 0;
    ErrorNorms norms;
};
std::vector<AnnulusProfileRow> dyadic_profile(const FeFunction& f, const ExactField& exact,
                                              const Vec3& x0, double rho, int qdegree);

StudyResult convergence_study(const StudyConfig& cfg);

/// Delta-norm scaling and Green representation checks per level.
StudyResult green_study(const StudyConfig& cfg);

/// Ritz projections on the domain and on a fixed convex extension of it;
/// verifies the difference is discrete harmonic and the maximum-principle
/// transfer bound.
StudyResult extension_study(const StudyConfig& cfg);

struct MMatrixReport {
    bool is_m_matrix_pattern = false;
    double max_positive_offdiag = 0;
    int witness_i = -1, witness_j = -1;
    double min_dihedral_deg = 0, max_dihedral_deg = 0;
};
MMatrixReport mmatrix_audit(const FeSpace& space);

// Closed-form study families (exposed for tests).
struct BumpField {
    Vec3 center;
    double radius = 1;
    double value(const Vec3& x) const;
    Vec3 gradient(const Vec3& x) const;
};

std::string to_csv(const StudyResult& r);
std::string to_json_string(const StudyResult& r);
std::string config_json_string(const StudyConfig& cfg, const std::string& study);
void write_study_outputs(const StudyResult& r, const std::string& csv_path,
                         const std::string& json_path);

/// Per-mesh scaffold shared by the studies. Filled in place so the space's
/// mesh reference stays valid.
struct LevelContext {
    Mesh mesh;
    FeSpace space;
};
void make_level(const StudyConfig& cfg, int n, LevelContext& ctx);

/// Surrogate reference: a solution on a `depth`-times refined mesh read
/// back through the nested element blocks (children of coarse element e
/// are fine elements [8e, 8e+8)).
ExactField surrogate_field(const FeFunction& fine, int depth);

}  // namespace wmplab

#endif
