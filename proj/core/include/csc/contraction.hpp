#pragma once

#include "csc/glue.hpp"
#include "csc/linear_solver.hpp"

#include <optional>
#include <vector>

namespace csc {

/// Geometric deformation of one outer end: necksize shift alpha_neck and
/// axial phase shift alpha_trans (the alpha^{0,-}, alpha^{0,+} directions),
/// plus recorded degree-1 data applied as tail edits.
struct DeformationEnd {
    double alpha_neck = 0.0;
    double alpha_trans = 0.0;
    std::vector<EndTail> tail_edits;
};

struct DeformationParams {
    DeformationEnd left, right;
    double norm() const;
};

/// Replace the end's Delaunay data u_eps by u_{eps+alpha_neck}(. + alpha_trans),
/// spliced by a cutoff in the middle of the outer region; interior unchanged
/// outside the splice annulus. Rejects necksizes out of (0, cbar) and
/// positivity violations.
ApproximateSolution deform_background(const ApproximateSolution& as,
                                      const DeformationParams& d);

/// Weighted norm of the extra curvature defect psi-hat introduced by the
/// deformation splice: psi(deformed) - psi(base), measured in the config's
/// weighted norm. Also reports the relative weighted mass outside the splice
/// annuli (support check).
struct DeformationError {
    double weighted_norm = 0.0;
    double outside_fraction = 0.0;
};
DeformationError deformation_error(const ApproximateSolution& as, const DeformationParams& d);

/// Iterates and diagnostics of the nonlinear solve.
struct SolveReport {
    std::vector<double> iterate_norms;
    std::vector<double> residual_norms;     // weighted norm of N(u_k)
    std::vector<double> residual_sups;      // sup |n(n-1) - S| at u_k
    std::vector<double> contraction_factors;
    DeformationParams final_deformation;
    std::map<int, std::array<double, 4>> final_deficiency;
    CylinderField final_v;
    bool converged = false;
    bool ball_ok = false; // fixed point within twice the first correction
    int iterations = 0;
    double final_max_residual = 0.0; // sup |S - n(n-1)|, recomputed end to end
    std::string failure;
};

/// Picard/contraction iteration u_{k+1} = -G(c_n psi + Q(u_k)) with the
/// deficiency part realized geometrically (deform_background) and the field
/// part conformally (1+v). G is the solution operator of the undeformed
/// approximate solution, held fixed through the iteration.
SolveReport picard_solve(const ApproximateSolution& as, double delta, double tol,
                         int max_iter,
                         const std::optional<std::pair<DeformationParams, CylinderField>>&
                             start = std::nullopt);

struct ProbeRow {
    int m;
    double R;
    int k;
    double sigma_min;
    bool converged;
};

/// Smallest singular values of the per-mode linearized systems at the solved
/// metric, swept over m. Diagnostic only; the mismatched-necksize variant
/// builds an invalid seam (necksizes eps and eps + mismatch) as a negative
/// control.
std::vector<ProbeRow> nondegeneracy_probe(const GlueConfig& cfg_template,
                                          const std::vector<int>& m_list, double delta,
                                          double tol, double mismatch = 0.0);

} // namespace csc
