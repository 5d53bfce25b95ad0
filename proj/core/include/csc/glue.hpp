#pragma once

#include "csc/curvature.hpp"
#include "csc/jacobi.hpp"

#include <memory>
#include <string>
#include <vector>

namespace csc {

/// Quintic smoothstep cutoff: 1 for t <= center - width/2, 0 for
/// t >= center + width/2, 6s^5-15s^4+10s^3 transition (C^2), 1/2 at center.
double cutoff(double t, double center, double width);

/// C^4 smoothstep cutoff (degree-9 polynomial transition), same conventions.
/// Used for the deficiency-basis and deformation-splice localizations, where
/// fourth-order stencils would otherwise see the quintic step's third
/// derivative jump at the joins.
double cutoff_c4(double t, double center, double width);

/// The coordinate identifications of the gluing: t = t0 - R - T0 on the
/// first summand (t < 0), t = -tau0 + R + T0' on the second (t > 0); on the
/// seam t0 + tau0 = T0 + T0' + 2R.
struct CoordinateMaps {
    double R, T0, T0p;
    double t_of_t0(double t0) const { return t0 - R - T0; }
    double t0_of_t(double t) const { return t + R + T0; }
    double t_of_tau0(double tau0) const { return -tau0 + R + T0p; }
    double tau0_of_t(double t) const { return -t + R + T0p; }
};
inline CoordinateMaps coordinate_maps(double R, double T0, double T0p) {
    return {R, T0, T0p};
}

/// One decaying Floquet tail component riding on an end: degree k >= 1,
/// direction (+1 decays toward the seam, -1 toward the outer boundary), and
/// the factor-perturbation amplitude at the end's anchor neck.
struct EndTail {
    int k = 2;
    int direction = +1;
    double amplitude = 0.0;
};

/// Full description of one end: necksize, Delaunay phase, tails.
struct EndData {
    double eps = 0.5;
    double T = 0.0;
    std::vector<EndTail> tails;
};

/// Remove every degree-1 tail component (the conformal motions translating
/// origin/infinity absorb exactly those); degrees >= 2 pass through.
EndData conformal_normalize(EndData e);

struct GlueGridSpec {
    double nodes_per_unit = 25.0;
    int K = 4;
    int Ntheta = 0; // 0: minimal dealiasing count
};

/// Configuration of an approximate solution: R = m * T_eps exactly, outer
/// ends of length L_outer (quantized to whole periods), cutoff splice at the
/// seam, weight exponent delta in (1, gamma_2(eps)).
struct GlueConfig {
    Dimension dim{3};
    double eps = 0.5;
    int m = 4;
    EndData end1, end2;
    double cutoff_width = 2.0;
    double L_outer = 14.0;
    GlueGridSpec grid;
    double delta = 1.5;
};

/// The built approximate solution: grid, orbit, background with analytic
/// split, and the geometry bookkeeping.
struct ApproximateSolution {
    GlueConfig cfg;
    std::shared_ptr<const DelaunayOrbit> orbit;
    std::shared_ptr<const ZonalGrid> grid;
    double R = 0.0;       // neck half-length, m * T_eps
    double B = 0.0;       // R + quantized L_outer: the physical domain edge
    double B_grid = 0.0;  // B plus one padding period hosting the one-sided
                          // closure nodes; sups and norms stop at B
    int outer_periods = 0;
    ConformalBackground bg;
    // per-end realized tail profiles (shared Floquet data, one per degree)
    std::vector<std::shared_ptr<const FloquetProfile>> profiles;
};

/// Assemble w = u_eps + chi * tail_1 + (1 - chi) * tail_2 on the glued
/// cylinder [-B, B] (grid padded one period past B); with zero tails the
/// output is exactly the sampled Delaunay factor. Rejects factors losing
/// positivity and grids too coarse for the requested m.
ApproximateSolution build_approximate_factor(const GlueConfig& cfg);

/// One row of the psi-decay sweep.
struct PsiSweepRow {
    int m;
    double R;
    double psi_sup;      // sup over the splice region (the seam commutator)
    double psi_weighted; // weighted norm, exponent cfg.delta
    double slope_running;
};

struct PsiSweepResult {
    std::vector<PsiSweepRow> rows;
    double slope = 0.0;          // least-squares slope of log psi_sup vs R
    double fit_residual = 0.0;   // rms residual of the regression
    bool fit_ok = false;
    bool exact = false;          // all sups at the discretization floor
};

/// Sweep m over m_list, measure sup(psi) over the seam region and fit the
/// exponential decay rate in R. Needs >= 4 values of m for a fit.
PsiSweepResult psi_decay_sweep(const GlueConfig& cfg_template, const std::vector<int>& m_list);

} // namespace csc
