#pragma once

#include "csc/delaunay.hpp"
#include "csc/zonal.hpp"

#include <functional>
#include <memory>
#include <optional>

namespace csc {

/// A conformal factor w > 0 over the flat cylinder: g = w^{4/(n-2)}(dt^2+dth^2).
///
/// When the factor is built as an exact Delaunay base plus a perturbation
/// (base, tau with w = base + tau), the split is retained: psi can then be
/// evaluated in perturbation form, which keeps full relative accuracy even
/// when the curvature deviation sits 40 orders of magnitude below the
/// direct finite-difference floor.
struct ConformalBackground {
    std::shared_ptr<const ZonalGrid> grid;
    CylinderField w;

    // optional analytic split: radial base with exact derivatives
    bool has_split = false;
    std::function<double(double)> base_u;    // u(t)
    std::function<double(double)> base_upp;  // u''(t), exact from the ODE
    CylinderField tau;                       // w = base + tau
};

/// Background whose factor is exactly a sampled Delaunay orbit.
ConformalBackground delaunay_background(std::shared_ptr<const ZonalGrid> grid,
                                        std::shared_ptr<const DelaunayOrbit> orbit);

/// Background from an arbitrary positive radial profile (no split).
ConformalBackground radial_background(std::shared_ptr<const ZonalGrid> grid,
                                      const std::function<double(double)>& w_of_t);

/// Scalar curvature of the conformal metric, by the direct formula
///   S = w^{-(n+2)/(n-2)} [ S_cyl w - (4(n-1)/(n-2)) Lap_cyl w ],
/// S_cyl = (n-1)(n-2). Nodal evaluation, re-analyzed to coefficients.
/// Rejects factors that are not positive at every node.
CylinderField scalar_curvature(const ConformalBackground& bg);

/// The curvature deviation psi = n(n-1) - S with norm metadata.
struct PsiField {
    CylinderField psi;
    double sup_norm = 0.0;        // over all nodes
    double sup_splice = 0.0;      // over the splice region |t| <= splice_half
    double splice_half = 0.0;
    double weighted = 0.0;        // weighted_norm with the spec below
    WeightedNormSpec spec;
    double support_lo = 0.0, support_hi = 0.0; // interval holding the 1e-3-of-sup mass
};

/// psi via the split (perturbation form) when available, otherwise via
/// scalar_curvature directly. splice_half bounds the region reported in
/// sup_splice (the Lemma-style seam sup used by the decay sweeps).
PsiField psi(const ConformalBackground& bg, const WeightedNormSpec& spec,
             double splice_half = 2.0);

/// The linearized conformal scalar curvature operator (Jacobi operator),
///   L v = Lap_g v + n v + ((n-2)/(4(n-1))) psi v,
/// with Lap_g v = w^{-4/(n-2)} (Lap_cyl v + 2 <dlog w, dv>_cyl); full zonal
/// coupling, evaluated pointwise on the dealiased nodal grid.
CylinderField linearized_jacobi(const ConformalBackground& bg, const CylinderField& psi,
                                const CylinderField& v);

/// Exact Taylor remainder of the curvature nonlinearity about 1:
///   Q(v) = (n(n-2)/4) [ (1+v)^{(n+2)/(n-2)} - 1 - ((n+2)/(n-2)) v ].
/// Q(0) = 0 and the first variation at 0 vanishes. Rejects 1 + v <= 0.
CylinderField nonlinear_remainder(const CylinderField& v);

/// F(v) = c_n psi + L v + Q(v); equals c_n (n(n-1) - S(bg deformed by 1+v))
/// times (1+v)^{(n+2)/(n-2)} identically. Both paths available for the
/// consistency tests.
CylinderField residual(const ConformalBackground& bg, const CylinderField& psi_field,
                       const CylinderField& v);

/// The second path of the residual identity: c_n (n(n-1) - S') (1+v)^p with S'
/// recomputed through scalar_curvature (or the split path when available).
CylinderField residual_via_curvature(const ConformalBackground& bg, const CylinderField& v);

/// Background conformally deformed by (1+v); carries the split when bg does.
ConformalBackground deform_by_factor(const ConformalBackground& bg, const CylinderField& v);

double sup_norm(const CylinderField& f);

} // namespace csc
