#pragma once

#include "csc/dimension.hpp"

#include <Eigen/Dense>
#include <memory>
#include <vector>

namespace csc {

/// Discretization of the cylinder [-L, L] x S^{n-1} restricted to zonal
/// (axially symmetric) functions: uniform t nodes, Gauss nodes in x = cos(theta)
/// for the weight (1-x^2)^{(n-3)/2}, and the pole-normalized zonal harmonics
/// Z_k (Gegenbauer, Z_k(1) = 1) up to degree K.
///
/// Ntheta >= ceil((3K+2)/2) dealiases pointwise products up to the cubic-ish
/// range exercised by the (n+2)/(n-2) nonlinearity at the amplitudes used here.
struct ZonalGrid {
    Dimension dim;
    double L;      // half-length of the t-domain
    int Nt;        // uniform t nodes, endpoints included; spacing h = 2L/(Nt-1)
    int K;         // zonal degree cutoff
    int Ntheta;    // Gauss nodes in x

    double h;
    std::vector<double> tnodes;
    std::vector<double> xnodes, xweights;
    Eigen::MatrixXd synth;      // Ntheta x (K+1), Z_k(x_j)
    Eigen::MatrixXd synth_dx;   // Ntheta x (K+1), Z_k'(x_j)
    Eigen::MatrixXd analyze_op; // (K+1) x Ntheta, quadrature projection

    ZonalGrid(Dimension dim_, double L_, int Nt_, int K_, int Ntheta_ = 0);

    double lambda(int k) const { return double(k) * double(k + dim.n - 2); }
    int node_index(double t) const; // nearest node
};

std::shared_ptr<const ZonalGrid> make_grid(Dimension dim, double L, int Nt, int K,
                                           int Ntheta = 0);

/// A scalar field on the zonal cylinder in spectral form: one coefficient
/// sequence over the t nodes per degree k. Immutable grids are shared.
struct CylinderField {
    std::shared_ptr<const ZonalGrid> grid;
    Eigen::MatrixXd coeffs; // (K+1) x Nt

    CylinderField() = default;
    explicit CylinderField(std::shared_ptr<const ZonalGrid> g)
        : grid(std::move(g)), coeffs(Eigen::MatrixXd::Zero(grid->K + 1, grid->Nt)) {}

    CylinderField& operator+=(const CylinderField& o);
    CylinderField& operator-=(const CylinderField& o);
    CylinderField& operator*=(double c);
};

CylinderField operator+(CylinderField a, const CylinderField& b);
CylinderField operator-(CylinderField a, const CylinderField& b);
CylinderField operator*(double c, CylinderField a);

/// Nodal values (Ntheta x Nt) -> spectral coefficients. Exact inverse of
/// synthesize on the resolved degree range.
CylinderField analyze(std::shared_ptr<const ZonalGrid> grid, const Eigen::MatrixXd& nodal);
Eigen::MatrixXd synthesize(const CylinderField& f);
/// d/dx of the field at the nodes (spectral in the angular variable).
Eigen::MatrixXd synthesize_dx(const CylinderField& f);

/// Mode-wise cylinder Laplacian (d_tt - lambda_k), fourth-order centered
/// differences in t with one-sided closures at the boundary nodes.
CylinderField cylinder_laplacian(const CylinderField& f);

/// Fourth-order first derivative in t, same stencil policy.
CylinderField d_dt(const CylinderField& f);

/// Weighted-norm bookkeeping: e^{-delta s} on the end regions (s = distance
/// into the end past |t| = R) and cosh^delta(R)/cosh^delta(t) on the neck
/// |t| <= R, with signed delta.
struct WeightedNormSpec {
    double delta = 1.5;
    double R = 0.0; // neck half-length; ends are |t| in (R, L]
    // sups run over |t| <= sup_limit: grids carry a padding period per side
    // whose one-sided closure nodes are not part of the physical domain
    double sup_limit = 1e300;
};

/// sup over nodes of weight * |f|, regions per the spec.
double weighted_norm(const CylinderField& f, const WeightedNormSpec& spec);
double weighted_norm_radial(const ZonalGrid& grid, const Eigen::VectorXd& profile,
                            const WeightedNormSpec& spec);

/// The decay-enforcing variant used by the linear solver to measure bound
/// constants: e^{+delta s} on the ends, cosh^delta(t)/cosh^delta(R) on the
/// neck. Finite exactly for profiles decaying at rate >= delta outward and
/// dipping through the neck.
double decay_norm_radial(const ZonalGrid& grid, const Eigen::VectorXd& profile,
                         const WeightedNormSpec& spec);

/// log(cosh(t)) evaluated without overflow.
double log_cosh(double t);

} // namespace csc
