#pragma once

#include "csc/dimension.hpp"
#include "csc/ode.hpp"

#include <utility>
#include <vector>

namespace csc {

/// Parameters of a Delaunay conformal factor: necksize eps in (0, cbar] and a
/// translation phase T. The factor u_eps is the periodic solution of
///   u'' - ((n-2)^2/4) u + (n(n-2)/4) u^{(n+2)/(n-2)} = 0
/// normalized so u(0) = eps, u'(0) = 0.
struct DelaunayParams {
    Dimension dim;
    double eps;
    double T = 0.0;
};

/// The conserved energy H = (u')^2 - ((n-2)^2/4) u^2 + ((n-2)^2/4) u^{2n/(n-2)}.
/// Rejects u <= 0.
double hamiltonian(Dimension dim, double u, double up);

/// One period of a Delaunay orbit, densely sampled, plus its invariants.
/// Samples are uniform on [0, period] (endpoint inclusive) and evaluation
/// anywhere uses quintic Hermite pieces built from (u, u', u'') with u''
/// supplied exactly by the ODE, so long-range periodic evaluation keeps full
/// relative accuracy.
struct DelaunayOrbit {
    DelaunayParams params;
    double period = 0.0;
    double energy = 0.0;
    double u_max = 0.0;
    bool constant = false; // eps == cbar: u identically cbar
    std::vector<double> us, ups; // samples at t_i = i*period/(Nsamples-1)

    /// (u, u') at arbitrary t; applies the translation phase params.T and
    /// reduces modulo the period.
    std::pair<double, double> eval(double t) const;
    double u(double t) const { return eval(t).first; }
    /// u'' at arbitrary t from the ODE.
    double upp(double t) const;
    /// u''' at arbitrary t from the differentiated ODE.
    double uppp(double t) const;
};

/// Turning-point value u_max(eps): the other root of the energy level set.
double orbit_max(Dimension dim, double eps);

/// Period T_eps by quadrature between the turning points (doubled). For
/// eps == cbar returns the small-oscillation limit 2*pi/sqrt(n-2).
/// Accuracy degrades below eps ~ 0.05 as the orbit approaches the homoclinic;
/// tests stay above that region.
double period(const DelaunayParams& params);

/// Period measured by time-domain integration with event detection on u' = 0.
/// Independent of the quadrature path; used as a cross-check oracle and for
/// locating necks of deformed factors.
double period_by_events(const DelaunayParams& params, double tol = 1e-13);

/// Integrate one period of the orbit and build the sampled representation.
/// tol is the integrator tolerance; ODE residual and energy drift of the
/// samples stay within a small multiple of it.
DelaunayOrbit integrate_orbit(const DelaunayParams& params, double tol = 1e-13,
                              int n_samples = 4097);

/// Raw initial-value integration of the Delaunay ODE from (u0, up0); general
/// tool for oracles (homoclinic orbit, energy-drift measurements).
OdeResult integrate_ivp(Dimension dim, double u0, double up0, double t0, double t1,
                        double rtol, double atol);

/// (u, u') of the periodic extension with phase applied; thin wrapper kept
/// for symmetry with the operation vocabulary.
inline std::pair<double, double> eval_u(const DelaunayOrbit& orbit, double t) {
    return orbit.eval(t);
}

} // namespace csc
