#pragma once

#include "csc/delaunay.hpp"

#include <array>
#include <utility>
#include <vector>

namespace csc {

/// Spherical-harmonic degree k on S^{n-1}. Under the with-multiplicity
/// indexing j used in the literature, j=0 is k=0, j in {1..n} is k=1 and
/// j >= n+1 starts at k=2.
struct ModeIndex {
    int k = 0;
};

/// lambda_k = k(k+n-2) and the dimension of the degree-k eigenspace.
std::pair<double, long> mode_eigenvalue(Dimension dim, ModeIndex k);

/// Normalized fundamental pair of the degree-k mode ODE on a Delaunay
/// background,
///   v'' + 2 (u'/u) v' + (n u^{4/(n-2)} - lambda_k) v = 0,
/// with v+(0)=1, v+'(0)=0, v-(0)=0, v-'(0)=1, sampled over one period
/// together with the monodromy (the solution map over [0, T_eps]).
///
/// The zero-order coefficient is the direct linearization of the scalar
/// curvature operator in the conformal factor; it reproduces the exact
/// degree-0 fields (translation, necksize) and the degree-1 fields
/// e^{+-t}(-+u' + (n-2)/2 u)/u with Floquet rate exactly 1.
struct ModeSolution {
    DelaunayParams params;
    int k = 0;
    double lambda = 0.0;
    double period = 0.0;
    std::array<double, 4> monodromy{}; // row-major (v,v') solution map over one period
    double gamma = 0.0;                // indicial root
    // det(monodromy), accumulated during integration through QR-renormalized
    // transfer products: the raw 2x2 determinant of the stored matrix is
    // cancellation-dominated once e^{2 gamma T} passes ~1e16.
    double det = 1.0;

    // samples at t_i = i*period/(N-1): v+, v+', v-, v-'
    std::vector<std::array<double, 4>> samples;
    std::vector<double> wronskian_samples; // W(t_i), same renormalized accumulation
    const DelaunayOrbit* orbit = nullptr;  // non-owning; coefficients provider

    /// (v+, v+', v-, v-') at arbitrary t, continued across periods through
    /// powers of the monodromy.
    std::array<double, 4> eval(double t) const;
    /// W(t) = v+ (v-)' - v- (v+)'. Abel's identity with the periodic weight
    /// gives W(t) = (u(0)/u(t))^2.
    double wronskian(double t) const;
};

/// Build the fundamental pair; requires params.T == 0 (neck-anchored frame).
ModeSolution fundamental_pair(const DelaunayOrbit& orbit, ModeIndex k,
                              double tol = 1e-13, int n_samples = 4097);

double wronskian(const ModeSolution& ms, double t);

/// The one-period solution map in the (v, v') basis; det = 1 within 1e-9.
std::array<double, 4> monodromy(const DelaunayOrbit& orbit, ModeIndex k);

/// gamma_k(eps) = log(max |Floquet multiplier|)/T_eps, zero when both
/// multipliers lie on the unit circle. The parabolic degree-0 block is
/// classified by |trace - 2| <= 1e-6, which is stable where the eigenvalue
/// problem is not.
double indicial_root(const DelaunayOrbit& orbit, ModeIndex k);

struct GrowthFit {
    double rate = 0.0;     // least-squares slope of log max-per-period amplitude
    double residual = 0.0; // rms regression residual
    bool reliable = false; // false for bounded / subexponential solutions
};

/// Independent estimator of gamma by log-amplitude regression over several
/// periods of a generically seeded solution. Agrees with indicial_root to
/// ~1e-3 whenever gamma > 0.1.
GrowthFit growth_rate_fit(const DelaunayOrbit& orbit, ModeIndex k, int n_periods = 9);

/// A Floquet solution in normal form s(t) = (periodic factor) * e^{-+gamma t},
/// exactly representable at any range: s(t + m T) = mu^m s(t) with
/// mu = e^{-+gamma T}. direction = +1 decays as t -> +infinity.
struct FloquetProfile {
    int k = 0;
    double gamma = 0.0;
    double period = 0.0;
    int direction = +1;
    std::vector<std::array<double, 2>> samples; // (s, s') on [0, period], s(0)=1
    const DelaunayOrbit* orbit = nullptr;

    std::array<double, 2> eval(double t) const; // (s, s')
    /// d/dt log s at t; the Robin coefficient of the decay condition.
    double log_deriv(double t) const;
};

/// The Floquet solution of degree k decaying in the given direction,
/// normalized to value 1 at the reference neck t = 0. Rejects k with
/// gamma_k = 0.
FloquetProfile select_decaying_solution(const DelaunayOrbit& orbit, ModeIndex k,
                                        int direction);

struct ExpansionCoefficients {
    double a_plus = 0.0;
    double a_minus = 0.0;
    bool ill_conditioned = false;
};

/// Coefficients of a solution profile (f, f') in the (v+, v-) basis at t0 via
/// the u^2-weighted Wronskian pairing; constant in t0 for exact solutions.
ExpansionCoefficients expansion_coefficients(double f, double fp,
                                             const ModeSolution& ms, double t0);

/// CSV row block for the indicial sweep export: n,eps,k,lambda,gamma,trace,det.
struct IndicialRow {
    int n;
    double eps;
    int k;
    double lambda;
    double gamma;
    double trace;
    double det;
};
std::vector<IndicialRow> indicial_sweep(Dimension dim, const std::vector<double>& eps_list,
                                        int k_max);

} // namespace csc
