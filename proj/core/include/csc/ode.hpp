#pragma once

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

namespace csc {

/// One accepted step of an adaptive integration: state and derivative at the
/// left node. Together with the next node this is enough for quintic Hermite
/// reconstruction anywhere inside the step.
struct OdeSample {
    double t;
    std::vector<double> y;
    std::vector<double> dy;
};

struct OdeResult {
    std::vector<OdeSample> samples; // accepted nodes, including both endpoints
    std::size_t n_steps = 0;
    std::size_t n_rejected = 0;
};

class OdeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Dormand-Prince 5(4) with PI step-size control.
///
/// rhs(t, y, dydt) fills dydt. Tolerances are applied per component as
/// atol + rtol*|y|. Throws OdeError if step control collapses.
OdeResult integrate_dopri5(const std::function<void(double, const double*, double*)>& rhs,
                           std::vector<double> y0, double t0, double t1,
                           double rtol, double atol, double h_init = 0.0);

/// Cubic Hermite evaluation of (y, y') on one segment [ta, tb] from endpoint
/// states and derivatives. Used for dense output between accepted nodes.
void hermite_eval(double ta, const double* ya, const double* dya,
                  double tb, const double* yb, const double* dyb,
                  std::size_t dim, double t, double* y_out, double* dy_out);

/// Brent root bracketing solver on [a, b]; f(a), f(b) must have opposite sign.
double brent_root(const std::function<double(double)>& f, double a, double b,
                  double tol = 1e-14, int max_iter = 200);

/// Finite-difference weights on arbitrary nodes (Fornberg's algorithm).
/// Returns weights w such that f^(m)(x0) ~ sum_i w[i] f(x[i]).
std::vector<double> fd_weights(double x0, const std::vector<double>& x, int m);

/// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w);

/// Gauss-Jacobi nodes/weights for weight (1-x^2)^beta on [-1, 1]
/// (the Gegenbauer weight; beta = (n-3)/2 for the zonal transform).
void gauss_gegenbauer(int n, double beta, std::vector<double>& x, std::vector<double>& w);

} // namespace csc
