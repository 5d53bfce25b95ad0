#pragma once

#include <cmath>
#include <stdexcept>

namespace csc {

/// Ambient sphere dimension n and the exponents/constants attached to it.
///
/// The conformal-factor equations on the cylinder R x S^{n-1} all involve the
/// critical exponent p = (n+2)/(n-2) and the constants (n-2)^2/4, n(n-2)/4.
/// Supported range is n in [3, 9]: below 3 the exponents blow up, above 9 the
/// quadrature and mode machinery is untested.
struct Dimension {
    int n = 3;

    Dimension() = default;
    explicit Dimension(int n_) : n(n_) {
        if (n < 3) throw std::invalid_argument("Dimension: n must be >= 3");
        if (n > 9) throw std::invalid_argument("Dimension: n > 9 unsupported");
    }

    /// (n+2)/(n-2), the critical nonlinearity exponent.
    double p() const { return double(n + 2) / double(n - 2); }
    /// 2n/(n-2), the exponent appearing in the conserved energy.
    double q() const { return 2.0 * n / double(n - 2); }
    /// 4/(n-2), the conformal-factor exponent.
    double r() const { return 4.0 / double(n - 2); }
    /// (n-2)^2/4, the linear coefficient of the Delaunay ODE.
    double a2() const { return 0.25 * double(n - 2) * double(n - 2); }
    /// n(n-2)/4, the nonlinear coefficient of the Delaunay ODE.
    double b() const { return 0.25 * double(n) * double(n - 2); }
    /// (n-2)/(4(n-1)), the conformal normalization constant c_n.
    double cn() const { return double(n - 2) / (4.0 * double(n - 1)); }
    /// Target scalar curvature n(n-1).
    double target_curvature() const { return double(n) * double(n - 1); }
    /// Scalar curvature of the product cylinder metric, (n-1)(n-2).
    double cylinder_curvature() const { return double(n - 1) * double(n - 2); }
};

/// The constant Delaunay solution cbar = ((n-2)/n)^{(n-2)/4}.
/// It is the unique positive constant solving the Delaunay ODE and the
/// supremum of admissible necksizes.
inline double cylinder_value(Dimension dim) {
    return std::pow(double(dim.n - 2) / double(dim.n), 0.25 * double(dim.n - 2));
}

} // namespace csc
